//! Sparse multivariate polynomials in q_1..q_k over Q(zeta_T).
//!
//! Monomials are ordered graded-lexicographically; this order fixes the
//! canonical form of every rational function built on top.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::cyclotomic::{CycRat, FieldCtx};

/// Exponent vector of a monomial, length = num_params.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(k: usize) -> Self {
        Mono(vec![0; k])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    pub num_vars: usize,
    pub terms: BTreeMap<Mono, CycRat>,
}

impl MPoly {
    pub fn zero(k: usize) -> Self {
        MPoly {
            num_vars: k,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(k: usize, c: CycRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(k), c);
        }
        MPoly { num_vars: k, terms }
    }

    pub fn one(k: usize) -> Self {
        Self::constant(k, CycRat::one())
    }

    /// q_i^e for the 0-based variable index i.
    pub fn var_pow(k: usize, i: usize, e: u32) -> Self {
        let mut m = vec![0; k];
        m[i] = e;
        let mut terms = BTreeMap::new();
        terms.insert(Mono(m), CycRat::one());
        MPoly { num_vars: k, terms }
    }

    pub fn monomial(k: usize, m: Mono, c: CycRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { num_vars: k, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::one(self.num_vars))
                .map_or(false, |c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
            || (self.terms.len() == 1 && self.terms.keys().next().unwrap().total_degree() == 0)
    }

    /// Leading term under graded lex.
    pub fn leading(&self) -> Option<(&Mono, &CycRat)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(e) => {
                    let s = e.add(c);
                    if s.is_zero() {
                        terms.remove(m);
                    } else {
                        *e = s;
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        MPoly {
            num_vars: self.num_vars,
            terms,
        }
    }

    pub fn neg(&self) -> Self {
        MPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self, ctx: &FieldCtx) -> Self {
        let mut terms: BTreeMap<Mono, CycRat> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1.mul(c2, ctx);
                match terms.get_mut(&m) {
                    Some(e) => {
                        let s = e.add(&c);
                        if s.is_zero() {
                            terms.remove(&m);
                        } else {
                            *e = s;
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            terms.insert(m, c);
                        }
                    }
                }
            }
        }
        MPoly {
            num_vars: self.num_vars,
            terms,
        }
    }

    pub fn scale(&self, c: &CycRat, ctx: &FieldCtx) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        MPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x.mul(c, ctx)))
                .collect(),
        }
    }

    /// Exact division; panics if the division is not exact.
    pub fn exact_div(&self, d: &Self, ctx: &FieldCtx) -> Self {
        assert!(!d.is_zero(), "exact_div by zero");
        let mut rem = self.clone();
        let mut quot = Self::zero(self.num_vars);
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let dc_inv = dc.inv(ctx);
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            assert!(dm.divides(&rm), "inexact polynomial division");
            let qm = rm.div(&dm);
            let qc = rc.mul(&dc_inv, ctx);
            let t = MPoly::monomial(self.num_vars, qm, qc);
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(d, ctx));
        }
        quot
    }

    /// Max exponent of variable `v` across terms.
    fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// First variable with positive degree in self, if any.
    fn main_var(&self) -> Option<usize> {
        (0..self.num_vars).find(|&v| self.degree_in(v) > 0)
    }

    /// Coefficients of self viewed as a univariate polynomial in variable `v`,
    /// index = exponent of v; each coefficient has v-exponent zero.
    fn as_univariate(&self, v: usize) -> Vec<MPoly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Self::zero(self.num_vars); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[v] as usize;
            let mut m2 = m.clone();
            m2.0[v] = 0;
            out[e] = out[e].add(&MPoly::monomial(self.num_vars, m2, c.clone()));
        }
        out
    }

    fn from_univariate(coeffs: &[MPoly], v: usize, k: usize, ctx: &FieldCtx) -> MPoly {
        let mut acc = MPoly::zero(k);
        for (e, c) in coeffs.iter().enumerate() {
            let t = c.mul(&MPoly::var_pow(k, v, e as u32), ctx);
            acc = acc.add(&t);
        }
        acc
    }

    /// GCD by primitive pseudo-remainder sequences, recursing on variables.
    ///
    /// Constants are units here (the coefficient ring is a field), so any
    /// nonzero constant input short-circuits to 1.
    pub fn gcd(&self, other: &Self, ctx: &FieldCtx) -> Self {
        if self.is_zero() {
            return other.normalized_monic(ctx);
        }
        if other.is_zero() {
            return self.normalized_monic(ctx);
        }
        if self.is_constant() || other.is_constant() {
            return Self::one(self.num_vars);
        }
        let v = match self.main_var().into_iter().chain(other.main_var()).min() {
            Some(v) => v,
            None => return Self::one(self.num_vars),
        };
        let a = self.as_univariate(v);
        let b = other.as_univariate(v);
        if a.len() == 1 || b.len() == 1 {
            // One of them does not involve v after all; gcd of contents.
            let ca = Self::content_of(&a, ctx);
            let cb = Self::content_of(&b, ctx);
            return ca.gcd(&cb, ctx);
        }
        let ca = Self::content_of(&a, ctx);
        let cb = Self::content_of(&b, ctx);
        let g0 = ca.gcd(&cb, ctx);
        let pa: Vec<MPoly> = a.iter().map(|c| c.exact_div(&ca, ctx)).collect();
        let pb: Vec<MPoly> = b.iter().map(|c| c.exact_div(&cb, ctx)).collect();
        let prim = Self::prim_prs(pa, pb, v, self.num_vars, ctx);
        g0.mul(&prim, ctx).normalized_monic(ctx)
    }

    fn content_of(coeffs: &[MPoly], ctx: &FieldCtx) -> MPoly {
        let k = coeffs[0].num_vars;
        let mut g = MPoly::zero(k);
        for c in coeffs {
            g = g.gcd(c, ctx);
            if g.is_one() {
                break;
            }
        }
        if g.is_zero() {
            MPoly::one(k)
        } else {
            g
        }
    }

    /// Primitive PRS on univariate-in-v representations with multivariate coefficients.
    fn prim_prs(
        mut f: Vec<MPoly>,
        mut g: Vec<MPoly>,
        v: usize,
        k: usize,
        ctx: &FieldCtx,
    ) -> MPoly {
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        loop {
            let r = Self::pseudo_rem(&f, &g, ctx);
            if r.iter().all(|c| c.is_zero()) {
                // g (made primitive) is the gcd.
                let gp = Self::from_univariate(&g, v, k, ctx);
                let cont = Self::content_of(&g, ctx);
                return gp.exact_div(&cont, ctx);
            }
            let r = {
                let mut rr = r;
                while rr.last().map_or(false, |c| c.is_zero()) {
                    rr.pop();
                }
                rr
            };
            if r.len() == 1 {
                // Degree 0 remainder: gcd has no v-content beyond contents already split off.
                return MPoly::one(k);
            }
            let cont = Self::content_of(&r, ctx);
            let rp: Vec<MPoly> = r.iter().map(|c| c.exact_div(&cont, ctx)).collect();
            f = g;
            g = rp;
        }
    }

    /// lc(g)^(deg f - deg g + 1) * f mod g, univariate in v with poly coefficients.
    fn pseudo_rem(f: &[MPoly], g: &[MPoly], ctx: &FieldCtx) -> Vec<MPoly> {
        let df = f.len() - 1;
        let dg = g.len() - 1;
        let lg = g[dg].clone();
        let mut r: Vec<MPoly> = f.to_vec();
        let mut steps = df as i64 - dg as i64 + 1;
        while r.len() >= g.len() && !r.iter().all(|c| c.is_zero()) {
            let dr = r.len() - 1;
            if r[dr].is_zero() {
                r.pop();
                continue;
            }
            let lr = r[dr].clone();
            // r = lg*r - lr * x^(dr-dg) * g
            for c in r.iter_mut() {
                *c = c.mul(&lg, ctx);
            }
            for (i, gc) in g.iter().enumerate() {
                let idx = dr - dg + i;
                let t = lr.mul(gc, ctx);
                r[idx] = r[idx].sub(&t);
            }
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
            steps -= 1;
        }
        // Pad remaining multiplier so the PRS stays a true pseudo-remainder.
        while steps > 0 {
            for c in r.iter_mut() {
                *c = c.mul(&lg, ctx);
            }
            steps -= 1;
        }
        r
    }

    /// Divide by the leading coefficient so the graded-lex leading coefficient is 1.
    pub fn normalized_monic(&self, ctx: &FieldCtx) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                if c.is_one() {
                    self.clone()
                } else {
                    let inv = c.inv(ctx);
                    self.scale(&inv, ctx)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> FieldCtx {
        FieldCtx::new(1, 2)
    }

    fn q(i: usize) -> MPoly {
        MPoly::var_pow(2, i, 1)
    }

    fn int(n: i64) -> MPoly {
        MPoly::constant(2, CycRat::from_i64(n))
    }

    #[test]
    fn grlex_order() {
        // q0^2 > q0 q1 > q1^2 > q0 > q1 > 1 in graded lex
        let m1 = Mono(vec![2, 0]);
        let m2 = Mono(vec![1, 1]);
        let m3 = Mono(vec![0, 2]);
        let m4 = Mono(vec![1, 0]);
        assert!(m1 > m2 && m2 > m3 && m3 > m4);
    }

    #[test]
    fn mul_and_exact_div() {
        let c = ctx();
        let f = q(0).add(&q(1)); // q0 + q1
        let g = q(0).sub(&q(1)); // q0 - q1
        let p = f.mul(&g, &c); // q0^2 - q1^2
        assert_eq!(p.exact_div(&f, &c), g);
        assert_eq!(p.exact_div(&g, &c), f);
    }

    #[test]
    fn gcd_basic() {
        let c = ctx();
        let f = q(0).add(&q(1));
        let g = q(0).sub(&q(1));
        let a = f.mul(&g, &c);
        let b = f.mul(&f, &c);
        let d = a.gcd(&b, &c);
        // gcd should be f up to unit, and we normalize monic
        assert_eq!(d, f.normalized_monic(&c));
    }

    #[test]
    fn gcd_univariate_in_second_var() {
        let c = ctx();
        // (q1^2 - 1)(q1 + 2) vs (q1^2 - 1)
        let f = q(1).mul(&q(1), &c).sub(&int(1));
        let g = f.mul(&q(1).add(&int(2)), &c);
        assert_eq!(g.gcd(&f, &c), f.normalized_monic(&c));
    }

    #[test]
    fn gcd_coprime() {
        let c = ctx();
        let f = q(0).add(&int(1));
        let g = q(1).add(&int(1));
        assert!(f.gcd(&g, &c).is_one());
    }
}
