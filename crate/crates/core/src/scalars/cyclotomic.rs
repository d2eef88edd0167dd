//! The cyclotomic rationals Q(zeta_T), represented as Q[x]/Phi_T(x).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Compute all divisors of `n` in ascending order.
fn divisors(n: u32) -> Vec<u32> {
    let mut divs = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            divs.push(i);
            if i != n / i {
                divs.push(n / i);
            }
        }
        i += 1;
    }
    divs.sort_unstable();
    divs
}

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(out)
}

/// Division with remainder in Q[x]; divisor must be nonzero.
fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem: Vec<BigRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    if rem.len() <= db {
        return (Vec::new(), trim(rem));
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = &rem[dr] / lead;
        quot[dr - db] = c.clone();
        for (k, bk) in b.iter().enumerate() {
            let idx = dr - db + k;
            let delta = &c * bk;
            rem[idx] -= delta;
        }
        rem = trim(rem);
        if rem.is_empty() {
            break;
        }
    }
    (trim(quot), rem)
}

/// The T-th cyclotomic polynomial, computed by recursive division of x^T - 1.
pub fn cyclotomic_poly(t: u32) -> Vec<BigRational> {
    assert!(t >= 1, "torsion order must be positive");
    if t == 1 {
        return vec![-BigRational::one(), BigRational::one()];
    }
    let mut result = vec![BigRational::zero(); t as usize + 1];
    result[0] = -BigRational::one();
    result[t as usize] = BigRational::one();
    for d in divisors(t) {
        if d == t {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        let (q, r) = poly_divrem(&result, &phi_d);
        debug_assert!(r.is_empty(), "cyclotomic division must be exact");
        result = q;
    }
    result
}

/// Shared per-session field data: torsion order, number of parameters, and Phi_T.
#[derive(Debug)]
pub struct FieldCtx {
    pub torsion_order: u32,
    pub num_params: u32,
    /// Monic Phi_T, lowest degree first.
    pub phi: Vec<BigRational>,
}

impl FieldCtx {
    pub fn new(torsion_order: u32, num_params: u32) -> Self {
        FieldCtx {
            torsion_order,
            num_params,
            phi: cyclotomic_poly(torsion_order),
        }
    }

    /// Degree of the extension Q(zeta_T)/Q.
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.torsion_order == other.torsion_order && self.num_params == other.num_params
    }
}
impl Eq for FieldCtx {}

/// Element of Q(zeta_T): coefficient vector in the power basis 1, zeta, ..., zeta^{d-1}.
///
/// The vector is kept trimmed, so `coeffs.is_empty()` means zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycRat {
    pub coeffs: Vec<BigRational>,
}

impl CycRat {
    pub fn zero() -> Self {
        CycRat { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        CycRat {
            coeffs: vec![BigRational::one()],
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        if r.is_zero() {
            Self::zero()
        } else {
            CycRat { coeffs: vec![r] }
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// zeta^k reduced mod Phi_T.
    pub fn zeta_pow(ctx: &FieldCtx, k: i64) -> Self {
        let t = ctx.torsion_order as i64;
        let k = k.rem_euclid(t) as usize;
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = BigRational::one();
        CycRat { coeffs: v }.reduce(ctx)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Reduce modulo Phi_T to degree < deg Phi_T.
    fn reduce(mut self, ctx: &FieldCtx) -> Self {
        self.coeffs = trim(self.coeffs);
        if self.coeffs.len() > ctx.degree() {
            let (_, r) = poly_divrem(&self.coeffs, &ctx.phi);
            self.coeffs = r;
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            v[i] += c;
        }
        CycRat { coeffs: trim(v) }
    }

    pub fn neg(&self) -> Self {
        CycRat {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self, ctx: &FieldCtx) -> Self {
        CycRat {
            coeffs: poly_mul(&self.coeffs, &other.coeffs),
        }
        .reduce(ctx)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self, ctx: &FieldCtx) -> Self {
        assert!(!self.is_zero(), "inverse of zero in Q(zeta)");
        // Maintain r0 = s0*phi + t0*self (t coefficients tracked only).
        let mut r0 = ctx.phi.clone();
        let mut r1 = self.coeffs.clone();
        let mut t0: Vec<BigRational> = Vec::new();
        let mut t1 = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let qt = poly_mul(&q, &t1);
            let mut t2 = t0.clone();
            // t2 = t0 - q*t1
            if t2.len() < qt.len() {
                t2.resize(qt.len(), BigRational::zero());
            }
            for (i, c) in qt.iter().enumerate() {
                t2[i] -= c;
            }
            t0 = t1;
            t1 = trim(t2);
            r0 = r1;
            r1 = r;
        }
        // r0 = gcd, a nonzero constant since Phi_T is irreducible and self != 0 mod Phi_T.
        assert_eq!(r0.len(), 1, "noninvertible element, Phi_T not coprime");
        let c = r0[0].clone();
        let inv: Vec<BigRational> = t0.iter().map(|x| x / &c).collect();
        CycRat { coeffs: trim(inv) }.reduce(ctx)
    }

    /// Signed heuristic used only to pick a canonical unit normalization.
    pub fn is_negative_lead(&self) -> bool {
        self.coeffs.last().map_or(false, |c| c.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys() {
        // Phi_1 = x - 1, Phi_2 = x + 1, Phi_4 = x^2 + 1, Phi_6 = x^2 - x + 1
        assert_eq!(cyclotomic_poly(1), vec![rat(-1, 1), rat(1, 1)]);
        assert_eq!(cyclotomic_poly(2), vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(cyclotomic_poly(4), vec![rat(1, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(cyclotomic_poly(6), vec![rat(1, 1), rat(-1, 1), rat(1, 1)]);
        assert_eq!(cyclotomic_poly(12).len(), 5); // degree 4
    }

    #[test]
    fn zeta_squared_t2_is_one() {
        let ctx = FieldCtx::new(2, 0);
        let z = CycRat::zeta_pow(&ctx, 1);
        assert_eq!(z.mul(&z, &ctx), CycRat::one());
    }

    #[test]
    fn zeta_squared_t4_is_minus_one() {
        let ctx = FieldCtx::new(4, 0);
        let z = CycRat::zeta_pow(&ctx, 1);
        assert_eq!(z.mul(&z, &ctx), CycRat::from_i64(-1));
    }

    #[test]
    fn inverse_roundtrip() {
        let ctx = FieldCtx::new(5, 0);
        let z = CycRat::zeta_pow(&ctx, 1);
        let x = z.add(&CycRat::from_i64(3));
        let y = x.inv(&ctx);
        assert_eq!(x.mul(&y, &ctx), CycRat::one());
    }

    #[test]
    fn zeta_order_exact() {
        let ctx = FieldCtx::new(6, 0);
        let z = CycRat::zeta_pow(&ctx, 1);
        let mut p = CycRat::one();
        for k in 1..=6 {
            p = p.mul(&z, &ctx);
            if k < 6 {
                assert_ne!(p, CycRat::one(), "zeta^{} should not be 1", k);
            }
        }
        assert_eq!(p, CycRat::one());
    }
}
