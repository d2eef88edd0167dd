//! Canonical rational functions over Q(zeta_T)(q_1..q_k) and the embedded
//! multiplicative group Gamma.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::cyclotomic::{CycRat, FieldCtx};
use super::poly::{MPoly, Mono};
use crate::error::QvlaError;

/// Field presentation shared by every scalar in a session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub torsion_order: u32,
    pub num_params: u32,
}

impl FieldSpec {
    pub fn new(torsion_order: u32, num_params: u32) -> Result<Arc<FieldCtx>, QvlaError> {
        if torsion_order < 1 {
            return Err(QvlaError::InvalidInput(
                "torsion order must be >= 1".into(),
            ));
        }
        Ok(Arc::new(FieldCtx::new(torsion_order, num_params)))
    }
}

/// Element of Q(zeta_T)(q_1..q_k) in canonical form:
/// gcd(num, den) = 1 and den monic under graded lex.
#[derive(Clone, Debug)]
pub struct Scalar {
    pub ctx: Arc<FieldCtx>,
    pub num: MPoly,
    pub den: MPoly,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(self.ctx == other.ctx, "mixed field specs");
        self.num == other.num && self.den == other.den
    }
}
impl Eq for Scalar {}

impl Scalar {
    fn k(&self) -> usize {
        self.ctx.num_params as usize
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        let k = ctx.num_params as usize;
        Scalar {
            ctx: ctx.clone(),
            num: MPoly::zero(k),
            den: MPoly::one(k),
        }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        let k = ctx.num_params as usize;
        Scalar {
            ctx: ctx.clone(),
            num: MPoly::one(k),
            den: MPoly::one(k),
        }
    }

    pub fn from_i64(ctx: &Arc<FieldCtx>, n: i64) -> Self {
        let k = ctx.num_params as usize;
        Scalar {
            ctx: ctx.clone(),
            num: MPoly::constant(k, CycRat::from_i64(n)),
            den: MPoly::one(k),
        }
    }

    pub fn from_rational(ctx: &Arc<FieldCtx>, r: BigRational) -> Self {
        let k = ctx.num_params as usize;
        Scalar {
            ctx: ctx.clone(),
            num: MPoly::constant(k, CycRat::from_rational(r)),
            den: MPoly::one(k),
        }
    }

    pub fn ratio_i64(ctx: &Arc<FieldCtx>, n: i64, d: i64) -> Self {
        Self::from_rational(ctx, BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// zeta^e as a scalar.
    pub fn zeta_pow(ctx: &Arc<FieldCtx>, e: i64) -> Self {
        let k = ctx.num_params as usize;
        Scalar {
            ctx: ctx.clone(),
            num: MPoly::constant(k, CycRat::zeta_pow(ctx, e)),
            den: MPoly::one(k),
        }
    }

    /// q_i^e for 0-based parameter index, any integer exponent.
    pub fn param_pow(ctx: &Arc<FieldCtx>, i: usize, e: i64) -> Self {
        let k = ctx.num_params as usize;
        assert!(i < k, "parameter index out of range");
        if e >= 0 {
            Scalar {
                ctx: ctx.clone(),
                num: MPoly::var_pow(k, i, e as u32),
                den: MPoly::one(k),
            }
        } else {
            Scalar {
                ctx: ctx.clone(),
                num: MPoly::one(k),
                den: MPoly::var_pow(k, i, (-e) as u32),
            }
        }
    }

    pub fn from_poly(ctx: &Arc<FieldCtx>, p: MPoly) -> Self {
        Scalar {
            ctx: ctx.clone(),
            num: p,
            den: MPoly::one(ctx.num_params as usize),
        }
        .reduced()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Restore the canonical form; idempotent.
    pub fn reduced(&self) -> Self {
        let ctx = &self.ctx;
        if self.num.is_zero() {
            return Self::zero(ctx);
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        if !den.is_one() {
            // Fast path: single-term denominators cancel monomial-wise.
            if den.terms.len() == 1 && !num.is_zero() {
                let (dm, dc) = {
                    let (m, c) = den.leading().unwrap();
                    (m.clone(), c.clone())
                };
                let common: Vec<u32> = (0..self.k())
                    .map(|v| {
                        num.terms
                            .keys()
                            .map(|m| m.0[v])
                            .min()
                            .unwrap_or(0)
                            .min(dm.0[v])
                    })
                    .collect();
                let g = Mono(common);
                if g.total_degree() > 0 {
                    num = MPoly {
                        num_vars: num.num_vars,
                        terms: num
                            .terms
                            .iter()
                            .map(|(m, c)| (m.div(&g), c.clone()))
                            .collect(),
                    };
                    den = MPoly::monomial(den.num_vars, dm.div(&g), dc);
                }
            } else {
                let g = num.gcd(&den, ctx);
                if !g.is_one() {
                    num = num.exact_div(&g, ctx);
                    den = den.exact_div(&g, ctx);
                }
            }
        }
        // Monic denominator fixes the representative.
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = lc.inv(ctx);
            num = num.scale(&inv, ctx);
            den = den.scale(&inv, ctx);
        }
        Scalar {
            ctx: ctx.clone(),
            num,
            den,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let ctx = &self.ctx;
        let num = self
            .num
            .mul(&other.den, ctx)
            .add(&other.num.mul(&self.den, ctx));
        let den = self.den.mul(&other.den, ctx);
        Scalar {
            ctx: ctx.clone(),
            num,
            den,
        }
        .reduced()
    }

    pub fn neg(&self) -> Self {
        Scalar {
            ctx: self.ctx.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let ctx = &self.ctx;
        Scalar {
            ctx: ctx.clone(),
            num: self.num.mul(&other.num, ctx),
            den: self.den.mul(&other.den, ctx),
        }
        .reduced()
    }

    pub fn inv(&self) -> Result<Self, QvlaError> {
        if self.is_zero() {
            return Err(QvlaError::InvalidInput("division by zero scalar".into()));
        }
        Ok(Scalar {
            ctx: self.ctx.clone(),
            num: self.den.clone(),
            den: self.num.clone(),
        }
        .reduced())
    }

    pub fn div(&self, other: &Self) -> Result<Self, QvlaError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, QvlaError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

/// Element of Gamma = <zeta_T> x <q_1> x ... x <q_k>, stored by exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElem {
    /// Reduced to [0, T).
    pub torsion: u32,
    pub free: Vec<i64>,
}

impl GroupElem {
    pub fn identity(ctx: &FieldCtx) -> Self {
        GroupElem {
            torsion: 0,
            free: vec![0; ctx.num_params as usize],
        }
    }

    pub fn new(ctx: &FieldCtx, torsion: i64, free: Vec<i64>) -> Self {
        assert_eq!(free.len(), ctx.num_params as usize);
        GroupElem {
            torsion: torsion.rem_euclid(ctx.torsion_order as i64) as u32,
            free,
        }
    }

    /// The torsion generator zeta_T.
    pub fn zeta(ctx: &FieldCtx) -> Self {
        Self::new(ctx, 1, vec![0; ctx.num_params as usize])
    }

    /// The free generator q_{i+1}.
    pub fn param(ctx: &FieldCtx, i: usize) -> Self {
        let mut free = vec![0; ctx.num_params as usize];
        free[i] = 1;
        GroupElem { torsion: 0, free }
    }

    pub fn is_identity(&self) -> bool {
        self.torsion == 0 && self.free.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self, ctx: &FieldCtx) -> Self {
        GroupElem {
            torsion: (self.torsion + other.torsion) % ctx.torsion_order,
            free: self
                .free
                .iter()
                .zip(&other.free)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn inv(&self, ctx: &FieldCtx) -> Self {
        GroupElem {
            torsion: (ctx.torsion_order - self.torsion) % ctx.torsion_order,
            free: self.free.iter().map(|&e| -e).collect(),
        }
    }

    pub fn pow(&self, n: i64, ctx: &FieldCtx) -> Self {
        GroupElem {
            torsion: ((self.torsion as i64 * n).rem_euclid(ctx.torsion_order as i64)) as u32,
            free: self.free.iter().map(|e| e * n).collect(),
        }
    }

    /// Comparison key used by the directed relation rewriting: closer to the
    /// identity is smaller.
    pub fn rewrite_key(&self) -> (u32, i64, Vec<i64>) {
        (
            self.torsion,
            self.free.iter().map(|e| e.abs()).sum(),
            self.free.clone(),
        )
    }
}

/// The value of g^n in the field, under zeta |-> zeta, q_i |-> q_i.
pub fn embed_power(ctx: &Arc<FieldCtx>, g: &GroupElem, n: i64) -> Scalar {
    let mut acc = Scalar::zeta_pow(ctx, g.torsion as i64 * n);
    for (i, &e) in g.free.iter().enumerate() {
        if e != 0 {
            acc = acc.mul(&Scalar::param_pow(ctx, i, e * n));
        }
    }
    acc
}

pub fn embed(ctx: &Arc<FieldCtx>, g: &GroupElem) -> Scalar {
    embed_power(ctx, g, 1)
}

/// Stable total order on scalars through the canonical form, used only to fix
/// deterministic iteration orders.
pub fn scalar_sort_key(s: &Scalar) -> String {
    crate::scalars::render::render_scalar(s)
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        scalar_sort_key(self).cmp(&scalar_sort_key(other))
    }
}
impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_t1_k1() -> Arc<FieldCtx> {
        FieldSpec::new(1, 1).unwrap()
    }

    #[test]
    fn q_minus_qinv_times_inverse_is_one() {
        let ctx = ctx_t1_k1();
        let q = Scalar::param_pow(&ctx, 0, 1);
        let qinv = Scalar::param_pow(&ctx, 0, -1);
        let d = q.sub(&qinv);
        let i = d.inv().unwrap();
        assert!(d.mul(&i).is_one());
    }

    #[test]
    fn zeta_mul_t2() {
        let ctx = FieldSpec::new(2, 0).unwrap();
        let z = Scalar::zeta_pow(&ctx, 1);
        assert!(z.mul(&z).is_one());
    }

    #[test]
    fn zeta_mul_t4() {
        let ctx = FieldSpec::new(4, 0).unwrap();
        let z = Scalar::zeta_pow(&ctx, 1);
        assert_eq!(z.mul(&z), Scalar::from_i64(&ctx, -1));
    }

    #[test]
    fn canonical_form_of_sum() {
        let ctx = ctx_t1_k1();
        // (q^2 - 1)/(q - 1) should reduce to q + 1
        let q = Scalar::param_pow(&ctx, 0, 1);
        let one = Scalar::one(&ctx);
        let num = q.mul(&q).sub(&one);
        let den = q.sub(&one);
        let r = num.div(&den).unwrap();
        assert_eq!(r, q.add(&one));
    }

    #[test]
    fn group_arith() {
        let ctx = FieldSpec::new(3, 1).unwrap();
        let z = GroupElem::zeta(&ctx);
        let z2 = z.pow(2, &ctx);
        assert!(z.mul(&z2, &ctx).is_identity());
        let q = GroupElem::param(&ctx, 0);
        assert_eq!(q.pow(2, &ctx).inv(&ctx), q.pow(-2, &ctx));
    }

    #[test]
    fn embed_power_examples() {
        let ctx = FieldSpec::new(2, 1).unwrap();
        let id = GroupElem::identity(&ctx);
        assert!(embed_power(&ctx, &id, -7).is_one());
        let q = GroupElem::param(&ctx, 0);
        assert_eq!(embed_power(&ctx, &q, 3), Scalar::param_pow(&ctx, 0, 3));
        let z = GroupElem::zeta(&ctx);
        assert_eq!(embed_power(&ctx, &z, 5), Scalar::from_i64(&ctx, -1));
    }

    #[test]
    fn embed_power_homomorphism() {
        let ctx = FieldSpec::new(4, 2).unwrap();
        let g = GroupElem::new(&ctx, 3, vec![2, -1]);
        let h = GroupElem::new(&ctx, 1, vec![-1, 4]);
        for n in -3..=3 {
            let lhs = embed_power(&ctx, &g.mul(&h, &ctx), n);
            let rhs = embed_power(&ctx, &g, n).mul(&embed_power(&ctx, &h, n));
            assert_eq!(lhs, rhs);
        }
        for (m, n) in [(2, 3), (-1, 4), (0, -5)] {
            let lhs = embed_power(&ctx, &g, m + n);
            let rhs = embed_power(&ctx, &g, m).mul(&embed_power(&ctx, &g, n));
            assert_eq!(lhs, rhs);
        }
    }
}
