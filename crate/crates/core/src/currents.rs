//! Formal distributions, twisted delta functions and the expansion calculus
//! on finite Laurent windows.
//!
//! The canonical delta basis is D^(i)_{w,zeta}(z, lambda*w), the i-th divided
//! (w^zeta d/dw)-derivative of z^(zeta-1) delta(lambda*w/z). Every other
//! argument form is rewritten into this basis.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::QvlaError;
use crate::scalars::{embed_power, FieldCtx, GroupElem, Scalar};

/// Identifies one generating current, e.g. `L[3]` or `a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorIndex {
    pub family: String,
    pub params: Vec<i64>,
}

impl GeneratorIndex {
    pub fn new(family: &str, params: Vec<i64>) -> Self {
        GeneratorIndex {
            family: family.to_string(),
            params,
        }
    }

    pub fn simple(family: &str) -> Self {
        Self::new(family, Vec::new())
    }
}

impl std::fmt::Display for GeneratorIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.family)
        } else {
            let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "{}[{}]", self.family, ps.join(","))
        }
    }
}

/// Values that can live in window cells.
pub trait Coeff: Clone {
    fn czero() -> Self;
    fn cadd(&self, other: &Self) -> Self;
    fn cscale(&self, s: &Scalar) -> Self;
    fn cis_zero(&self) -> bool;
}

impl Coeff for Scalar {
    fn czero() -> Self {
        unreachable!("scalar windows are built with explicit context")
    }
    fn cadd(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn cscale(&self, s: &Scalar) -> Self {
        self.mul(s)
    }
    fn cis_zero(&self) -> bool {
        self.is_zero()
    }
}

/// Formal combination of decorated mode symbols (family, scale, mode index).
/// Used as the coefficient space of window expansions below the quotient
/// machinery; no relations are applied here.
pub type FormalModes = BTreeMap<(GeneratorIndex, GroupElem, i64), Scalar>;

impl Coeff for FormalModes {
    fn czero() -> Self {
        BTreeMap::new()
    }
    fn cadd(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other {
            match out.get_mut(k) {
                Some(e) => {
                    let s = e.add(v);
                    if s.is_zero() {
                        out.remove(k);
                    } else {
                        *e = s;
                    }
                }
                None => {
                    if !v.is_zero() {
                        out.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        out
    }
    fn cscale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return BTreeMap::new();
        }
        self.iter()
            .map(|(k, v)| (k.clone(), v.mul(s)))
            .collect()
    }
    fn cis_zero(&self) -> bool {
        self.is_empty()
    }
}

/// Finite truncation of a formal Laurent series in one or more variables.
/// Coefficients outside the declared ranges are unknown, never assumed zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentWindow<V> {
    pub vars: Vec<String>,
    pub ranges: Vec<(i64, i64)>,
    pub cells: BTreeMap<Vec<i64>, V>,
}

impl<V: Coeff> LaurentWindow<V> {
    pub fn empty(vars: Vec<String>, ranges: Vec<(i64, i64)>) -> Self {
        LaurentWindow {
            vars,
            ranges,
            cells: BTreeMap::new(),
        }
    }

    pub fn in_range(&self, key: &[i64]) -> bool {
        key.iter()
            .zip(&self.ranges)
            .all(|(k, (lo, hi))| lo <= k && k <= hi)
    }

    pub fn insert_add(&mut self, key: Vec<i64>, v: V) {
        debug_assert!(self.in_range(&key), "window key out of range");
        if v.cis_zero() {
            return;
        }
        match self.cells.get_mut(&key) {
            Some(e) => {
                let s = e.cadd(&v);
                if s.cis_zero() {
                    self.cells.remove(&key);
                } else {
                    *e = s;
                }
            }
            None => {
                self.cells.insert(key, v);
            }
        }
    }

    pub fn get(&self, key: &[i64]) -> Option<&V> {
        self.cells.get(key)
    }

    pub fn add(&self, other: &Self) -> Self {
        // Intersection of ranges: outside is unknown for one side.
        let ranges: Vec<(i64, i64)> = self
            .ranges
            .iter()
            .zip(&other.ranges)
            .map(|((a, b), (c, d))| (*a.max(c), *b.min(d)))
            .collect();
        let mut out = LaurentWindow::empty(self.vars.clone(), ranges);
        for (k, v) in &self.cells {
            if out.in_range(k) {
                out.insert_add(k.clone(), v.clone());
            }
        }
        for (k, v) in &other.cells {
            if out.in_range(k) {
                out.insert_add(k.clone(), v.clone());
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = LaurentWindow::empty(self.vars.clone(), self.ranges.clone());
        for (k, v) in &self.cells {
            out.insert_add(k.clone(), v.cscale(s));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    /// Restrict to a smaller window.
    pub fn restrict(&self, ranges: Vec<(i64, i64)>) -> Self {
        let mut out = LaurentWindow::empty(self.vars.clone(), ranges);
        for (k, v) in &self.cells {
            if out.in_range(k) {
                out.insert_add(k.clone(), v.clone());
            }
        }
        out
    }

    /// First nonzero cell of the difference, as a witness for reports.
    pub fn first_difference(&self, other: &Self) -> Option<Vec<i64>>
    where
        V: PartialEq,
    {
        let ranges: Vec<(i64, i64)> = self
            .ranges
            .iter()
            .zip(&other.ranges)
            .map(|((a, b), (c, d))| (*a.max(c), *b.min(d)))
            .collect();
        let probe = LaurentWindow::<V>::empty(self.vars.clone(), ranges);
        let mut keys: Vec<&Vec<i64>> = self
            .cells
            .keys()
            .chain(other.cells.keys())
            .filter(|k| probe.in_range(k))
            .collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            match (self.cells.get(k), other.cells.get(k)) {
                (Some(a), Some(b)) if a == b => {}
                (None, None) => {}
                (Some(a), None) if a.cis_zero() => {}
                (None, Some(b)) if b.cis_zero() => {}
                _ => return Some(k.clone()),
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Divided-power coefficients of the twisted derivative calculus.
// ---------------------------------------------------------------------------

/// (1/i!) * prod_{t=0}^{i-1} (m + t*(zeta-1)): the scalar picked out by
/// Res_z z^{m-zeta} of D^(i)_{w,zeta}(z,w). For zeta = 0 this is binom(m, i).
pub fn divided_product(ctx: &Arc<FieldCtx>, m: i64, i: u32, zeta: i64) -> Scalar {
    let mut num = num_bigint::BigInt::from(1);
    for t in 0..i as i64 {
        num *= num_bigint::BigInt::from(m + t * (zeta - 1));
    }
    let mut den = num_bigint::BigInt::from(1);
    for t in 1..=i as i64 {
        den *= num_bigint::BigInt::from(t);
    }
    Scalar::from_rational(ctx, num_rational::BigRational::new(num, den))
}

/// prod_{s=1}^{j} (s*(zeta-1) - p): the factor produced by applying
/// (w^zeta d/dw)^j to the mode-p term w^(-p+zeta-1) of a current.
pub fn current_deriv_factor(ctx: &Arc<FieldCtx>, p: i64, j: u32, zeta: i64) -> Scalar {
    let mut num = num_bigint::BigInt::from(1);
    for s in 1..=j as i64 {
        num *= num_bigint::BigInt::from(s * (zeta - 1) - p);
    }
    Scalar::from_rational(ctx, num_rational::BigRational::from_integer(num))
}

/// Generalized binomial coefficient binom(m, n) for any integer m, n >= 0.
pub fn gen_binomial(ctx: &Arc<FieldCtx>, m: i64, n: u32) -> Scalar {
    divided_product(ctx, m, n, 0)
}

/// n! as a scalar.
pub fn factorial(ctx: &Arc<FieldCtx>, n: u32) -> Scalar {
    let mut acc = num_bigint::BigInt::from(1);
    for t in 2..=n as i64 {
        acc *= num_bigint::BigInt::from(t);
    }
    Scalar::from_rational(ctx, num_rational::BigRational::from_integer(acc))
}

// ---------------------------------------------------------------------------
// Current expressions.
// ---------------------------------------------------------------------------

/// A finite sum  sum mu * (v^zeta d/dv)^n  a(alpha * v)  in one variable.
///
/// The same data serves two readings: currents of the presented algebra
/// (scale folded into undecorated modes) and currents of a derived twist
/// algebra (decorated modes a^{alpha,zeta}). The stored twist is the power of
/// v in the derivative operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentExpr {
    pub twist: i64,
    pub terms: BTreeMap<(GeneratorIndex, GroupElem, u32), Scalar>,
}

impl CurrentExpr {
    pub fn zero(twist: i64) -> Self {
        CurrentExpr {
            twist,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(twist: i64, mu: Scalar, n: u32, alpha: GroupElem, a: GeneratorIndex) -> Self {
        let mut e = Self::zero(twist);
        e.add_term(mu, n, alpha, a);
        e
    }

    pub fn add_term(&mut self, mu: Scalar, n: u32, alpha: GroupElem, a: GeneratorIndex) {
        if mu.is_zero() {
            return;
        }
        let key = (a, alpha, n);
        match self.terms.get_mut(&key) {
            Some(e) => {
                let s = e.add(&mu);
                if s.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *e = s;
                }
            }
            None => {
                self.terms.insert(key, mu);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, QvlaError> {
        if self.twist != other.twist {
            return Err(QvlaError::Contract(
                "cannot add current expressions with different twists".into(),
            ));
        }
        let mut out = self.clone();
        for ((a, alpha, n), mu) in &other.terms {
            out.add_term(mu.clone(), *n, alpha.clone(), a.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.twist);
        }
        CurrentExpr {
            twist: self.twist,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.mul(s)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Increment the derivative counter; the requested zeta must match.
    pub fn zeta_derivative(&self, zeta: i64, times: u32) -> Result<Self, QvlaError> {
        if zeta != self.twist {
            return Err(QvlaError::Contract(format!(
                "derivative twist {} does not match expression twist {}",
                zeta, self.twist
            )));
        }
        let mut out = Self::zero(self.twist);
        for ((a, alpha, n), mu) in &self.terms {
            out.add_term(mu.clone(), n + times, alpha.clone(), a.clone());
        }
        Ok(out)
    }

    /// Expand on a window with decorated modes a^{alpha,zeta}(p) as symbols.
    /// The variable exponent of mode p in term (mu, n, alpha, a) is
    /// -p + (n+1)*(zeta-1), with coefficient mu * prod factor.
    pub fn expand_decorated(
        &self,
        ctx: &Arc<FieldCtx>,
        range: (i64, i64),
    ) -> LaurentWindow<FormalModes> {
        let zeta = self.twist;
        let mut out = LaurentWindow::empty(vec!["w".into()], vec![range]);
        for e in range.0..=range.1 {
            let mut cell: FormalModes = BTreeMap::new();
            for ((a, alpha, n), mu) in &self.terms {
                let p = -e + (*n as i64 + 1) * (zeta - 1);
                let f = current_deriv_factor(ctx, p, *n, zeta);
                let c = mu.mul(&f);
                if c.is_zero() {
                    continue;
                }
                let key = (a.clone(), alpha.clone(), p);
                let entry = cell.remove(&key).unwrap_or_else(|| Scalar::zero(ctx));
                let s = entry.add(&c);
                if !s.is_zero() {
                    cell.insert(key, s);
                }
            }
            out.insert_add(vec![e], cell);
        }
        out
    }

    /// Expand on a window reading the terms as currents of the presented
    /// algebra: a(alpha*v) with undecorated modes, the scale contributing
    /// alpha^(-p+epsilon-1). The twist stored on the expression is used as
    /// the derivative power (epsilon for the presented algebra).
    pub fn expand_plain(
        &self,
        ctx: &Arc<FieldCtx>,
        range: (i64, i64),
    ) -> LaurentWindow<FormalModes> {
        let eps = self.twist;
        let id = GroupElem {
            torsion: 0,
            free: vec![0; ctx.num_params as usize],
        };
        let mut out = LaurentWindow::empty(vec!["w".into()], vec![range]);
        for e in range.0..=range.1 {
            let mut cell: FormalModes = BTreeMap::new();
            for ((a, alpha, n), mu) in &self.terms {
                let p = -e + (*n as i64 + 1) * (eps - 1);
                let f = current_deriv_factor(ctx, p, *n, eps);
                let scale = embed_power(ctx, alpha, -p + eps - 1);
                let c = mu.mul(&f).mul(&scale);
                if c.is_zero() {
                    continue;
                }
                let key = (a.clone(), id.clone(), p);
                let entry = cell.remove(&key).unwrap_or_else(|| Scalar::zero(ctx));
                let s = entry.add(&c);
                if !s.is_zero() {
                    cell.insert(key, s);
                }
            }
            out.insert_add(vec![e], cell);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Delta functions.
// ---------------------------------------------------------------------------

/// Which variable carries the divided derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaVar {
    W,
    Z,
}

/// Canonical term coeff(w) * D^(i)_{w,zeta}(z, lambda*w).
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTerm {
    pub coeff: CurrentExpr,
    pub order: u32,
    pub scale: GroupElem,
    pub twist: i64,
}

/// A not-yet-canonical delta factor coeff * D^(i)_{var,zeta}(alpha z, beta w).
#[derive(Clone, Debug)]
pub struct RawDelta {
    pub coeff: CurrentExpr,
    pub order: u32,
    pub var: DeltaVar,
    pub alpha: GroupElem,
    pub beta: GroupElem,
    pub twist: i64,
}

/// Exact coefficients of D^(i)_{w,zeta}(alpha z, beta w) on a (z, w) window.
///
/// Base case: (alpha z)^(zeta-1) delta(beta w / alpha z) has coefficient
/// beta^n alpha^(-n+zeta-1) at w^n z^(-n+zeta-1); each application of
/// (w^zeta d/dw)/1 maps w^n to n * w^(n+zeta-1).
pub fn delta_expand_w(
    ctx: &Arc<FieldCtx>,
    i: u32,
    zeta: i64,
    alpha: &GroupElem,
    beta: &GroupElem,
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<Scalar> {
    let mut out = LaurentWindow::empty(
        vec!["z".into(), "w".into()],
        vec![z_range, w_range],
    );
    for ze in z_range.0..=z_range.1 {
        let n = -ze + zeta - 1;
        let we = n + i as i64 * (zeta - 1);
        if we < w_range.0 || we > w_range.1 {
            continue;
        }
        let c = divided_product(ctx, n, i, zeta)
            .mul(&embed_power(ctx, beta, n))
            .mul(&embed_power(ctx, alpha, -n + zeta - 1));
        out.insert_add(vec![ze, we], c);
    }
    out
}

/// Exact coefficients of D^(i)_{z,zeta}(alpha z, beta w): the derivative taken
/// in z instead.
pub fn delta_expand_z(
    ctx: &Arc<FieldCtx>,
    i: u32,
    zeta: i64,
    alpha: &GroupElem,
    beta: &GroupElem,
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<Scalar> {
    let mut out = LaurentWindow::empty(
        vec!["z".into(), "w".into()],
        vec![z_range, w_range],
    );
    for we in w_range.0..=w_range.1 {
        let n = we;
        let m = -n + zeta - 1;
        let ze = m + i as i64 * (zeta - 1);
        if ze < z_range.0 || ze > z_range.1 {
            continue;
        }
        let c = divided_product(ctx, m, i, zeta)
            .mul(&embed_power(ctx, beta, n))
            .mul(&embed_power(ctx, alpha, m));
        out.insert_add(vec![ze, we], c);
    }
    out
}

/// Exact coefficients of D^(i)_{w,zeta}(beta w, alpha z): the swapped-argument
/// form appearing on the left of the first delta identity.
pub fn delta_expand_swapped(
    ctx: &Arc<FieldCtx>,
    i: u32,
    zeta: i64,
    alpha: &GroupElem,
    beta: &GroupElem,
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<Scalar> {
    // (beta w)^(zeta-1) delta(alpha z / beta w) = sum_n (alpha z)^n (beta w)^(-n+zeta-1)
    let mut out = LaurentWindow::empty(
        vec!["z".into(), "w".into()],
        vec![z_range, w_range],
    );
    for ze in z_range.0..=z_range.1 {
        let n = ze;
        let r = -n + zeta - 1;
        let we = r + i as i64 * (zeta - 1);
        if we < w_range.0 || we > w_range.1 {
            continue;
        }
        let c = divided_product(ctx, r, i, zeta)
            .mul(&embed_power(ctx, alpha, n))
            .mul(&embed_power(ctx, beta, r));
        out.insert_add(vec![ze, we], c);
    }
    out
}

/// Canonical expansion D^(i)_{w,zeta}(z, lambda w) on a window.
pub fn delta_expand(
    ctx: &Arc<FieldCtx>,
    i: u32,
    zeta: i64,
    lambda: &GroupElem,
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<Scalar> {
    let id = GroupElem {
        torsion: 0,
        free: vec![0; ctx.num_params as usize],
    };
    delta_expand_w(ctx, i, zeta, &id, lambda, z_range, w_range)
}

/// Rewrite a raw delta factor into the canonical w-derivative, scale-on-w
/// form, using the two delta identities:
///   D^(i)_{w,z}(a z, b w) = a^(z-1) D^(i)_{w,z}(z, a^-1 b w)
///   D^(i)_{w,z}(a z, b w) = (-1)^i (a b^-1)^(i(z-1)) D^(i)_{z,z}(a z, b w)
pub fn delta_normalize(ctx: &Arc<FieldCtx>, raw: &RawDelta) -> DeltaTerm {
    let mut coeff = raw.coeff.clone();
    if raw.var == DeltaVar::Z {
        // D_z = (-1)^i (alpha beta^-1)^(-i(zeta-1)) D_w  with the same arguments.
        let ab = raw.alpha.mul(&raw.beta.inv(ctx), ctx);
        let mut f = embed_power(ctx, &ab, -(raw.order as i64) * (raw.twist - 1));
        if raw.order % 2 == 1 {
            f = f.neg();
        }
        coeff = coeff.scale(&f);
    }
    let f = embed_power(ctx, &raw.alpha, raw.twist - 1);
    coeff = coeff.scale(&f);
    DeltaTerm {
        coeff,
        order: raw.order,
        scale: raw.alpha.inv(ctx).mul(&raw.beta, ctx),
        twist: raw.twist,
    }
}

/// Merge coefficients of identical (order, scale); by the canonicality of the
/// delta basis this is the unique decomposition, and equality of expansions
/// is equality of these maps.
pub fn collect_delta_coefficients(
    terms: &[DeltaTerm],
) -> Result<BTreeMap<(u32, GroupElem), CurrentExpr>, QvlaError> {
    let mut out: BTreeMap<(u32, GroupElem), CurrentExpr> = BTreeMap::new();
    let mut twist: Option<i64> = None;
    for t in terms {
        match twist {
            None => twist = Some(t.twist),
            Some(z) => {
                if z != t.twist {
                    return Err(QvlaError::Contract(
                        "collect_delta_coefficients requires a single twist".into(),
                    ));
                }
            }
        }
        let key = (t.order, t.scale.clone());
        match out.remove(&key) {
            Some(e) => {
                let s = e.add(&t.coeff)?;
                if !s.is_zero() {
                    out.insert(key, s);
                }
            }
            None => {
                if !t.coeff.is_zero() {
                    out.insert(key, t.coeff.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Expand a list of canonical delta terms (with decorated-mode coefficient
/// semantics) on a two-variable window.
pub fn expand_delta_terms_decorated(
    ctx: &Arc<FieldCtx>,
    terms: &[DeltaTerm],
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<FormalModes> {
    expand_delta_terms_with(ctx, terms, z_range, w_range, true)
}

/// Same, reading the coefficients as currents of the presented algebra.
pub fn expand_delta_terms_plain(
    ctx: &Arc<FieldCtx>,
    terms: &[DeltaTerm],
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> LaurentWindow<FormalModes> {
    expand_delta_terms_with(ctx, terms, z_range, w_range, false)
}

fn expand_delta_terms_with(
    ctx: &Arc<FieldCtx>,
    terms: &[DeltaTerm],
    z_range: (i64, i64),
    w_range: (i64, i64),
    decorated: bool,
) -> LaurentWindow<FormalModes> {
    let mut out = LaurentWindow::empty(
        vec!["z".into(), "w".into()],
        vec![z_range, w_range],
    );
    for t in terms {
        // The delta factor has exactly one w-cell per z-exponent, so the
        // convolution with the coefficient window is a direct sum.
        let zeta = t.twist;
        // Coefficient window range needed: target w minus delta w-exponents.
        let mut needed_lo = i64::MAX;
        let mut needed_hi = i64::MIN;
        for ze in z_range.0..=z_range.1 {
            let n = -ze + zeta - 1;
            let dwe = n + t.order as i64 * (zeta - 1);
            needed_lo = needed_lo.min(w_range.0 - dwe);
            needed_hi = needed_hi.max(w_range.1 - dwe);
        }
        if needed_lo > needed_hi {
            continue;
        }
        let cw = if decorated {
            t.coeff.expand_decorated(ctx, (needed_lo, needed_hi))
        } else {
            t.coeff.expand_plain(ctx, (needed_lo, needed_hi))
        };
        for ze in z_range.0..=z_range.1 {
            let n = -ze + zeta - 1;
            let dwe = n + t.order as i64 * (zeta - 1);
            let dcoeff = divided_product(ctx, n, t.order, zeta)
                .mul(&embed_power(ctx, &t.scale, n));
            if dcoeff.is_zero() {
                continue;
            }
            for we in w_range.0..=w_range.1 {
                if let Some(cell) = cw.get(&[we - dwe]) {
                    out.insert_add(vec![ze, we], cell.cscale(&dcoeff));
                }
            }
        }
    }
    out
}

/// Apply (w^zeta d/dw) `times` times on a single-variable scalar window; the
/// output range shifts by zeta-1 per application.
pub fn apply_zeta_derivative_window<V: Coeff>(
    ctx: &Arc<FieldCtx>,
    win: &LaurentWindow<V>,
    zeta: i64,
    times: u32,
) -> LaurentWindow<V> {
    assert_eq!(win.ranges.len(), 1, "single-variable window expected");
    let mut cur = win.clone();
    for _ in 0..times {
        let (lo, hi) = cur.ranges[0];
        let mut next = LaurentWindow::empty(cur.vars.clone(), vec![(lo + zeta - 1, hi + zeta - 1)]);
        for (k, v) in &cur.cells {
            let n = k[0];
            let c = Scalar::from_i64(ctx, n);
            next.insert_add(vec![n + zeta - 1], v.cscale(&c));
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::FieldSpec;

    fn id(ctx: &Arc<FieldCtx>) -> GroupElem {
        GroupElem::identity(ctx)
    }

    #[test]
    fn base_delta_expansion() {
        // i=0, zeta=0, lambda=1: coefficient of w^n z^(-n-1) is 1.
        let ctx = FieldSpec::new(1, 0).unwrap();
        let w = delta_expand(&ctx, 0, 0, &id(&ctx), (-4, 4), (-4, 4));
        for ze in -4..=4i64 {
            let n = -ze - 1;
            if n < -4 || n > 4 {
                continue;
            }
            assert_eq!(w.get(&[ze, n]), Some(&Scalar::one(&ctx)));
        }
    }

    #[test]
    fn first_derivative_expansion() {
        // i=1, zeta=0: coefficient of w^(n-1) z^(-n-1) is n.
        let ctx = FieldSpec::new(1, 0).unwrap();
        let w = delta_expand(&ctx, 1, 0, &id(&ctx), (-4, 4), (-6, 6));
        for ze in -4..=4i64 {
            let n = -ze - 1;
            assert_eq!(w.get(&[ze, n - 1]), Some(&Scalar::from_i64(&ctx, n)).filter(|_| n != 0));
        }
    }

    #[test]
    fn scaled_twist_one_expansion() {
        // i=0, zeta=1, lambda=q1: coefficient of w^n z^(-n) is q1^n.
        let ctx = FieldSpec::new(1, 1).unwrap();
        let q = GroupElem::param(&ctx, 0);
        let w = delta_expand(&ctx, 0, 1, &q, (-3, 3), (-3, 3));
        for ze in -3..=3i64 {
            let n = -ze;
            let expect = Scalar::param_pow(&ctx, 0, n);
            assert_eq!(w.get(&[ze, n]), Some(&expect));
        }
    }

    #[test]
    fn zeta_derivative_on_window() {
        let ctx = FieldSpec::new(1, 0).unwrap();
        // {w^2 -> c}: d/dw gives {w^1 -> 2c}
        let mut win = LaurentWindow::empty(vec!["w".into()], vec![(-3, 3)]);
        win.insert_add(vec![2], Scalar::from_i64(&ctx, 5));
        let d = apply_zeta_derivative_window(&ctx, &win, 0, 1);
        assert_eq!(d.get(&[1]), Some(&Scalar::from_i64(&ctx, 10)));
        // zeta=2 on {w^-1 -> c}: w^2 d/dw w^-1 = -1
        let mut win2 = LaurentWindow::empty(vec!["w".into()], vec![(-3, 3)]);
        win2.insert_add(vec![-1], Scalar::from_i64(&ctx, 1));
        let d2 = apply_zeta_derivative_window(&ctx, &win2, 2, 1);
        assert_eq!(d2.get(&[0]), Some(&Scalar::from_i64(&ctx, -1)));
    }

    #[test]
    fn normalize_matches_window_expansion() {
        // The two rewriting identities checked as window equalities.
        for t in [1u32, 2, 4] {
            let ctx = FieldSpec::new(t, 1).unwrap();
            let mut gens = vec![GroupElem::param(&ctx, 0)];
            if t > 1 {
                gens.push(GroupElem::zeta(&ctx));
            }
            for i in 0..=3u32 {
                for zeta in [-1i64, 0, 1, 2] {
                    for alpha in &gens {
                        for beta in &gens {
                            let raw_w = delta_expand_w(&ctx, i, zeta, alpha, beta, (-5, 5), (-9, 9));
                            // alpha^(zeta-1) D_{w}(z, alpha^-1 beta w)
                            let lam = alpha.inv(&ctx).mul(beta, &ctx);
                            let canon = delta_expand(&ctx, i, zeta, &lam, (-5, 5), (-9, 9))
                                .scale(&embed_power(&ctx, alpha, zeta - 1));
                            assert!(
                                raw_w.first_difference(&canon).is_none(),
                                "identity delta0 failed at i={} zeta={}",
                                i,
                                zeta
                            );
                            // swapped-argument form equals the w-form
                            let sw = delta_expand_swapped(&ctx, i, zeta, alpha, beta, (-5, 5), (-9, 9));
                            assert!(
                                sw.first_difference(&raw_w).is_none(),
                                "swap identity failed at i={} zeta={}",
                                i,
                                zeta
                            );
                            // z-derivative form: D_w = (-1)^i (alpha beta^-1)^(i(zeta-1)) D_z
                            let ab = alpha.mul(&beta.inv(&ctx), &ctx);
                            let mut f = embed_power(&ctx, &ab, i as i64 * (zeta - 1));
                            if i % 2 == 1 {
                                f = f.neg();
                            }
                            let rawz =
                                delta_expand_z(&ctx, i, zeta, alpha, beta, (-5, 5), (-9, 9)).scale(&f);
                            assert!(
                                rawz.first_difference(&raw_w).is_none(),
                                "identity delta1 failed at i={} zeta={}",
                                i,
                                zeta
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn collect_cancellation() {
        let ctx = FieldSpec::new(1, 1).unwrap();
        let a = GeneratorIndex::simple("a");
        let c = Scalar::param_pow(&ctx, 0, 2);
        let ce = CurrentExpr::term(0, c.clone(), 0, id(&ctx), a.clone());
        let t1 = DeltaTerm {
            coeff: ce.clone(),
            order: 0,
            scale: id(&ctx),
            twist: 0,
        };
        let t2 = DeltaTerm {
            coeff: ce.scale(&Scalar::from_i64(&ctx, -1)),
            order: 0,
            scale: id(&ctx),
            twist: 0,
        };
        let m = collect_delta_coefficients(&[t1.clone(), t2]).unwrap();
        assert!(m.is_empty());
        // distinct scales stay separate
        let t3 = DeltaTerm {
            scale: GroupElem::param(&ctx, 0),
            ..t1.clone()
        };
        let m2 = collect_delta_coefficients(&[t1, t3]).unwrap();
        assert_eq!(m2.len(), 2);
    }
}
