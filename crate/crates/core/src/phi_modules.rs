//! The phi_eps substitution calculus and verification that a restricted
//! module of the presented algebra is an equivariant coordinated quasi module
//! of the enveloping vertex algebra.
//!
//! phi_eps(z, z0) = e^{z0 z^eps d/dz} z = sum_k c_k z0^k z^{1+k(eps-1)}.
//! Substituting z1 = phi_eps(z2, z0) maps z1^p to
//! z2^p (1+u)^p with u = sum_{k>=1} c_k z0^k z2^{k(eps-1)}, so every series
//! in z0 produced here has the invariant that its z0^s coefficient carries a
//! fixed z2-shift of s(eps-1); such series are stored as plain coefficient
//! vectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::currents::{divided_product, gen_binomial, GeneratorIndex, LaurentWindow};
use crate::enveloping::{Enveloper, Monomial, PbwVector};
use crate::error::QvlaError;
use crate::qvla::{Mode, Qvla};
use crate::report::Report;
use crate::scalars::{embed, embed_power, FieldCtx, GroupElem, Scalar};

// ---------------------------------------------------------------------------
// phi series.
// ---------------------------------------------------------------------------

/// Coefficients c_0..c_order with phi_eps(z, z0) = sum c_k z0^k z^{1+k(eps-1)};
/// c_k = (1/k!) prod_{t=0}^{k-1} (1 + t(eps-1)).
pub fn phi_series(ctx: &Arc<FieldCtx>, eps: i64, order: u32) -> Vec<Scalar> {
    (0..=order)
        .map(|k| divided_product(ctx, 1, k, eps))
        .collect()
}

/// The flow property phi(phi(z,w1),w2) = phi(z,w1+w2), checked exactly up to
/// total order `order` in (w1, w2).
pub fn check_phi_flow(ctx: &Arc<FieldCtx>, eps: i64, order: u32) -> bool {
    // Series in (w1, w2) with z-Laurent exponents: key (zexp, e1, e2).
    type Series = BTreeMap<(i64, u32, u32), Scalar>;
    let add = |s: &mut Series, k: (i64, u32, u32), c: Scalar| {
        if c.is_zero() {
            return;
        }
        match s.get_mut(&k) {
            Some(e) => {
                let x = e.add(&c);
                if x.is_zero() {
                    s.remove(&k);
                } else {
                    *e = x;
                }
            }
            None => {
                s.insert(k, c);
            }
        }
    };
    let c = phi_series(ctx, eps, order);
    // lhs: substitute Z = phi(z,w1) into phi(Z,w2) = sum_k c_k w2^k Z^{1+k(eps-1)}.
    // Z = z(1+u), u = sum_{t>=1} c_t w1^t z^{t(eps-1)}.
    // Z^p = z^p sum_j binom(p,j) u^j.
    let mut upow: Vec<Series> = Vec::new(); // u^j
    let mut u0: Series = BTreeMap::new();
    add(&mut u0, (0, 0, 0), Scalar::one(ctx));
    upow.push(u0);
    let mut u1: Series = BTreeMap::new();
    for t in 1..=order {
        add(
            &mut u1,
            (t as i64 * (eps - 1), t, 0),
            c[t as usize].clone(),
        );
    }
    for j in 1..=order {
        let prev = &upow[(j - 1) as usize];
        let mut next: Series = BTreeMap::new();
        for (k1, c1) in prev {
            for (k2, c2) in &u1 {
                if k1.1 + k2.1 > order {
                    continue;
                }
                add(
                    &mut next,
                    (k1.0 + k2.0, k1.1 + k2.1, 0),
                    c1.mul(c2),
                );
            }
        }
        upow.push(next);
    }
    let mut lhs: Series = BTreeMap::new();
    for k in 0..=order {
        let p = 1 + k as i64 * (eps - 1);
        for j in 0..=order - k {
            let b = gen_binomial(ctx, p, j);
            for (key, cv) in &upow[j as usize] {
                if key.1 + k > order {
                    continue;
                }
                add(
                    &mut lhs,
                    (p + key.0, key.1, k),
                    c[k as usize].mul(&b).mul(cv),
                );
            }
        }
    }
    // rhs: phi(z, w1+w2) = sum_k c_k (w1+w2)^k z^{1+k(eps-1)}.
    let mut rhs: Series = BTreeMap::new();
    for k in 0..=order {
        for j in 0..=k {
            let b = gen_binomial(ctx, k as i64, j);
            add(
                &mut rhs,
                (1 + k as i64 * (eps - 1), j, k - j),
                c[k as usize].mul(&b),
            );
        }
    }
    lhs == rhs
}

// ---------------------------------------------------------------------------
// Restricted modules.
// ---------------------------------------------------------------------------

/// Basis vector of a module carrier: a normal-ordered creation word over the
/// highest weight vector, stored sorted.
pub type ModKey = Vec<(GeneratorIndex, i64)>;
/// Finite combination of carrier basis vectors.
pub type ModVec = BTreeMap<ModKey, Scalar>;

pub fn mod_add(v: &mut ModVec, k: ModKey, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match v.get_mut(&k) {
        Some(e) => {
            let s = e.add(&c);
            if s.is_zero() {
                v.remove(&k);
            } else {
                *e = s;
            }
        }
        None => {
            v.insert(k, c);
        }
    }
}

pub fn mod_scale(v: &ModVec, s: &Scalar) -> ModVec {
    if s.is_zero() {
        return ModVec::new();
    }
    v.iter().map(|(k, c)| (k.clone(), c.mul(s))).collect()
}

pub fn mod_degree(v: &ModVec) -> i64 {
    v.keys()
        .map(|k| k.iter().map(|(_, m)| -m).sum::<i64>())
        .max()
        .unwrap_or(0)
}

pub fn render_modvec(v: &ModVec) -> String {
    if v.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = v
        .iter()
        .map(|(k, c)| {
            let word: Vec<String> = k.iter().map(|(g, m)| format!("{}({})", g, m)).collect();
            format!(
                "({})*{}|hw>",
                crate::scalars::render_scalar(c),
                word.join("")
            )
        })
        .collect();
    parts.join(" + ")
}

impl crate::currents::Coeff for ModVec {
    fn czero() -> Self {
        ModVec::new()
    }
    fn cadd(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other {
            mod_add(&mut out, k.clone(), c.clone());
        }
        out
    }
    fn cscale(&self, s: &Scalar) -> Self {
        mod_scale(self, s)
    }
    fn cis_zero(&self) -> bool {
        self.is_empty()
    }
}

/// A restricted module of the presented algebra, given by the exact action of
/// the abstract modes on an enumerable carrier basis.
pub struct RestrictedModule {
    pub name: String,
    pub qvla: Arc<Qvla>,
    pub action: Arc<dyn Fn(&GeneratorIndex, i64, &ModKey) -> ModVec + Send + Sync>,
    /// Deterministic sample carrier vectors for the checks, lowest degree
    /// first, starting with the highest weight vector.
    pub samples: Vec<ModVec>,
    /// Max i+j over the structure entries; bounds how far an action index can
    /// exceed a vector's degree before annihilating it.
    pub slack: i64,
}

impl RestrictedModule {
    pub fn apply(&self, a: &GeneratorIndex, m: i64, v: &ModVec) -> ModVec {
        let mut out = ModVec::new();
        for (k, c) in v {
            for (k2, c2) in (self.action)(a, m, k) {
                mod_add(&mut out, k2, c2.mul(c));
            }
        }
        out
    }

    /// a(m) v = 0 once m exceeds this bound.
    pub fn restriction_bound(&self, v: &ModVec) -> i64 {
        mod_degree(v) * (1 + self.slack) + 1
    }

    /// Window of Y_W(a^{alpha,0}, z) v = a(alpha z) v: the coefficient of
    /// z^{-m+eps-1} is alpha^{-m+eps-1} a(m) v.
    pub fn field_apply(
        &self,
        a: &GeneratorIndex,
        alpha: &GroupElem,
        v: &ModVec,
        z_range: (i64, i64),
    ) -> LaurentWindow<ModVec> {
        let ctx = &self.qvla.ctx;
        let eps = self.qvla.epsilon;
        let mut out = LaurentWindow::empty(vec!["z".into()], vec![z_range]);
        for e in z_range.0..=z_range.1 {
            let m = -e + eps - 1;
            let w = self.apply(a, m, v);
            if w.is_empty() {
                continue;
            }
            out.insert_add(vec![e], mod_scale(&w, &embed_power(ctx, alpha, -m + eps - 1)));
        }
        out
    }
}

/// The action respects the derived bracket of the presented algebra on the
/// samples, and the restriction bound annihilates beyond its claim.
pub fn check_module_consistency(
    module: &RestrictedModule,
    w_param: i64,
    w_mode: i64,
) -> Result<Report, QvlaError> {
    let qvla = &module.qvla;
    let mut report = Report::new(
        "module-consistency",
        &format!("params<={} modes<={}", w_param, w_mode),
    );
    let gens = qvla.noncentral_generators(w_param);
    for a in &gens {
        for b in &gens {
            for m in -w_mode..=w_mode {
                for n in -w_mode..=w_mode {
                    for (xi, x) in module.samples.iter().enumerate() {
                        let lhs = {
                            let bn = module.apply(b, n, x);
                            let am = module.apply(a, m, &bn);
                            let an = module.apply(a, m, x);
                            let bm = module.apply(b, n, &an);
                            let mut out = am;
                            for (k, c) in bm {
                                mod_add(&mut out, k, c.neg());
                            }
                            out
                        };
                        let rhs = {
                            let br = crate::qvla::brackets::abstract_bracket(qvla, a, m, b, n)?;
                            let mut out = ModVec::new();
                            for ((g, p), c) in br {
                                let gv = module.apply(&g, p, x);
                                for (k, c2) in gv {
                                    mod_add(&mut out, k, c2.mul(&c));
                                }
                            }
                            out
                        };
                        if lhs.is_empty() && rhs.is_empty() {
                            report.record_trivial();
                        } else {
                            let pass = lhs == rhs;
                            report.record(
                                format!("[{}({}),{}({})] x#{}", a, m, b, n, xi),
                                pass,
                                if pass {
                                    None
                                } else {
                                    Some(format!(
                                        "{} vs {}",
                                        render_modvec(&lhs),
                                        render_modvec(&rhs)
                                    ))
                                },
                            );
                        }
                    }
                }
            }
        }
    }
    // Restriction bound.
    for (xi, x) in module.samples.iter().enumerate() {
        let b = module.restriction_bound(x);
        for a in &gens {
            for m in b..b + 2 {
                let r = module.apply(a, m, x);
                if r.is_empty() {
                    report.record_trivial();
                } else {
                    report.record(
                        format!("restriction {}({}) x#{}", a, m, xi),
                        false,
                        Some(render_modvec(&r)),
                    );
                }
            }
        }
    }
    report.record("action consistency".into(), true, None);
    Ok(report)
}

/// Equivariance: Y_W(R_lam a^{alpha,0}, z) = Y_W(a^{alpha,0}, lam^-1 z),
/// coefficientwise on the window, applied to the samples.
pub fn check_equivariance(
    module: &RestrictedModule,
    lambdas: &[GroupElem],
    w_param: i64,
    z_range: (i64, i64),
) -> Result<Report, QvlaError> {
    let qvla = &module.qvla;
    let ctx = &qvla.ctx;
    let mut report = Report::new(
        "equivariance",
        &format!("z in [{},{}]", z_range.0, z_range.1),
    );
    let gens = qvla.noncentral_generators(w_param);
    let scales = qvla.group_window(1);
    for lam in lambdas {
        for a in &gens {
            for alpha in &scales {
                for (xi, x) in module.samples.iter().enumerate() {
                    // R_lam(a^{alpha,0}) = a^{alpha lam^-1,0}
                    let lhs = module.field_apply(a, &alpha.mul(&lam.inv(ctx), ctx), x, z_range);
                    // a(alpha lam^-1 z): substitute z -> lam^-1 z in the window:
                    // coefficient at e picks up lam^-e.
                    let base = module.field_apply(a, alpha, x, z_range);
                    let mut rhs = LaurentWindow::empty(vec!["z".into()], vec![z_range]);
                    for (k, v) in &base.cells {
                        rhs.insert_add(
                            k.clone(),
                            mod_scale(v, &embed_power(ctx, &lam.inv(ctx), k[0])),
                        );
                    }
                    match lhs.first_difference(&rhs) {
                        None => report.record_trivial(),
                        Some(cell) => report.record(
                            format!(
                                "R({}) {}^({}) x#{}",
                                crate::qvla::render_group(lam),
                                a,
                                crate::qvla::render_group(alpha),
                                xi
                            ),
                            false,
                            Some(format!("differs at z^{}", cell[0])),
                        ),
                    }
                }
            }
        }
    }
    report.record("equivariance".into(), true, None);
    Ok(report)
}

/// The commutator identity of coordinated quasi modules:
/// [Y_W(u,z), Y_W(v,w)] = sum_{lam,i} lam^{1-eps}
///     Y_W((R_{lam^-1}u)_i v, w) D^(i)_{w,eps}(z, lam w),
/// verified coefficientwise in two variables on the window.
pub fn check_equi_commutator(
    module: &RestrictedModule,
    env: &Enveloper,
    w_param: i64,
    z_range: (i64, i64),
    w_range: (i64, i64),
) -> Result<Report, QvlaError> {
    let qvla = &module.qvla;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut report = Report::new(
        "equi-commutator",
        &format!(
            "z in [{},{}], w in [{},{}]",
            z_range.0, z_range.1, w_range.0, w_range.1
        ),
    );
    let gens = qvla.noncentral_generators(w_param);
    let scales = qvla.group_window(1);
    let mut pairs: Vec<(GeneratorIndex, GroupElem, GeneratorIndex, GroupElem)> = Vec::new();
    for a in &gens {
        for b in &gens {
            for al in &scales {
                for be in &scales {
                    pairs.push((a.clone(), al.clone(), b.clone(), be.clone()));
                }
            }
        }
    }
    for (a, alpha, b, beta) in pairs {
        // lambda support from the structure entries.
        let mut lambdas: Vec<GroupElem> = qvla
            .entries(&a, &b)
            .iter()
            .map(|e| e.alpha.mul(&beta, ctx).mul(&alpha.inv(ctx), ctx))
            .collect();
        lambdas.sort();
        lambdas.dedup();
        for (xi, x) in module.samples.iter().enumerate() {
            // LHS cells: [op(m), op(n)] x with scale weights.
            let mut lhs = LaurentWindow::<ModVec>::empty(
                vec!["z".into(), "w".into()],
                vec![z_range, w_range],
            );
            for e1 in z_range.0..=z_range.1 {
                let m = -e1 + eps - 1;
                for e2 in w_range.0..=w_range.1 {
                    let n = -e2 + eps - 1;
                    let bn = module.apply(&b, n, x);
                    let anm = module.apply(&a, m, &bn);
                    let am = module.apply(&a, m, x);
                    let bnm = module.apply(&b, n, &am);
                    let mut cell = anm;
                    for (k, c) in bnm {
                        mod_add(&mut cell, k, c.neg());
                    }
                    if cell.is_empty() {
                        continue;
                    }
                    let wgt = embed_power(ctx, &alpha, -m + eps - 1)
                        .mul(&embed_power(ctx, &beta, -n + eps - 1));
                    lhs.insert_add(vec![e1, e2], mod_scale(&cell, &wgt));
                }
            }
            // RHS: products in the enveloping algebra, one delta per lambda/i.
            let mut rhs = LaurentWindow::<ModVec>::empty(
                vec!["z".into(), "w".into()],
                vec![z_range, w_range],
            );
            let u = env.generator_vector(&a, &alpha)?;
            let v = env.generator_vector(&b, &beta)?;
            for lam in &lambdas {
                let ru = env.r_action(&lam.inv(ctx), &u)?;
                let ibound = env.annihilation_bound(2);
                for i in 0..=ibound.max(0) {
                    let prod = env.vertex_coefficient(&ru, i, &v)?;
                    if prod.is_zero() {
                        continue;
                    }
                    // Y_W(prod, w) x as a w-window; prod has PBW length <= 1.
                    let needed = needed_w_cells(ctx, z_range, w_range, i as u32, eps);
                    let pw = module_field_len1(module, &prod, x, needed)?;
                    // Multiply by lam^{1-eps} D^(i)(z, lam w).
                    let pref = embed_power(ctx, lam, 1 - eps);
                    for e1 in z_range.0..=z_range.1 {
                        let n0 = -e1 + eps - 1;
                        let dwe = n0 + i * (eps - 1);
                        let dcoeff = divided_product(ctx, n0, i as u32, eps)
                            .mul(&embed_power(ctx, lam, n0))
                            .mul(&pref);
                        if dcoeff.is_zero() {
                            continue;
                        }
                        for e2 in w_range.0..=w_range.1 {
                            if let Some(cell) = pw.get(&[e2 - dwe]) {
                                rhs.insert_add(vec![e1, e2], mod_scale(cell, &dcoeff));
                            }
                        }
                    }
                }
            }
            match lhs.first_difference(&rhs) {
                None => report.record_trivial(),
                Some(cell) => report.record(
                    format!(
                        "[{}^{},{}^{}] x#{}",
                        a,
                        crate::qvla::render_group(&alpha),
                        b,
                        crate::qvla::render_group(&beta),
                        xi
                    ),
                    false,
                    Some(format!("differs at (z^{}, w^{})", cell[0], cell[1])),
                ),
            }
        }
    }
    report.record("equi-commutator".into(), true, None);
    Ok(report)
}

fn needed_w_cells(
    _ctx: &Arc<FieldCtx>,
    z_range: (i64, i64),
    w_range: (i64, i64),
    i: u32,
    eps: i64,
) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for e1 in z_range.0..=z_range.1 {
        let n0 = -e1 + eps - 1;
        let dwe = n0 + i as i64 * (eps - 1);
        lo = lo.min(w_range.0 - dwe);
        hi = hi.max(w_range.1 - dwe);
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// The substitution z1 = phi_eps(z2, z0) and coordinated associativity.
// ---------------------------------------------------------------------------

/// A z0-power series whose z0^s coefficient carries the implied z2-shift
/// s(eps-1); only the scalar parts are stored.
#[derive(Clone, Debug)]
struct ShiftSeries(Vec<Scalar>);

impl ShiftSeries {
    fn truncated(&self, order: usize) -> ShiftSeries {
        let mut v = self.0.clone();
        v.truncate(order + 1);
        ShiftSeries(v)
    }

    fn mul(&self, other: &ShiftSeries, ctx: &Arc<FieldCtx>, order: usize) -> ShiftSeries {
        let mut out = vec![Scalar::zero(ctx); order + 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if i + j > order {
                    break;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        ShiftSeries(out)
    }

    /// First index with a nonzero coefficient.
    fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    /// Inverse of a unit series (nonzero constant term).
    fn inverse_unit(&self, ctx: &Arc<FieldCtx>, order: usize) -> ShiftSeries {
        let b0 = self.0[0].inv().expect("unit series");
        let mut out = vec![Scalar::zero(ctx); order + 1];
        out[0] = b0.clone();
        for s in 1..=order {
            let mut acc = Scalar::zero(ctx);
            for t in 1..=s {
                let bt = self.0.get(t).cloned().unwrap_or_else(|| Scalar::zero(ctx));
                acc = acc.add(&bt.mul(&out[s - t]));
            }
            out[s] = acc.mul(&b0).neg();
        }
        ShiftSeries(out)
    }
}

/// u = phi_eps(z2,z0)/z2 - 1 as a shift series: u_s = c_s for s >= 1.
fn u_shift_series(ctx: &Arc<FieldCtx>, eps: i64, order: usize) -> ShiftSeries {
    let c = phi_series(ctx, eps, order as u32);
    let mut v = vec![Scalar::zero(ctx)];
    v.extend(c.into_iter().skip(1));
    v.truncate(order + 1);
    while v.len() < order + 1 {
        v.push(Scalar::zero(ctx));
    }
    ShiftSeries(v)
}

/// (1+u)^p for an arbitrary integer p, truncated.
fn binpow_series(
    ctx: &Arc<FieldCtx>,
    u: &ShiftSeries,
    p: i64,
    order: usize,
) -> ShiftSeries {
    let mut out = vec![Scalar::zero(ctx); order + 1];
    out[0] = Scalar::one(ctx);
    let mut upow = ShiftSeries({
        let mut v = vec![Scalar::zero(ctx); order + 1];
        v[0] = Scalar::one(ctx);
        v
    });
    for j in 1..=order {
        upow = upow.mul(u, ctx, order);
        let b = gen_binomial(ctx, p, j as u32);
        if b.is_zero() {
            continue;
        }
        for s in 0..=order {
            let t = upow.0[s].mul(&b);
            out[s] = out[s].add(&t);
        }
    }
    ShiftSeries(out)
}

/// q(phi/z2) = q(1+u) where q(x) = sum_t q_t x^t.
fn q_of_phi(
    ctx: &Arc<FieldCtx>,
    u: &ShiftSeries,
    qcoeffs: &[Scalar],
    order: usize,
) -> ShiftSeries {
    let mut out = vec![Scalar::zero(ctx); order + 1];
    for (t, qt) in qcoeffs.iter().enumerate() {
        if qt.is_zero() {
            continue;
        }
        let pw = binpow_series(ctx, u, t as i64, order);
        for s in 0..=order {
            out[s] = out[s].add(&pw.0[s].mul(qt));
        }
    }
    ShiftSeries(out)
}

/// q(x) = prod (x - root) expanded to coefficients (index = power of x).
pub fn q_poly_coeffs(ctx: &Arc<FieldCtx>, roots: &[GroupElem]) -> Vec<Scalar> {
    let mut coeffs = vec![Scalar::one(ctx)];
    for r in roots {
        let rv = embed(ctx, r);
        let mut next = vec![Scalar::zero(ctx); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(&rv));
        }
        coeffs = next;
    }
    coeffs
}

/// A z0-graded family of one-variable windows over z2, orders 0..=max.
struct Z0Windows {
    wins: Vec<LaurentWindow<ModVec>>,
}

impl Z0Windows {
    fn empty(order: usize, cells: (i64, i64)) -> Self {
        Z0Windows {
            wins: (0..=order)
                .map(|_| LaurentWindow::empty(vec!["z2".into()], vec![cells]))
                .collect(),
        }
    }

    /// Multiply by a shift series: (S*R)[k][c] = sum_t S_t R[k-t][c - t(eps-1)].
    fn mul_series(
        &self,
        s: &ShiftSeries,
        eps: i64,
        order: usize,
        cells: (i64, i64),
    ) -> Z0Windows {
        let mut out = Z0Windows::empty(order, cells);
        for (k, win) in out.wins.iter_mut().enumerate() {
            for (t, st) in s.0.iter().enumerate() {
                if t > k || st.is_zero() {
                    continue;
                }
                if let Some(src) = self.wins.get(k - t) {
                    for (key, v) in &src.cells {
                        let c = key[0] + t as i64 * (eps - 1);
                        if c < cells.0 || c > cells.1 {
                            continue;
                        }
                        win.insert_add(vec![c], mod_scale(v, st));
                    }
                }
            }
        }
        out
    }
}

/// The lambda roots (with multiplicity) clearing the quasi-locality poles of
/// the pair of generator families, with `extra` additional multiplicity for
/// derivative dressing.
pub fn quasi_locality_roots(
    qvla: &Qvla,
    a: &GeneratorIndex,
    alpha: &GroupElem,
    b: &GeneratorIndex,
    beta: &GroupElem,
    extra: u32,
) -> Vec<GroupElem> {
    let ctx = &qvla.ctx;
    let mut roots = Vec::new();
    let mut seen: BTreeMap<GroupElem, u32> = BTreeMap::new();
    for e in qvla.entries(a, b) {
        let lam = e.alpha.mul(beta, ctx).mul(&alpha.inv(ctx), ctx);
        let mult = e.i + 1 + extra;
        let cur = seen.entry(lam).or_insert(0);
        *cur = (*cur).max(mult);
    }
    for (lam, mult) in seen {
        for _ in 0..mult {
            roots.push(lam.clone());
        }
    }
    roots
}

/// Apply the field of a PBW vector of length <= 2 to a carrier vector on a
/// window: length <= 1 in closed form, length 2 through the coordinated
/// product F^eps_{-1-j} applied to the closed-form tail field.
pub fn module_field_apply(
    module: &RestrictedModule,
    v: &PbwVector,
    x: &ModVec,
    cells: (i64, i64),
) -> Result<LaurentWindow<ModVec>, QvlaError> {
    let mut out = LaurentWindow::empty(vec!["z2".into()], vec![cells]);
    for (mono, c) in &v.terms {
        let win = match mono.0.len() {
            0 | 1 => {
                let mut single = PbwVector::zero();
                single.add_term(mono.clone(), Scalar::one(&module.qvla.ctx));
                module_field_len1(module, &single, x, cells)?
            }
            2 => {
                let head = &mono.0[0];
                let tail = Monomial(vec![mono.0[1].clone()]);
                let mut tail_v = PbwVector::zero();
                tail_v.add_term(tail, Scalar::one(&module.qvla.ctx));
                let j = (-head.m - 1) as u32;
                eps_product_apply(module, &head.a, &head.alpha, &tail_v, j, x, cells)?
            }
            _ => {
                return Err(QvlaError::Contract(
                    "module fields are implemented for PBW length <= 2".into(),
                ))
            }
        };
        out = out.add(&win.scale(c));
    }
    Ok(out)
}

/// (F ^eps_{-1-j} G)(z2) x for a generator field F = a(alpha .) and a tail
/// vector G of PBW length <= 1, via the substitution formula
///   q(phi/z2)^{-1} (q(z1/z2) F(z1) G(z2))|_{z1 = phi(z2,z0)},
/// reading the coefficient of z0^j.
#[allow(clippy::too_many_arguments)]
fn eps_product_apply(
    module: &RestrictedModule,
    fa: &GeneratorIndex,
    falpha: &GroupElem,
    tail: &PbwVector,
    j: u32,
    x: &ModVec,
    out_cells: (i64, i64),
) -> Result<LaurentWindow<ModVec>, QvlaError> {
    let qvla = &module.qvla;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    // Tail field data: a single dressed generator (or vacuum).
    let (tb, tbeta, l) = match tail.terms.iter().next() {
        Some((mono, _)) if mono.0.len() == 1 => {
            let md = &mono.0[0];
            (md.a.clone(), md.alpha.clone(), (-md.m - 1) as u32)
        }
        Some((mono, _)) if mono.0.is_empty() => {
            // F ^eps_{-1-j} 1 = (1/j!)(z^eps d/dz)^j F by the vacuum property;
            // realize it directly as a dressed field.
            let mut single = PbwVector::zero();
            single.add_term(
                Monomial(vec![Mode::new(fa.clone(), falpha.clone(), -1 - j as i64)]),
                Scalar::one(ctx),
            );
            return module_field_len1(module, &single, x, out_cells);
        }
        _ => {
            return Err(QvlaError::Contract(
                "eps product tail must be a single monomial of length <= 1".into(),
            ))
        }
    };
    let roots = quasi_locality_roots(qvla, fa, falpha, &tb, &tbeta, l + 1);
    let qc = q_poly_coeffs(ctx, &roots);
    let dq = qc.len() as i64 - 1;

    // Internal z0 order: target j plus the valuation of q(1+u).
    let probe_order = j as usize + qc.len() + 2;
    let u = u_shift_series(ctx, eps, probe_order);
    let qphi = q_of_phi(ctx, &u, &qc, probe_order);
    let mult = qphi
        .valuation()
        .ok_or_else(|| QvlaError::Contract("zero q polynomial".into()))?;
    let k_int = j as usize + mult;

    // Uniform z1 lower bound for the q-cleared product.
    let lo1 = -module.restriction_bound(x) + eps - 1 - dq;
    // Tail window cells needed.
    let shift_lo = (k_int as i64 * (eps - 1)).min(0);
    let shift_hi = (k_int as i64 * (eps - 1)).max(0);
    // After the final division the cell index moves by -mult(eps-1) and the
    // unit-inverse convolution by up to -k_int(eps-1); widen accordingly.
    let c_lo = out_cells.0 + (mult as i64 * (eps - 1)).min(0) + shift_lo - shift_hi;
    let c_hi = out_cells.1 + (mult as i64 * (eps - 1)).max(0) + shift_hi - shift_lo;
    let c1_max = c_hi - shift_lo;
    let g_lo = {
        // natural lower bound of the dressed tail field
        -module.restriction_bound(x) + eps - 1 + l as i64 * (eps - 1) - dq
    };
    let g_hi = c1_max - lo1 + dq;
    let tail_win = module_field_len1(module, tail, x, (g_lo.min(g_hi), g_hi))?;

    // P(p1, p2) = sum_t q_t F_{p1 - t}(tail_{p2 + t}); substituted into
    // R[s][c] = sum_{p1} binpow(p1, s) P(p1, c - p1 - s(eps-1)).
    let mut r = Z0Windows::empty(k_int, (c_lo, c_hi));
    let mut binpow_cache: BTreeMap<i64, ShiftSeries> = BTreeMap::new();
    for p1 in lo1..=(c_hi - (k_int as i64 * (eps - 1)).min(0) - (g_lo - dq)) {
        let bp = binpow_cache
            .entry(p1)
            .or_insert_with(|| binpow_series(ctx, &u, p1, k_int))
            .clone();
        // P(p1, .) as a map from p2.
        let mut pcol: BTreeMap<i64, ModVec> = BTreeMap::new();
        for (t, qt) in qc.iter().enumerate() {
            if qt.is_zero() {
                continue;
            }
            let m = -(p1 - t as i64) + eps - 1;
            for (key, gv) in &tail_win.cells {
                let p2 = key[0] - t as i64;
                let fv = module.apply(fa, m, gv);
                if fv.is_empty() {
                    continue;
                }
                let c = embed_power(ctx, falpha, -m + eps - 1).mul(qt);
                let scaled = mod_scale(&fv, &c);
                match pcol.get_mut(&p2) {
                    Some(e) => {
                        for (k, cc) in scaled {
                            mod_add(e, k, cc);
                        }
                    }
                    None => {
                        pcol.insert(p2, scaled);
                    }
                }
            }
        }
        for (s, bs) in bp.0.iter().enumerate() {
            if s > k_int || bs.is_zero() {
                continue;
            }
            for (p2, v) in &pcol {
                let c = p1 + p2 + s as i64 * (eps - 1);
                if c < c_lo || c > c_hi {
                    continue;
                }
                r.wins[s].insert_add(vec![c], mod_scale(v, bs));
            }
        }
    }

    // Divide by q(1+u) = z0^mult * unit: multiply by the inverse of the unit
    // part and shift. Orders of the quotient below -mult vanish by
    // construction; orders in [-mult, 0) carry the singular part of the
    // coordinated product and are simply not read here.
    let unit = ShiftSeries(qphi.0[mult..].to_vec()).truncated(k_int);
    let inv = unit.inverse_unit(ctx, k_int);
    let rr = r.mul_series(&inv, eps, k_int, (c_lo, c_hi));
    // Quotient order j lives at rr order j + mult, cells shifted by mult(eps-1).
    let mut out = LaurentWindow::empty(vec!["z2".into()], vec![out_cells]);
    if let Some(src) = rr.wins.get(j as usize + mult) {
        for (key, v) in &src.cells {
            let c = key[0] - mult as i64 * (eps - 1);
            if c < out_cells.0 || c > out_cells.1 {
                continue;
            }
            out.insert_add(vec![c], v.clone());
        }
    }
    Ok(out)
}

/// Membership and substitution identity of the coordinated module, at the
/// given z0 order, for generator vectors u = a^{alpha,0} and v = b^{beta,0}.
#[allow(clippy::too_many_arguments)]
pub fn check_phi_associativity(
    module: &RestrictedModule,
    env: &Enveloper,
    a: &GeneratorIndex,
    alpha: &GroupElem,
    b: &GeneratorIndex,
    beta: &GroupElem,
    qroots: &[GroupElem],
    z0_order: u32,
    cells: (i64, i64),
) -> Result<Report, QvlaError> {
    let qvla = &module.qvla;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut report = Report::new(
        "phi-associativity",
        &format!(
            "u={}^{} v={}^{} z0-order<={} z2 in [{},{}]",
            a,
            crate::qvla::render_group(alpha),
            b,
            crate::qvla::render_group(beta),
            z0_order,
            cells.0,
            cells.1
        ),
    );
    let qc = q_poly_coeffs(ctx, qroots);
    let dq = qc.len() as i64 - 1;

    // The algebra-side products u_n v do not depend on the sample vector.
    let k_max0 = z0_order as usize;
    let neg_orders0 = (dq + 2) as usize;
    let uvec = env.generator_vector(a, alpha)?;
    let vvec = env.generator_vector(b, beta)?;
    let n_hi = env.annihilation_bound(2);
    let n_lo = -(k_max0 as i64) - (neg_orders0 as i64) - 1;
    let mut unv_map: BTreeMap<i64, PbwVector> = BTreeMap::new();
    for n in n_lo..=n_hi {
        let unv = env.vertex_coefficient(&uvec, n, &vvec)?;
        if !unv.is_zero() {
            unv_map.insert(n, unv);
        }
    }

    for (xi, x) in module.samples.iter().enumerate() {
        // ------------------------------------------------------------------
        // Membership: on the strip below the uniform bound, the q-multiplied
        // product must vanish.
        // ------------------------------------------------------------------
        let lo1 = -module.restriction_bound(x) + eps - 1 - dq;
        let margin = 3i64;
        let strip_p2_hi = -(lo1 - margin) + 2;
        let g_lo = -module.restriction_bound(x) + eps - 1;
        let bwin = module.field_apply(b, beta, x, (g_lo, strip_p2_hi + dq));
        let mut membership_ok = true;
        let mut witness = None;
        'strip: for p1 in (lo1 - margin)..lo1 {
            for p2 in g_lo - dq..=strip_p2_hi {
                let mut cell = ModVec::new();
                for (t, qt) in qc.iter().enumerate() {
                    if qt.is_zero() {
                        continue;
                    }
                    let m = -(p1 - t as i64) + eps - 1;
                    if let Some(gv) = bwin.get(&[p2 + t as i64]) {
                        let fv = module.apply(a, m, gv);
                        let c = embed_power(ctx, alpha, -m + eps - 1).mul(qt);
                        for (k, cc) in mod_scale(&fv, &c) {
                            mod_add(&mut cell, k, cc);
                        }
                    }
                }
                if !cell.is_empty() {
                    membership_ok = false;
                    witness = Some(format!(
                        "insufficient q polynomial: residual pole at (z1^{}, z2^{}): {}",
                        p1,
                        p2,
                        render_modvec(&cell)
                    ));
                    break 'strip;
                }
            }
        }
        report.record(
            format!("membership x#{}", xi),
            membership_ok,
            witness.clone(),
        );
        if !membership_ok {
            continue;
        }

        // ------------------------------------------------------------------
        // Substitution identity, coefficientwise in z0.
        // ------------------------------------------------------------------
        let k_max = z0_order as usize;
        let neg_orders = (dq + 2) as usize;
        let u_s = u_shift_series(ctx, eps, k_max + neg_orders + 2);
        let qphi = q_of_phi(ctx, &u_s, &qc, k_max + neg_orders + 2);

        // RHS: substitute z1 = phi into q(z1/z2) A(z1) B(z2) x.
        let shift_lo = (k_max as i64 * (eps - 1)).min(0);
        let c_lo = cells.0;
        let c_hi = cells.1;
        let g_hi2 = (c_hi - shift_lo) - lo1 + dq;
        let bwin2 = module.field_apply(b, beta, x, (g_lo - dq, g_hi2));
        let mut rhs = Z0Windows::empty(k_max, (c_lo, c_hi));
        let mut binpow_cache: BTreeMap<i64, ShiftSeries> = BTreeMap::new();
        for p1 in lo1..=(c_hi - shift_lo - (g_lo - dq)) {
            let bp = binpow_cache
                .entry(p1)
                .or_insert_with(|| binpow_series(ctx, &u_s, p1, k_max))
                .clone();
            let mut pcol: BTreeMap<i64, ModVec> = BTreeMap::new();
            for (t, qt) in qc.iter().enumerate() {
                if qt.is_zero() {
                    continue;
                }
                let m = -(p1 - t as i64) + eps - 1;
                for (key, gv) in &bwin2.cells {
                    let p2 = key[0] - t as i64;
                    let fv = module.apply(a, m, gv);
                    if fv.is_empty() {
                        continue;
                    }
                    let c = embed_power(ctx, alpha, -m + eps - 1).mul(qt);
                    let scaled = mod_scale(&fv, &c);
                    match pcol.get_mut(&p2) {
                        Some(e) => {
                            for (k, cc) in scaled {
                                mod_add(e, k, cc);
                            }
                        }
                        None => {
                            pcol.insert(p2, scaled);
                        }
                    }
                }
            }
            for s in 0..=k_max {
                let bs = &bp.0[s];
                if bs.is_zero() {
                    continue;
                }
                for (p2, v) in &pcol {
                    let c = p1 + p2 + s as i64 * (eps - 1);
                    if c < c_lo || c > c_hi {
                        continue;
                    }
                    rhs.wins[s].insert_add(vec![c], mod_scale(v, bs));
                }
            }
        }

        // LHS: q(phi/z2) * sum_n Y_W(u_n v, z2) z0^{-n-1} x, orders
        // -neg_orders .. k_max; the negative orders must vanish.
        let wide = (
            c_lo - (k_max as i64 + neg_orders as i64 + 2) * (eps - 1).abs(),
            c_hi + (k_max as i64 + neg_orders as i64 + 2) * (eps - 1).abs(),
        );
        let mut ynv: BTreeMap<i64, LaurentWindow<ModVec>> = BTreeMap::new();
        for (n, unv) in &unv_map {
            ynv.insert(*n, module_field_apply(module, unv, x, wide)?);
        }
        for k in -(neg_orders as i64)..=(k_max as i64) {
            let mut lhs_k = LaurentWindow::<ModVec>::empty(vec!["z2".into()], vec![(c_lo, c_hi)]);
            for (jj, qv) in qphi.0.iter().enumerate() {
                if qv.is_zero() {
                    continue;
                }
                let n = jj as i64 - k - 1;
                if let Some(win) = ynv.get(&n) {
                    for (key, v) in &win.cells {
                        let c = key[0] + jj as i64 * (eps - 1);
                        if c < c_lo || c > c_hi {
                            continue;
                        }
                        lhs_k.insert_add(vec![c], mod_scale(v, qv));
                    }
                }
            }
            let rhs_k = if k < 0 {
                LaurentWindow::<ModVec>::empty(vec!["z2".into()], vec![(c_lo, c_hi)])
            } else {
                rhs.wins[k as usize].clone()
            };
            match lhs_k.first_difference(&rhs_k) {
                None => report.record_trivial(),
                Some(cell) => {
                    let l = lhs_k.get(&cell).cloned().unwrap_or_default();
                    let r = rhs_k.get(&cell).cloned().unwrap_or_default();
                    report.record(
                        format!("substitution x#{} z0^{}", xi, k),
                        false,
                        Some(format!(
                            "at z2^{}: {} vs {}",
                            cell[0],
                            render_modvec(&l),
                            render_modvec(&r)
                        )),
                    );
                }
            }
        }
        report.record(format!("substitution identity x#{}", xi), true, None);
    }
    Ok(report)
}

/// Y_W of a PBW vector of length <= 1 applied to a carrier vector x, as a
/// window in one variable:
///   Y_W(|0>, w) x = x at w^0,
///   Y_W(y^{gam,0}(-1-j)|0>, w) x = (1/j!)(w^eps d/dw)^j (y(gam w) x).
pub fn module_field_len1(
    module: &RestrictedModule,
    v: &PbwVector,
    x: &ModVec,
    w_cells: (i64, i64),
) -> Result<LaurentWindow<ModVec>, QvlaError> {
    let ctx = &module.qvla.ctx;
    let eps = module.qvla.epsilon;
    let mut out = LaurentWindow::empty(vec!["w".into()], vec![w_cells]);
    for (mono, c) in &v.terms {
        match mono.0.len() {
            0 => {
                if w_cells.0 <= 0 && 0 <= w_cells.1 {
                    out.insert_add(vec![0], mod_scale(x, c));
                }
            }
            1 => {
                let md = &mono.0[0];
                let j = (-md.m - 1) as u32;
                // (1/j!)(w^eps d/dw)^j of the generator field: the cell at e
                // receives divided_product(e0, j, eps) times the base cell at
                // e0 = e - j(eps-1).
                for e in w_cells.0..=w_cells.1 {
                    let e0 = e - j as i64 * (eps - 1);
                    let factor = divided_product(ctx, e0, j, eps).mul(c);
                    if factor.is_zero() {
                        continue;
                    }
                    let m = -e0 + eps - 1;
                    let base = module.apply(&md.a, m, x);
                    if base.is_empty() {
                        continue;
                    }
                    let scaled = mod_scale(
                        &base,
                        &embed_power(ctx, &md.alpha, -m + eps - 1).mul(&factor),
                    );
                    out.insert_add(vec![e], scaled);
                }
            }
            _ => {
                return Err(QvlaError::Contract(
                    "length > 1 vector where a commutator product was expected".into(),
                ))
            }
        }
    }
    Ok(out)
}
