//! Brackets of the presented algebra and its derived twist algebras, both as
//! canonical delta decompositions of currents and as exact mode brackets.

use std::sync::Arc;

use super::reduce::{gamma_normal_form, reduce_mode};
use super::{g_add_term, GElement, LieElement, Mode, Qvla};
use crate::currents::{
    collect_delta_coefficients, current_deriv_factor, delta_normalize, divided_product,
    CurrentExpr, DeltaTerm, DeltaVar, GeneratorIndex, RawDelta,
};
use crate::error::QvlaError;
use crate::scalars::{embed_power, FieldCtx, GroupElem};

/// [a(alpha z), b(beta w)] as a canonical delta decomposition, with the
/// coefficient currents read in the presented algebra:
///   sum over entries: beta^{(i+j)(eps-1)}
///     ((w^eps d/dw)^j (a_{(lam,gam,i,j)}b)(gam*beta*w)) D^(i)(alpha z, lam*beta*w).
pub fn current_bracket(
    qvla: &Qvla,
    a: &GeneratorIndex,
    alpha: &GroupElem,
    b: &GeneratorIndex,
    beta: &GroupElem,
) -> Result<Vec<DeltaTerm>, QvlaError> {
    qvla.check_declared(a)?;
    qvla.check_declared(b)?;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut raw_terms = Vec::new();
    for e in qvla.entries(a, b) {
        let pref = embed_power(ctx, beta, (e.i as i64 + e.j as i64) * (eps - 1));
        let mut coeff = CurrentExpr::zero(eps);
        for (mu, c) in &e.value {
            coeff.add_term(mu.mul(&pref), e.j, e.beta.mul(beta, ctx), c.clone());
        }
        if coeff.is_zero() {
            continue;
        }
        raw_terms.push(RawDelta {
            coeff,
            order: e.i,
            var: DeltaVar::W,
            alpha: alpha.clone(),
            beta: e.alpha.mul(beta, ctx),
            twist: eps,
        });
    }
    let normalized: Vec<DeltaTerm> = raw_terms
        .iter()
        .map(|r| delta_normalize(ctx, r))
        .collect();
    let merged = collect_delta_coefficients(&normalized)?;
    Ok(merged
        .into_iter()
        .map(|((order, scale), coeff)| DeltaTerm {
            coeff,
            order,
            scale,
            twist: eps,
        })
        .collect())
}

/// [a^{alpha,zeta}(z), b^{beta,zeta}(w)] as a canonical delta decomposition
/// with decorated coefficient currents:
///   alpha^{eps-1} sum beta^{(i+j)(eps-1)}
///     ((w^zeta d/dw)^j (a_{(alpha beta^-1,gam,i,j)}b)^{gam beta,zeta}(w)) D^(i)_{w,zeta}(z,w).
pub fn zeta_current_bracket(
    qvla: &Qvla,
    zeta: i64,
    a: &GeneratorIndex,
    alpha: &GroupElem,
    b: &GeneratorIndex,
    beta: &GroupElem,
) -> Result<Vec<DeltaTerm>, QvlaError> {
    qvla.check_declared(a)?;
    qvla.check_declared(b)?;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let key = alpha.mul(&beta.inv(ctx), ctx);
    let pref_alpha = embed_power(ctx, alpha, eps - 1);
    let mut terms = Vec::new();
    for e in qvla.entries(a, b) {
        if e.alpha != key {
            continue;
        }
        let pref = pref_alpha.mul(&embed_power(
            ctx,
            beta,
            (e.i as i64 + e.j as i64) * (eps - 1),
        ));
        let mut coeff = CurrentExpr::zero(zeta);
        for (mu, c) in &e.value {
            coeff.add_term(mu.mul(&pref), e.j, e.beta.mul(beta, ctx), c.clone());
        }
        if coeff.is_zero() {
            continue;
        }
        terms.push(DeltaTerm {
            coeff,
            order: e.i,
            scale: GroupElem::identity(ctx),
            twist: zeta,
        });
    }
    let merged = collect_delta_coefficients(&terms)?;
    Ok(merged
        .into_iter()
        .map(|((order, scale), coeff)| DeltaTerm {
            coeff,
            order,
            scale,
            twist: zeta,
        })
        .collect())
}

/// Exact mode bracket in the zeta twist algebra, by residue extraction of the
/// current bracket:
///   [a^{alpha,zeta}(m), b^{beta,zeta}(n)] = alpha^{eps-1} *
///     sum_{gam,i,j} beta^{(i+j)(eps-1)} P(m,i) Q(p,j)
///       (a_{(alpha beta^-1,gam,i,j)}b)^{gam beta,zeta}(p),
/// where p = m+n+(i+j)(zeta-1), P is the divided product picked out by
/// Res_z z^{m-zeta} of the delta factor and Q the derivative factor on the
/// coefficient current. The result is relation-reduced.
pub fn zeta_mode_bracket_raw(
    qvla: &Qvla,
    zeta: i64,
    x: &Mode,
    y: &Mode,
) -> Result<LieElement, QvlaError> {
    qvla.check_declared(&x.a)?;
    qvla.check_declared(&y.a)?;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let key = x.alpha.mul(&y.alpha.inv(ctx), ctx);
    let pref_alpha = embed_power(ctx, &x.alpha, eps - 1);
    let mut out = LieElement::zero(zeta);
    for e in qvla.entries(&x.a, &y.a) {
        if e.alpha != key {
            continue;
        }
        let p = x.m + y.m + (e.i as i64 + e.j as i64) * (zeta - 1);
        let c = pref_alpha
            .mul(&embed_power(
                ctx,
                &y.alpha,
                (e.i as i64 + e.j as i64) * (eps - 1),
            ))
            .mul(&divided_product(ctx, x.m, e.i, zeta))
            .mul(&current_deriv_factor(ctx, p, e.j, zeta));
        if c.is_zero() {
            continue;
        }
        let scale = e.beta.mul(&y.alpha, ctx);
        for (mu, f) in &e.value {
            out.add_term(Mode::new(f.clone(), scale.clone(), p), c.mul(mu));
        }
    }
    Ok(out)
}

pub fn zeta_mode_bracket(
    qvla: &Qvla,
    zeta: i64,
    x: &Mode,
    y: &Mode,
) -> Result<LieElement, QvlaError> {
    let raw = zeta_mode_bracket_raw(qvla, zeta, x, y)?;
    reduce_mode(qvla, zeta, &raw)
}

/// Bilinear extension of the mode bracket to reduced elements.
pub fn zeta_bracket_elem(
    qvla: &Qvla,
    zeta: i64,
    x: &LieElement,
    y: &LieElement,
) -> Result<LieElement, QvlaError> {
    let mut acc = LieElement::zero(zeta);
    for (mx, cx) in &x.terms {
        for (my, cy) in &y.terms {
            let b = zeta_mode_bracket_raw(qvla, zeta, mx, my)?;
            acc = acc.add(&b.scale(&cx.mul(cy)))?;
        }
    }
    reduce_mode(qvla, zeta, &acc)
}

/// The Gamma-averaged bracket on the epsilon twist algebra:
///   [x, y]_Gamma = sum_lam lam^{-m+eps-1} [a^{alpha lam^-1,eps}(m), y],
/// in Gamma normal form. The lambda support is finite: it is read off the
/// structure entries.
pub fn gamma_bracket(qvla: &Qvla, x: &Mode, y: &Mode) -> Result<LieElement, QvlaError> {
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut acc = LieElement::zero(eps);
    // lambda with (alpha lam^-1) beta^-1 = e.alpha, i.e. lam = alpha beta^-1 e.alpha^-1;
    // distinct values only, since the inner bracket already sums all entries.
    let lambdas: std::collections::BTreeSet<GroupElem> = qvla
        .entries(&x.a, &y.a)
        .iter()
        .map(|e| {
            x.alpha
                .mul(&y.alpha.inv(ctx), ctx)
                .mul(&e.alpha.inv(ctx), ctx)
        })
        .collect();
    for lam in lambdas {
        let shifted = Mode::new(x.a.clone(), x.alpha.mul(&lam.inv(ctx), ctx), x.m);
        let inner = zeta_mode_bracket_raw(qvla, eps, &shifted, y)?;
        let f = embed_power(ctx, &lam, -x.m + eps - 1);
        acc = acc.add(&inner.scale(&f))?;
    }
    gamma_normal_form(qvla, &acc)
}

pub fn gamma_bracket_elem(
    qvla: &Qvla,
    x: &LieElement,
    y: &LieElement,
) -> Result<LieElement, QvlaError> {
    let eps = qvla.epsilon;
    let mut acc = LieElement::zero(eps);
    for (mx, cx) in &x.terms {
        for (my, cy) in &y.terms {
            let b = gamma_bracket(qvla, mx, my)?;
            acc = acc.add(&b.scale(&cx.mul(cy)))?;
        }
    }
    gamma_normal_form(qvla, &acc)
}

/// The reconstruction map: a^{alpha,eps}(m) + Gamma-ideal |-> alpha^{-m+eps-1} a(m),
/// expanded in the declared basis of the presented algebra.
pub fn phi_gamma(qvla: &Qvla, e: &LieElement) -> Result<GElement, QvlaError> {
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    if e.zeta != eps {
        return Err(QvlaError::Contract(
            "phi_gamma requires twist = epsilon".into(),
        ));
    }
    let mut out = GElement::new();
    for (mode, c) in &e.terms {
        let f = embed_power(ctx, &mode.alpha, -mode.m + eps - 1);
        for (mu, fam, m) in (qvla.g_basis)(&mode.a, mode.m) {
            g_add_term(&mut out, (fam, m), c.mul(&f).mul(&mu));
        }
    }
    Ok(out)
}

/// The bracket of the presented algebra on abstract modes, by residue
/// extraction of the defining commutator formula:
///   [a(m), b(n)] = sum_{lam,gam,i,j} lam^m gam^{-p+eps-1} P(m,i) Q(p,j)
///                  (a_{(lam,gam,i,j)}b)(p),   p = m+n+(i+j)(eps-1),
/// expanded in the declared basis.
pub fn abstract_bracket(
    qvla: &Qvla,
    a: &GeneratorIndex,
    m: i64,
    b: &GeneratorIndex,
    n: i64,
) -> Result<GElement, QvlaError> {
    qvla.check_declared(a)?;
    qvla.check_declared(b)?;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut out = GElement::new();
    for e in qvla.entries(a, b) {
        let p = m + n + (e.i as i64 + e.j as i64) * (eps - 1);
        let c = embed_power(ctx, &e.alpha, m)
            .mul(&embed_power(ctx, &e.beta, -p + eps - 1))
            .mul(&divided_product(ctx, m, e.i, eps))
            .mul(&current_deriv_factor(ctx, p, e.j, eps));
        if c.is_zero() {
            continue;
        }
        for (mu, f) in &e.value {
            for (nu, fam, mm) in (qvla.g_basis)(f, p) {
                g_add_term(&mut out, (fam, mm), c.mul(mu).mul(&nu));
            }
        }
    }
    Ok(out)
}

pub fn abstract_bracket_elem(
    qvla: &Qvla,
    x: &GElement,
    y: &GElement,
) -> Result<GElement, QvlaError> {
    let mut out = GElement::new();
    for ((a, m), cx) in x {
        for ((b, n), cy) in y {
            let br = abstract_bracket(qvla, a, *m, b, *n)?;
            for (k, c) in br {
                g_add_term(&mut out, k, c.mul(cx).mul(cy));
            }
        }
    }
    Ok(out)
}

/// Evaluate a plain current expression (presented-algebra reading) at one
/// mode level and expand in the declared basis: the coefficient of
/// z^{-level+eps-1} of sum mu (z^eps d/dz)^n a(alpha z).
pub fn current_level_abstract(
    qvla: &Qvla,
    expr: &CurrentExpr,
    level: i64,
) -> Result<GElement, QvlaError> {
    let ctx: &Arc<FieldCtx> = &qvla.ctx;
    let eps = qvla.epsilon;
    if expr.twist != eps {
        return Err(QvlaError::Contract(
            "presented-algebra currents must carry twist epsilon".into(),
        ));
    }
    let mut out = GElement::new();
    for ((a, alpha, n), mu) in &expr.terms {
        let p = level + *n as i64 * (eps - 1);
        let c = mu
            .mul(&current_deriv_factor(ctx, p, *n, eps))
            .mul(&embed_power(ctx, alpha, -p + eps - 1));
        if c.is_zero() {
            continue;
        }
        for (nu, fam, mm) in (qvla.g_basis)(a, p) {
            g_add_term(&mut out, (fam, mm), c.mul(&nu));
        }
    }
    Ok(out)
}
