//! Normal forms in the derived twist algebras.
//!
//! Relations are declared in current form and transcribed to mode relations
//! per twist. Rewriting is directed: a relation instance may eliminate its
//! largest mode (under `Mode::rewrite_key`) in favour of strictly smaller
//! ones, which keeps the process deterministic; a step bound guards against
//! relation sets whose closure does not terminate.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{LieElement, Mode, Qvla, Relation};
use crate::currents::current_deriv_factor;
use crate::error::QvlaError;
use crate::scalars::{embed_power, FieldCtx, GroupElem, Scalar};

pub const DEFAULT_STEP_BOUND: usize = 20_000;

/// One transcribed relation instance: a finite linear combination of modes
/// that vanishes in the twist algebra.
struct ModeRelation {
    terms: BTreeMap<Mode, Scalar>,
}

/// Transcribe `rel`, shifted by beta, at level m_bar, into the zeta algebra.
/// Term (mu, n, alpha, fam) contributes
///   mu * beta^{n(eps-1)} * F(p, n, zeta) * fam^{alpha*beta, zeta}(p),
/// with p = m_bar + n*(zeta-1).
fn transcribe(
    ctx: &Arc<FieldCtx>,
    eps: i64,
    zeta: i64,
    rel: &Relation,
    beta: &GroupElem,
    m_bar: i64,
) -> ModeRelation {
    let mut terms: BTreeMap<Mode, Scalar> = BTreeMap::new();
    for t in &rel.terms {
        let p = m_bar + t.n as i64 * (zeta - 1);
        let c = t
            .mu
            .mul(&embed_power(ctx, beta, t.n as i64 * (eps - 1)))
            .mul(&current_deriv_factor(ctx, p, t.n, zeta));
        if c.is_zero() {
            continue;
        }
        let mode = Mode::new(t.family.clone(), t.alpha.mul(beta, ctx), p);
        match terms.get_mut(&mode) {
            Some(e) => {
                let s = e.add(&c);
                if s.is_zero() {
                    terms.remove(&mode);
                } else {
                    *e = s;
                }
            }
            None => {
                terms.insert(mode, c);
            }
        }
    }
    ModeRelation { terms }
}

/// Transcribe at level m_bar into the Gamma-collapsed epsilon algebra, where
/// every mode has been rewritten to scale 1. All shifts beta give scalar
/// multiples of the beta = 1 instance, so only that one is produced.
fn transcribe_gamma(
    ctx: &Arc<FieldCtx>,
    eps: i64,
    rel: &Relation,
    m_bar: i64,
) -> ModeRelation {
    let id = GroupElem::identity(ctx);
    let mut terms: BTreeMap<Mode, Scalar> = BTreeMap::new();
    for t in &rel.terms {
        let p = m_bar + t.n as i64 * (eps - 1);
        let c = t
            .mu
            .mul(&current_deriv_factor(ctx, p, t.n, eps))
            .mul(&embed_power(ctx, &t.alpha, -p + eps - 1));
        if c.is_zero() {
            continue;
        }
        let mode = Mode::new(t.family.clone(), id.clone(), p);
        match terms.get_mut(&mode) {
            Some(e) => {
                let s = e.add(&c);
                if s.is_zero() {
                    terms.remove(&mode);
                } else {
                    *e = s;
                }
            }
            None => {
                terms.insert(mode, c);
            }
        }
    }
    ModeRelation { terms }
}

enum Step {
    /// Mode is irreducible.
    Keep,
    /// Mode rewrites to this combination (possibly empty = zero).
    Rewrite(Vec<(Mode, Scalar)>),
}

/// Try every relation instance that can eliminate `mode`; directedness
/// requires all remaining modes to be strictly smaller.
fn try_rewrite(qvla: &Qvla, zeta: i64, gamma: bool, mode: &Mode) -> Step {
    let ctx = &qvla.ctx;
    let key = mode.rewrite_key();
    for rel in (qvla.relations)(&mode.a) {
        for t in &rel.terms {
            if t.family != mode.a {
                continue;
            }
            let m_bar = mode.m - t.n as i64 * (zeta - 1);
            let inst = if gamma {
                if !mode.alpha.is_identity() {
                    continue;
                }
                transcribe_gamma(ctx, qvla.epsilon, &rel, m_bar)
            } else {
                let beta = mode.alpha.mul(&t.alpha.inv(ctx), ctx);
                transcribe(ctx, qvla.epsilon, zeta, &rel, &beta, m_bar)
            };
            let me = match inst.terms.get(mode) {
                Some(c) if !c.is_zero() => c.clone(),
                _ => continue,
            };
            let ok = inst
                .terms
                .keys()
                .all(|m| m == mode || m.rewrite_key() < key);
            if !ok {
                continue;
            }
            let neg_inv = me.inv().expect("nonzero pivot").neg();
            let mut rhs = Vec::new();
            for (m, c) in &inst.terms {
                if m == mode {
                    continue;
                }
                rhs.push((m.clone(), c.mul(&neg_inv)));
            }
            return Step::Rewrite(rhs);
        }
    }
    Step::Keep
}

fn reduce_worklist(
    qvla: &Qvla,
    zeta: i64,
    gamma: bool,
    start: BTreeMap<Mode, Scalar>,
    step_bound: usize,
) -> Result<LieElement, QvlaError> {
    type Key = (u32, i64, Vec<i64>, String, Vec<i64>, i64);
    let ctx = &qvla.ctx;
    let id = GroupElem::identity(ctx);
    let mut work: BTreeMap<Key, (Mode, Scalar)> = BTreeMap::new();
    let push = |work: &mut BTreeMap<Key, (Mode, Scalar)>, mode: Mode, c: Scalar| {
        if c.is_zero() {
            return;
        }
        let k = mode.rewrite_key();
        match work.get_mut(&k) {
            Some((_, e)) => {
                let s = e.add(&c);
                if s.is_zero() {
                    work.remove(&k);
                } else {
                    *e = s;
                }
            }
            None => {
                work.insert(k, (mode, c));
            }
        }
    };

    for (mode, c) in start {
        // Built-in handling of central families: the only surviving mode is
        // at index zeta-1, with the scale collapsed to the identity.
        if qvla.is_central(&mode.a) {
            if mode.m == zeta - 1 {
                push(
                    &mut work,
                    Mode::new(mode.a.clone(), id.clone(), mode.m),
                    c,
                );
            }
            continue;
        }
        push(&mut work, mode, c);
    }

    let mut out = LieElement::zero(zeta);
    let mut steps = 0usize;
    // Process the largest mode first, so rewrites only flow downward.
    while let Some((&ref key, _)) = work.iter().next_back() {
        let key = key.clone();
        let (mode, coeff) = work.remove(&key).unwrap();
        if qvla.is_central(&mode.a) {
            if mode.m == zeta - 1 {
                out.add_term(Mode::new(mode.a.clone(), id.clone(), mode.m), coeff);
            }
            continue;
        }
        match try_rewrite(qvla, zeta, gamma, &mode) {
            Step::Keep => out.add_term(mode, coeff),
            Step::Rewrite(rhs) => {
                steps += 1;
                if steps > step_bound {
                    return Err(QvlaError::NonConfluentRelations(step_bound));
                }
                for (m, c) in rhs {
                    if qvla.is_central(&m.a) {
                        if m.m == zeta - 1 {
                            push(
                                &mut work,
                                Mode::new(m.a.clone(), id.clone(), m.m),
                                c.mul(&coeff),
                            );
                        }
                        continue;
                    }
                    push(&mut work, m, c.mul(&coeff));
                }
            }
        }
    }
    Ok(out)
}

/// Normal form of an element of the zeta twist algebra modulo the transcribed
/// relations. Linear and idempotent.
pub fn reduce_mode(qvla: &Qvla, zeta: i64, e: &LieElement) -> Result<LieElement, QvlaError> {
    if e.zeta != zeta {
        return Err(QvlaError::Contract(format!(
            "element has twist {}, expected {}",
            e.zeta, zeta
        )));
    }
    for mode in e.terms.keys() {
        qvla.check_declared(&mode.a)?;
    }
    reduce_worklist(qvla, zeta, false, e.terms.clone(), DEFAULT_STEP_BOUND)
}

/// Normal form in the Gamma quotient of the epsilon twist algebra: every mode
/// a^{alpha,eps}(m) is first rewritten to alpha^{-m+eps-1} a^{1,eps}(m), then
/// the Gamma-collapsed relations are applied.
pub fn gamma_normal_form(qvla: &Qvla, e: &LieElement) -> Result<LieElement, QvlaError> {
    let eps = qvla.epsilon;
    if e.zeta != eps {
        return Err(QvlaError::Contract(
            "gamma normal form requires twist = epsilon".into(),
        ));
    }
    let ctx = &qvla.ctx;
    let id = GroupElem::identity(ctx);
    let mut collapsed: BTreeMap<Mode, Scalar> = BTreeMap::new();
    for (mode, c) in &e.terms {
        qvla.check_declared(&mode.a)?;
        let f = embed_power(ctx, &mode.alpha, -mode.m + eps - 1);
        let m2 = Mode::new(mode.a.clone(), id.clone(), mode.m);
        let c2 = c.mul(&f);
        match collapsed.get_mut(&m2) {
            Some(x) => {
                let s = x.add(&c2);
                if s.is_zero() {
                    collapsed.remove(&m2);
                } else {
                    *x = s;
                }
            }
            None => {
                if !c2.is_zero() {
                    collapsed.insert(m2, c2);
                }
            }
        }
    }
    reduce_worklist(qvla, eps, true, collapsed, DEFAULT_STEP_BOUND)
}
