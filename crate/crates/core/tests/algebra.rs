//! Cross-module tests of the derived algebras against independently stated
//! bracket values for the built-in families.

use qvla::currents::GeneratorIndex;
use qvla::examples::*;
use qvla::qvla::brackets::{
    abstract_bracket, current_bracket, gamma_bracket, phi_gamma, zeta_mode_bracket,
};
use qvla::qvla::checks::{
    associated_group, check_jacobi, check_reconstruction, check_skew_symmetry,
    zeta_bracket_window_oracle, CheckWindow,
};
use qvla::qvla::reduce::{gamma_normal_form, reduce_mode};
use qvla::qvla::{LieElement, Mode, Qvla};
use qvla::scalars::{GroupElem, Scalar};

fn small_window() -> CheckWindow {
    CheckWindow {
        param: 2,
        mode: 3,
        group: 2,
    }
}

#[test]
fn qheis_associated_group_is_q() {
    let h = q_heisenberg();
    let gens = associated_group(&h, 2);
    assert_eq!(gens, vec![GroupElem::param(&h.ctx, 0)]);
}

#[test]
fn vlike_associated_group_is_trivial() {
    let v = virasoro_like();
    assert!(associated_group(&v, 2).is_empty());
}

#[test]
fn klein_associated_group_is_minus_one() {
    let k = klein_bottle();
    assert_eq!(associated_group(&k, 2), vec![GroupElem::zeta(&k.ctx)]);
}

#[test]
fn affine_associated_group_is_torsion() {
    let a = twisted_affine(&FiniteLieData::sl2_chevalley(), 0).unwrap();
    assert_eq!(associated_group(&a, 2), vec![GroupElem::zeta(&a.ctx)]);
}

#[test]
fn qheis_zeta0_mode_bracket() {
    // [a^{al,0}(m), a^{be,0}(n)] = (d_{al be^-1,q} - d_{al be^-1,q^-1})
    //                              /(q-q^-1) * d_{m+n+1,0} * c^{1,0}(-1)
    let h = q_heisenberg();
    let ctx = &h.ctx;
    let a = GeneratorIndex::simple("a");
    let c = GeneratorIndex::simple("c");
    let q = GroupElem::param(ctx, 0);
    let id = GroupElem::identity(ctx);
    let qs = Scalar::param_pow(ctx, 0, 1);
    let coeff = qs
        .sub(&Scalar::param_pow(ctx, 0, -1))
        .inv()
        .unwrap();
    for e in -2..=2i64 {
        for f in -2..=2i64 {
            for m in -3..=3i64 {
                for n in -3..=3i64 {
                    let x = Mode::new(a.clone(), q.pow(e, ctx), m);
                    let y = Mode::new(a.clone(), q.pow(f, ctx), n);
                    let b = zeta_mode_bracket(&h, 0, &x, &y).unwrap();
                    let mut expect = LieElement::zero(0);
                    if m + n + 1 == 0 {
                        let d = e - f;
                        if d == 1 {
                            expect.add_term(Mode::new(c.clone(), id.clone(), -1), coeff.clone());
                        } else if d == -1 {
                            expect.add_term(Mode::new(c.clone(), id.clone(), -1), coeff.neg());
                        }
                    }
                    assert_eq!(b, expect, "bracket at e={} f={} m={} n={}", e, f, m, n);
                }
            }
        }
    }
}

#[test]
fn qheis_gamma_bracket_matches_hq() {
    // [a^1(m), a^1(n)]_Gamma = ((q^m - q^-m)/(q - q^-1)) d_{m,-n} c
    let h = q_heisenberg();
    let ctx = &h.ctx;
    let a = GeneratorIndex::simple("a");
    let c = GeneratorIndex::simple("c");
    let id = GroupElem::identity(ctx);
    let qs = Scalar::param_pow(ctx, 0, 1);
    let denom = qs.sub(&Scalar::param_pow(ctx, 0, -1));
    for m in -4..=4i64 {
        for n in -4..=4i64 {
            let x = Mode::new(a.clone(), id.clone(), m);
            let y = Mode::new(a.clone(), id.clone(), n);
            let b = gamma_bracket(&h, &x, &y).unwrap();
            let mut expect = LieElement::zero(1);
            if m == -n && m != 0 {
                let num = Scalar::param_pow(ctx, 0, m).sub(&Scalar::param_pow(ctx, 0, -m));
                expect.add_term(
                    Mode::new(c.clone(), id.clone(), 0),
                    num.div(&denom).unwrap(),
                );
            }
            assert_eq!(b, expect, "gamma bracket at m={} n={}", m, n);
        }
    }
}

#[test]
fn qheis_gamma_normal_form_collapses_scales() {
    let h = q_heisenberg();
    let ctx = &h.ctx;
    let a = GeneratorIndex::simple("a");
    let q = GroupElem::param(ctx, 0);
    let id = GroupElem::identity(ctx);
    for m in -3..=3i64 {
        // a^{q,eps}(m) -> q^{-m+eps-1} a^{1,eps}(m), eps = 1
        let e = LieElement::single(1, Mode::new(a.clone(), q.clone(), m), Scalar::one(ctx));
        let nf = gamma_normal_form(&h, &e).unwrap();
        let mut expect = LieElement::zero(1);
        expect.add_term(Mode::new(a.clone(), id.clone(), m), Scalar::param_pow(ctx, 0, -m));
        assert_eq!(nf, expect);
        // the defining relation collapses to zero
        let mut rel = e.clone();
        rel.add_term(
            Mode::new(a.clone(), id.clone(), m),
            Scalar::param_pow(ctx, 0, -m).neg(),
        );
        assert!(gamma_normal_form(&h, &rel).unwrap().is_zero());
    }
}

#[test]
fn central_mode_bracket_vanishes() {
    let h = q_heisenberg();
    let ctx = &h.ctx;
    let c = GeneratorIndex::simple("c");
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let x = Mode::new(c, id.clone(), 0);
    let y = Mode::new(a, id, 2);
    assert!(zeta_mode_bracket(&h, 0, &x, &y).unwrap().is_zero());
    assert!(gamma_bracket(&h, &x, &y).unwrap().is_zero());
}

#[test]
fn vlike_current_bracket_has_two_blocks() {
    let v = virasoro_like();
    let ctx = &v.ctx;
    let id = GroupElem::identity(ctx);
    let l2 = GeneratorIndex::new("L", vec![2]);
    let l3 = GeneratorIndex::new("L", vec![3]);
    let terms = current_bracket(&v, &l2, &id, &l3, &id).unwrap();
    // entries (i,lam) = (1,1) with (m+n) L_{m+n}, and (0,1) with derivative j=1
    assert_eq!(terms.len(), 2);
    let orders: Vec<u32> = terms.iter().map(|t| t.order).collect();
    assert!(orders.contains(&0) && orders.contains(&1));
    for t in &terms {
        assert!(t.scale.is_identity());
    }
}

#[test]
fn vlike_abstract_bracket_matches_formula() {
    // [L_{m1,m2}, L_{n1,n2}] = (m1 n2 - m2 n1) L_{m1+n1, m2+n2}
    //                          + d_{m1,-n1} d_{m2,-n2} m1 c.
    // Mode encoding: L_{m1,m2} <-> family L[m2], mode index m1.
    let v = virasoro_like();
    let ctx = &v.ctx;
    for m1 in -3..=3i64 {
        for m2 in -2..=2i64 {
            for n1 in -3..=3i64 {
                for n2 in -2..=2i64 {
                    let got = abstract_bracket(
                        &v,
                        &GeneratorIndex::new("L", vec![m2]),
                        m1,
                        &GeneratorIndex::new("L", vec![n2]),
                        n1,
                    )
                    .unwrap();
                    let mut expect = qvla::qvla::GElement::new();
                    let coeff = m1 * n2 - m2 * n1;
                    if coeff != 0 {
                        qvla::qvla::g_add_term(
                            &mut expect,
                            (GeneratorIndex::new("L", vec![m2 + n2]), m1 + n1),
                            Scalar::from_i64(ctx, coeff),
                        );
                    }
                    if m1 == -n1 && m2 == -n2 && m1 != 0 {
                        qvla::qvla::g_add_term(
                            &mut expect,
                            (GeneratorIndex::simple("c"), 0),
                            Scalar::from_i64(ctx, m1),
                        );
                    }
                    assert_eq!(got, expect, "at ({},{}),({},{})", m1, m2, n1, n2);
                }
            }
        }
    }
}

#[test]
fn vlike_zeta2_bracket_agrees_with_window_oracle() {
    let v = virasoro_like();
    let ctx = &v.ctx;
    let id = GroupElem::identity(ctx);
    for zeta in [0i64, 1, 2] {
        for pm in -1..=1i64 {
            for pn in -1..=1i64 {
                for m in -2..=2i64 {
                    for n in -2..=2i64 {
                        let x = Mode::new(GeneratorIndex::new("L", vec![pm]), id.clone(), m);
                        let y = Mode::new(GeneratorIndex::new("L", vec![pn]), id.clone(), n);
                        let closed = zeta_mode_bracket(&v, zeta, &x, &y).unwrap();
                        let oracle = zeta_bracket_window_oracle(&v, zeta, &x, &y).unwrap();
                        assert_eq!(closed, oracle, "zeta={} [{},{}]", zeta, x, y);
                    }
                }
            }
        }
    }
}

#[test]
fn klein_reduce_mode_flips_sign() {
    // B_m^{-1,zeta}(n) = -B_{-m}^{1,zeta}(n)
    let k = klein_bottle();
    let ctx = &k.ctx;
    let minus = GroupElem::zeta(ctx);
    let id = GroupElem::identity(ctx);
    for zeta in [0i64, 1, 2] {
        for p in -3..=3i64 {
            for n in -3..=3i64 {
                let e = LieElement::single(
                    zeta,
                    Mode::new(GeneratorIndex::new("B", vec![p]), minus.clone(), n),
                    Scalar::one(ctx),
                );
                let nf = reduce_mode(&k, zeta, &e).unwrap();
                let mut expect = LieElement::zero(zeta);
                expect.add_term(
                    Mode::new(GeneratorIndex::new("B", vec![-p]), id.clone(), n),
                    Scalar::from_i64(ctx, -1),
                );
                assert_eq!(nf, expect, "zeta={} p={} n={}", zeta, p, n);
            }
        }
    }
}

#[test]
fn klein_scale_one_modes_are_basic() {
    let k = klein_bottle();
    let ctx = &k.ctx;
    let id = GroupElem::identity(ctx);
    for p in -3..=3i64 {
        let e = LieElement::single(
            0,
            Mode::new(GeneratorIndex::new("B", vec![p]), id.clone(), 2),
            Scalar::one(ctx),
        );
        assert_eq!(reduce_mode(&k, 0, &e).unwrap(), e);
    }
}

#[test]
fn klein_gamma_matches_abstract_relation() {
    // In the Gamma quotient, B[m]^1(n) with m > 0 collapses per
    // B_{n,m} = -(-1)^n B_{n,-m}; for m = 0 and n even it vanishes.
    let k = klein_bottle();
    let ctx = &k.ctx;
    let id = GroupElem::identity(ctx);
    for m in 1..=3i64 {
        for n in -3..=3i64 {
            let e = LieElement::single(
                1,
                Mode::new(GeneratorIndex::new("B", vec![m]), id.clone(), n),
                Scalar::one(ctx),
            );
            let nf = gamma_normal_form(&k, &e).unwrap();
            let sign = if n.rem_euclid(2) == 0 { -1 } else { 1 };
            let mut expect = LieElement::zero(1);
            expect.add_term(
                Mode::new(GeneratorIndex::new("B", vec![-m]), id.clone(), n),
                Scalar::from_i64(ctx, sign),
            );
            assert_eq!(nf, expect, "m={} n={}", m, n);
        }
    }
    for n in -3..=3i64 {
        let e = LieElement::single(
            1,
            Mode::new(GeneratorIndex::new("B", vec![0]), id.clone(), n),
            Scalar::one(ctx),
        );
        let nf = gamma_normal_form(&k, &e).unwrap();
        if n.rem_euclid(2) == 0 {
            assert!(nf.is_zero(), "B[0]^1({}) should vanish", n);
        } else {
            assert_eq!(nf, e, "B[0]^1({}) should survive", n);
        }
    }
}

#[test]
fn affine_relation_reduces_scale() {
    // a^{zeta*al,zeta'}(m) reduces to zeta^{-k+eps-1} a^{al,zeta'}(m).
    let data = FiniteLieData::sl2_chevalley();
    let eps = 0i64;
    let a = twisted_affine(&data, eps).unwrap();
    let ctx = &a.ctx;
    let z = GroupElem::zeta(ctx);
    let id = GroupElem::identity(ctx);
    // u0 has grade 0 (e - f spans b_{(0)}).
    let u0 = GeneratorIndex::simple("u0");
    let e = LieElement::single(0, Mode::new(u0.clone(), z.clone(), 3), Scalar::one(ctx));
    let nf = reduce_mode(&a, 0, &e).unwrap();
    let mut expect = LieElement::zero(0);
    expect.add_term(
        Mode::new(u0, id.clone(), 3),
        Scalar::zeta_pow(ctx, eps - 1),
    );
    assert_eq!(nf, expect);
    // grade-1 family
    let u1 = GeneratorIndex::simple("u1");
    let e1 = LieElement::single(0, Mode::new(u1.clone(), z.clone(), -2), Scalar::one(ctx));
    let nf1 = reduce_mode(&a, 0, &e1).unwrap();
    let mut expect1 = LieElement::zero(0);
    expect1.add_term(
        Mode::new(u1, id, -2),
        Scalar::zeta_pow(ctx, -1 + eps - 1),
    );
    assert_eq!(nf1, expect1);
}

#[test]
fn affine_gamma_kills_wrong_grades() {
    let data = FiniteLieData::sl2_chevalley();
    let eps = 0i64;
    let a = twisted_affine(&data, eps).unwrap();
    let ctx = &a.ctx;
    let id = GroupElem::identity(ctx);
    // u0 has grade 0: a^1(m) survives iff m even (m = k mod 2).
    let u0 = GeneratorIndex::simple("u0");
    for m in -3..=3i64 {
        let e = LieElement::single(eps, Mode::new(u0.clone(), id.clone(), m), Scalar::one(ctx));
        let nf = gamma_normal_form(&a, &e).unwrap();
        if m.rem_euclid(2) == 0 {
            assert_eq!(nf, e);
        } else {
            assert!(nf.is_zero(), "u0^1({}) should vanish", m);
        }
    }
}

#[test]
fn skew_symmetry_passes_for_all_families() {
    let w = small_window();
    for q in all_examples() {
        let r = check_skew_symmetry(&q, &w).unwrap();
        assert!(r.is_pass(), "skew-symmetry failed for {}:\n{}", q.name, r.render_text());
    }
}

#[test]
fn jacobi_passes_for_all_families() {
    let w = CheckWindow {
        param: 2,
        mode: 2,
        group: 1,
    };
    for q in all_examples() {
        let r = check_jacobi(&q, &w).unwrap();
        assert!(r.is_pass(), "jacobi failed for {}:\n{}", q.name, r.render_text());
    }
}

#[test]
fn reconstruction_passes_for_all_families() {
    let w = CheckWindow {
        param: 1,
        mode: 2,
        group: 1,
    };
    for q in all_examples() {
        let r = check_reconstruction(&q, &w).unwrap();
        assert!(
            r.is_pass(),
            "reconstruction failed for {}:\n{}",
            q.name,
            r.render_text()
        );
    }
}

#[test]
fn phi_gamma_on_generators() {
    let h = q_heisenberg();
    let ctx = &h.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let q = GroupElem::param(ctx, 0);
    // a^1(m) -> a(m)
    let e = LieElement::single(1, Mode::new(a.clone(), id.clone(), 2), Scalar::one(ctx));
    let img = phi_gamma(&h, &e).unwrap();
    assert_eq!(img.len(), 1);
    assert!(img.get(&(a.clone(), 2)).unwrap().is_one());
    // a^q(m) -> q^{-m+eps-1} a(m), eps=1
    let e2 = LieElement::single(1, Mode::new(a.clone(), q, 2), Scalar::one(ctx));
    let img2 = phi_gamma(&h, &e2).unwrap();
    assert_eq!(img2.get(&(a, 2)).unwrap(), &Scalar::param_pow(ctx, 0, -2));
    // 0 -> 0
    let z = LieElement::zero(1);
    assert!(phi_gamma(&h, &z).unwrap().is_empty());
}

#[test]
fn qheis_mutated_sign_fails_skew() {
    let h = q_heisenberg_sign_mutation();
    let w = small_window();
    let r = check_skew_symmetry(&h, &w).unwrap();
    assert!(!r.is_pass(), "mutated structure should fail skew-symmetry");
}

fn all_examples() -> Vec<Qvla> {
    vec![
        twisted_affine(&FiniteLieData::sl2_chevalley(), 0).unwrap(),
        quantum_torus(&QuantumTorusData::generic(2, 1), 0).unwrap(),
        q_heisenberg(),
        virasoro_like(),
        klein_bottle(),
    ]
}

/// q-Heisenberg with the sign of the q^{-1} entry flipped: not skew-symmetric.
fn q_heisenberg_sign_mutation() -> Qvla {
    let h = q_heisenberg();
    let ctx = h.ctx.clone();
    let base = h.structure.clone();
    let structure: qvla::qvla::StructureFn =
        std::sync::Arc::new(move |a: &GeneratorIndex, b: &GeneratorIndex| {
            let mut entries = base(a, b);
            for e in entries.iter_mut() {
                if e.alpha == GroupElem::param(&ctx, 0).inv(&ctx) {
                    for (mu, _) in e.value.iter_mut() {
                        *mu = mu.neg();
                    }
                }
            }
            entries
        });
    Qvla { structure, ..h }
}
