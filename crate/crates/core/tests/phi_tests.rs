//! The phi substitution series and the coordinated quasi-module checks for
//! the Fock and induced modules.

use qvla::currents::GeneratorIndex;
use qvla::enveloping::Enveloper;
use qvla::examples::{affine_induced_module, fock_module, FiniteLieData};
use qvla::phi_modules::*;
use qvla::scalars::{FieldSpec, GroupElem, Scalar};

#[test]
fn phi_series_closed_forms() {
    let ctx = FieldSpec::new(1, 0).unwrap();
    // eps = 0: z + z0.
    let c0 = phi_series(&ctx, 0, 8);
    assert!(c0[0].is_one() && c0[1].is_one());
    assert!(c0[2..].iter().all(|c| c.is_zero()));
    // eps = 1: z e^{z0}: c_k = 1/k!.
    let c1 = phi_series(&ctx, 1, 8);
    let mut fact = 1i64;
    for (k, c) in c1.iter().enumerate() {
        if k > 0 {
            fact *= k as i64;
        }
        assert_eq!(c, &Scalar::ratio_i64(&ctx, 1, fact), "eps=1 k={}", k);
    }
    // eps = 2: z/(1 - z0 z): c_k = 1.
    let c2 = phi_series(&ctx, 2, 8);
    assert!(c2.iter().all(|c| c.is_one()));
}

#[test]
fn phi_flow_property() {
    let ctx = FieldSpec::new(1, 0).unwrap();
    for eps in [-1i64, 0, 1, 2, 3] {
        assert!(check_phi_flow(&ctx, eps, 6), "flow fails for eps={}", eps);
    }
}

#[test]
fn fock_action_basics() {
    let fock = fock_module();
    let ctx = &fock.qvla.ctx;
    let a = GeneratorIndex::simple("a");
    let vac: ModKey = Vec::new();
    let vacv = ModVec::from([(vac.clone(), Scalar::one(ctx))]);
    // a(m)|0> = 0 for m >= 0
    for m in 0..4 {
        assert!(fock.apply(&a, m, &vacv).is_empty());
    }
    // a(1)a(-1)|0> = |0>
    let am1 = fock.apply(&a, -1, &vacv);
    let back = fock.apply(&a, 1, &am1);
    assert_eq!(back, vacv);
    // central element acts by one
    let c = GeneratorIndex::simple("c");
    assert_eq!(fock.apply(&c, 0, &am1), am1);
}

#[test]
fn fock_consistency() {
    let fock = fock_module();
    let r = check_module_consistency(&fock, 1, 3).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn induced_module_basics() {
    let data = FiniteLieData::sl2_chevalley();
    let m = affine_induced_module(&data, 0, Scalar::one(&data.ctx)).unwrap();
    let ctx = &m.qvla.ctx;
    let vacv = ModVec::from([(Vec::new(), Scalar::one(ctx))]);
    // nonnegative modes annihilate the highest weight vector
    for g in m.qvla.noncentral_generators(0) {
        for mm in 0..3 {
            assert!(m.apply(&g, mm, &vacv).is_empty(), "{}({})", g, mm);
        }
    }
    // level-zero module: central acts by zero
    let m0 = affine_induced_module(&data, 0, Scalar::zero(&data.ctx)).unwrap();
    let k = GeneratorIndex::simple("k");
    assert!(m0.apply(&k, -1, &vacv).is_empty());
    // level-one module: central acts by one at its single mode (eps-1 = -1)
    assert_eq!(m.apply(&k, -1, &vacv), vacv);
}

#[test]
fn induced_consistency() {
    let data = FiniteLieData::sl2_chevalley();
    let m = affine_induced_module(&data, 0, Scalar::one(&data.ctx)).unwrap();
    let r = check_module_consistency(&m, 0, 2).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn equivariance_fock_and_induced() {
    let fock = fock_module();
    let lams = vec![
        GroupElem::identity(&fock.qvla.ctx),
        GroupElem::param(&fock.qvla.ctx, 0),
    ];
    let r = check_equivariance(&fock, &lams, 1, (-4, 4)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());

    let data = FiniteLieData::sl2_chevalley();
    let ind = affine_induced_module(&data, 0, Scalar::one(&data.ctx)).unwrap();
    let lams2 = vec![
        GroupElem::identity(&ind.qvla.ctx),
        GroupElem::zeta(&ind.qvla.ctx),
    ];
    let r2 = check_equivariance(&ind, &lams2, 0, (-4, 4)).unwrap();
    assert!(r2.is_pass(), "{}", r2.render_text());
}

#[test]
fn equi_commutator_fock() {
    let fock = fock_module();
    let q = fock.qvla.clone();
    let env = Enveloper::new(&q);
    let r = check_equi_commutator(&fock, &env, 1, (-4, 4), (-4, 4)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn equi_commutator_induced() {
    let data = FiniteLieData::sl2_chevalley();
    let ind = affine_induced_module(&data, 0, Scalar::one(&data.ctx)).unwrap();
    let q = ind.qvla.clone();
    let env = Enveloper::new(&q);
    let r = check_equi_commutator(&ind, &env, 0, (-3, 3), (-3, 3)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn phi_associativity_fock() {
    let fock = fock_module();
    let q = fock.qvla.clone();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let qq = GroupElem::param(ctx, 0);
    let roots = vec![qq.clone(), qq.inv(ctx)];
    let r = check_phi_associativity(&fock, &env, &a, &id, &a, &id, &roots, 4, (-4, 4)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn phi_associativity_fock_insufficient_q() {
    let fock = fock_module();
    let q = fock.qvla.clone();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let r = check_phi_associativity(&fock, &env, &a, &id, &a, &id, &[], 2, (-3, 3)).unwrap();
    assert!(!r.is_pass(), "empty q should fail membership:\n{}", r.render_text());
    let text = r.render_text();
    assert!(text.contains("insufficient q polynomial"), "{}", text);
}

#[test]
fn phi_associativity_induced() {
    let data = FiniteLieData::sl2_chevalley();
    let ind = affine_induced_module(&data, 0, Scalar::one(&data.ctx)).unwrap();
    let q = ind.qvla.clone();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let id = GroupElem::identity(ctx);
    let z = GroupElem::zeta(ctx);
    // quasi-locality roots {1, -1} with multiplicity 2 (delta order 1).
    let roots = vec![id.clone(), id.clone(), z.clone(), z.clone()];
    let u0 = GeneratorIndex::simple("u0");
    let u1 = GeneratorIndex::simple("u1");
    let r =
        check_phi_associativity(&ind, &env, &u0, &id, &u1, &id, &roots, 3, (-3, 3)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}
