//! Enveloping vertex algebra: normal ordering, vertex coefficients, group
//! action and the axiom suites for the q-Heisenberg and twisted sl2 cases.

use qvla::currents::GeneratorIndex;
use qvla::enveloping::*;
use qvla::examples::{q_heisenberg, twisted_affine, virasoro_like, FiniteLieData};
use qvla::qvla::{Mode, ParamRange, Qvla};
use qvla::scalars::{GroupElem, Scalar};

fn qh() -> Qvla {
    q_heisenberg()
}

#[test]
fn annihilator_kills_vacuum() {
    let q = qh();
    let env = Enveloper::new(&q);
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(&q.ctx);
    let v = env.normal_order(&[Mode::new(a, id, 0)]).unwrap();
    assert!(v.is_zero());
}

#[test]
fn qheis_one_bracket_step() {
    // a^{1,0}(1) a^{q,0}(-2)|0> = [a^{1,0}(1), a^{q,0}(-2)]|0>, a central
    // multiple of the vacuum... the zeta=0 bracket vanishes unless the mode
    // sum is -1, so here it is the central mode at -1 times the bracket value
    // only when 1 + (-2) + 1 = 0. For m=1, n=-2: m+n+1 = 0, scale ratio
    // 1*q^-1... alpha beta^-1 = q^-1, so the bracket is -1/(q-q^-1) c(-1).
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let c = GeneratorIndex::simple("c");
    let id = GroupElem::identity(ctx);
    let qq = GroupElem::param(ctx, 0);
    let v = env
        .normal_order(&[Mode::new(a.clone(), id.clone(), 1), Mode::new(a, qq, -2)])
        .unwrap();
    let denom = Scalar::param_pow(ctx, 0, 1)
        .sub(&Scalar::param_pow(ctx, 0, -1))
        .inv()
        .unwrap();
    let mut expect = PbwVector::zero();
    expect.add_term(
        Monomial(vec![Mode::new(c, id, -1)]),
        denom.neg(),
    );
    assert_eq!(v, expect);
}

#[test]
fn commuting_creations_reorder_without_correction() {
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let m1 = Mode::new(a.clone(), id.clone(), -1);
    let m3 = Mode::new(a, id, -3);
    // a(-1)a(-3)|0> brackets vanish (mode sum -4 != -1): pure swap.
    let v = env.normal_order(&[m1.clone(), m3.clone()]).unwrap();
    let mut expect = PbwVector::zero();
    expect.add_term(Monomial(vec![m3, m1]), Scalar::one(ctx));
    assert_eq!(v, expect);
}

#[test]
fn rho_mode_values() {
    let q = qh();
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    // n=0: identity
    let r0 = rho_mode(&q, 0, &a, &id, 5).unwrap();
    assert_eq!(r0.terms.len(), 1);
    assert!(r0
        .terms
        .get(&Mode::new(a.clone(), id.clone(), 5))
        .unwrap()
        .is_one());
    // n=1: -m a(m-1)
    let r1 = rho_mode(&q, 1, &a, &id, 4).unwrap();
    assert_eq!(
        r1.terms.get(&Mode::new(a.clone(), id.clone(), 3)).unwrap(),
        &Scalar::from_i64(ctx, -4)
    );
    // n=2, m=-1: 2 binom(-1,2) a(-3) = 2 a(-3)
    let r2 = rho_mode(&q, 2, &a, &id, -1).unwrap();
    assert_eq!(
        r2.terms.get(&Mode::new(a, id, -3)).unwrap(),
        &Scalar::from_i64(ctx, 2)
    );
}

#[test]
fn creation_axiom_on_generators() {
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let qq = GroupElem::param(ctx, 0);
    let v = env.generator_vector(&a, &qq).unwrap();
    let vac = PbwVector::vacuum(&q);
    assert_eq!(env.vertex_coefficient(&v, -1, &vac).unwrap(), v);
    assert!(env.vertex_coefficient(&v, 0, &vac).unwrap().is_zero());
}

#[test]
fn qheis_generator_product_is_central() {
    // (a^{1,0})_1 a^{q,0} = [a^{1,0}(1), a^{q,0}(-1)]|0>.
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let qq = GroupElem::param(ctx, 0);
    let u = env.generator_vector(&a, &id).unwrap();
    let v = env.generator_vector(&a, &qq).unwrap();
    for i in [0i64, 1] {
        let got = env.vertex_coefficient(&u, i, &v).unwrap();
        let expect = {
            let b = qvla::qvla::brackets::zeta_mode_bracket(
                &q,
                0,
                &Mode::new(a.clone(), id.clone(), i),
                &Mode::new(a.clone(), qq.clone(), -1),
            )
            .unwrap();
            env.apply_elem(&b, &PbwVector::vacuum(&q)).unwrap()
        };
        assert_eq!(got, expect, "index {}", i);
        // the zeta=0 bracket supports only mode sum -1: nonzero iff i = 0
        assert_eq!(got.is_zero(), i != 0);
    }
}

#[test]
fn r_action_on_generators_and_deeper_modes() {
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let eps = q.epsilon; // 1
    assert_eq!(eps, 1);
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let qq = GroupElem::param(ctx, 0);
    // R_lam(a^{al,0}) = a^{al lam^-1,0}; with eps = 1 no scalar factor.
    let v = env.generator_vector(&a, &id).unwrap();
    let rv = env.r_action(&qq, &v).unwrap();
    assert_eq!(rv, env.generator_vector(&a, &qq.inv(ctx)).unwrap());
    // Vacuum fixed.
    let vac = PbwVector::vacuum(&q);
    assert_eq!(env.r_action(&qq, &vac).unwrap(), vac);
}

#[test]
fn r_action_weight_for_eps_zero() {
    // Twisted affine at eps=0: R_lam(a^{al,0}(-2)|0>) = lam^{-(eps-1)} ... =
    // lam^{(m+1)(eps-1)} with m=-2: lam^{1} a^{al lam^-1}(-2)|0>.
    let data = FiniteLieData::sl2_chevalley();
    let af = twisted_affine(&data, 0).unwrap();
    let env = Enveloper::new(&af);
    let ctx = &af.ctx;
    let z = GroupElem::zeta(ctx);
    let u1 = GeneratorIndex::simple("u1"); // grade 1 family
    let id = GroupElem::identity(ctx);
    let v = env
        .normal_order(&[Mode::new(u1.clone(), id.clone(), -2)])
        .unwrap();
    let rv = env.r_action(&z, &v).unwrap();
    // a^{zeta^-1,0}(-2) reduces by the relation to zeta^{k-eps+1}... compute
    // both sides through normal_order for the expected value.
    let expected = env
        .normal_order(&[Mode::new(u1, z.inv(ctx), -2)])
        .unwrap()
        .scale(&Scalar::zeta_pow(ctx, -1));
    assert_eq!(rv, expected);
}

#[test]
fn graded_dimension_counts() {
    // Heisenberg-type with one effective generator and no central term:
    // partitions of d.
    let ctx = qvla::scalars::FieldSpec::new(1, 0).unwrap();
    let abelian = Qvla {
        name: "abelian-rank1".into(),
        epsilon: 1,
        ctx: ctx.clone(),
        families: vec![qvla::qvla::FamilySchema {
            name: "a".into(),
            central: false,
            params: vec![],
        }],
        gamma_generators: vec![],
        maximal_declared: true,
        structure: std::sync::Arc::new(|_, _| Vec::new()),
        relations: std::sync::Arc::new(|_| Vec::new()),
        g_basis: {
            let ctx = ctx.clone();
            std::sync::Arc::new(move |g, m| vec![(Scalar::one(&ctx), g.clone(), m)])
        },
    };
    assert_eq!(graded_dimension(&abelian, 0).unwrap(), Some(1));
    assert_eq!(graded_dimension(&abelian, 3).unwrap(), Some(3));
    assert_eq!(graded_dimension(&abelian, 5).unwrap(), Some(7));
    // Virasoro-like: infinitely many families per degree.
    assert_eq!(graded_dimension(&virasoro_like(), 2).unwrap(), None);
    // q-Heisenberg: infinite group orbit.
    assert_eq!(graded_dimension(&q_heisenberg(), 2).unwrap(), None);
    // Twisted affine sl2: finite; degree 1 = 3 eigenvectors + central = 4.
    let af = twisted_affine(&FiniteLieData::sl2_chevalley(), 0).unwrap();
    assert_eq!(graded_dimension(&af, 0).unwrap(), Some(1));
    assert_eq!(graded_dimension(&af, 1).unwrap(), Some(4));
}

#[test]
fn vertex_axioms_qheis() {
    let q = qh();
    let env = Enveloper::new(&q);
    let samples = default_samples(&env, 1, 3, 2).unwrap();
    let r = check_vertex_axioms(&env, &samples).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn vertex_axioms_twisted_sl2() {
    let data = FiniteLieData::sl2_chevalley();
    let af = twisted_affine(&data, 0).unwrap();
    let env = Enveloper::new(&af);
    let samples = default_samples(&env, 1, 3, 2).unwrap();
    let r = check_vertex_axioms(&env, &samples).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn gamma_epsilon_axiom_both() {
    let q = qh();
    let env = Enveloper::new(&q);
    let samples = default_samples(&env, 1, 2, 2).unwrap();
    let lams = vec![
        GroupElem::identity(&q.ctx),
        GroupElem::param(&q.ctx, 0),
    ];
    let r = check_gamma_epsilon_axiom(&env, &samples, &lams).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
    let rg = check_r_group_action(&env, &samples, &lams).unwrap();
    assert!(rg.is_pass(), "{}", rg.render_text());

    let data = FiniteLieData::sl2_chevalley();
    let af = twisted_affine(&data, 0).unwrap();
    let env2 = Enveloper::new(&af);
    let samples2 = default_samples(&env2, 1, 2, 2).unwrap();
    let lams2 = vec![GroupElem::identity(&af.ctx), GroupElem::zeta(&af.ctx)];
    let r2 = check_gamma_epsilon_axiom(&env2, &samples2, &lams2).unwrap();
    assert!(r2.is_pass(), "{}", r2.render_text());
}

#[test]
fn restrictedness_bound_holds() {
    let q = qh();
    let env = Enveloper::new(&q);
    let ctx = &q.ctx;
    let a = GeneratorIndex::simple("a");
    let id = GroupElem::identity(ctx);
    let m1 = Mode::new(a.clone(), id.clone(), -1);
    let m2 = Mode::new(a.clone(), id.clone(), -2);
    let w = env.normal_order(&[m2, m1]).unwrap();
    let bound = env.annihilation_bound(w.degree());
    for n in bound..bound + 3 {
        let r = env
            .apply_mode(&Mode::new(a.clone(), id.clone(), n), &w)
            .unwrap();
        assert!(r.is_zero(), "a({}) should annihilate degree-3 vector", n);
    }
}

/// Normal ordering is independent of the input word order up to the bracket
/// corrections (diamond property on samples).
#[test]
fn normal_order_diamond() {
    let data = FiniteLieData::sl2_chevalley();
    let af = twisted_affine(&data, 0).unwrap();
    let env = Enveloper::new(&af);
    let ctx = &af.ctx;
    let id = GroupElem::identity(ctx);
    let gens: Vec<GeneratorIndex> = ["u0", "u1", "u2"]
        .iter()
        .map(|s| GeneratorIndex::simple(s))
        .collect();
    let modes: Vec<Mode> = vec![
        Mode::new(gens[0].clone(), id.clone(), -1),
        Mode::new(gens[1].clone(), id.clone(), -2),
        Mode::new(gens[2].clone(), id.clone(), 1),
    ];
    // All 6 permutations of a 3-letter word, reassembled through the
    // commutator corrections pairwise, must give consistent results:
    // w = x y z and its transpositions differ by bracket terms; check
    // x y z = y x z + [x,y] z as vectors.
    let x = &modes[0];
    let y = &modes[1];
    let z = &modes[2];
    let xyz = env
        .normal_order(&[x.clone(), y.clone(), z.clone()])
        .unwrap();
    let yxz = env
        .normal_order(&[y.clone(), x.clone(), z.clone()])
        .unwrap();
    let br = qvla::qvla::brackets::zeta_mode_bracket(&af, 0, x, y).unwrap();
    let mut corr = PbwVector::zero();
    for (bm, bc) in &br.terms {
        let t = env.normal_order(&[bm.clone(), z.clone()]).unwrap();
        corr = corr.add(&t.scale(bc));
    }
    assert_eq!(xyz, yxz.add(&corr));
}

#[test]
fn param_range_probe() {
    // keep ParamRange referenced from this test crate
    let _ = ParamRange::Fixed(0, 1);
}
