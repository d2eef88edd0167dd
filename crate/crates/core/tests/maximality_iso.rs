//! Maximality certificates, mutation detection, and the stated window
//! isomorphisms for the built-in families.

use std::sync::Arc;

use qvla::currents::GeneratorIndex;
use qvla::examples::*;
use qvla::qvla::checks::{check_lie_axioms_sampled, check_maximality, CheckWindow};
use qvla::qvla::{FamilySchema, ParamRange, Qvla};

fn w(param: i64, mode: i64, group: i64) -> CheckWindow {
    CheckWindow { param, mode, group }
}

#[test]
fn maximality_passes_for_all_families() {
    let cases: Vec<(Qvla, CheckWindow)> = vec![
        (
            twisted_affine(&FiniteLieData::sl2_chevalley(), 0).unwrap(),
            w(1, 3, 2),
        ),
        (
            quantum_torus(&QuantumTorusData::generic(2, 1), 0).unwrap(),
            w(1, 2, 1),
        ),
        (q_heisenberg(), w(1, 3, 2)),
        (virasoro_like(), w(2, 3, 1)),
        (klein_bottle(), w(2, 3, 1)),
    ];
    for (q, win) in cases {
        let r = check_maximality(&q, &win).unwrap();
        assert!(r.is_pass(), "maximality failed for {}:\n{}", q.name, r.render_text());
    }
}

/// Scalar-linearity mutation: a duplicated current family with no relation
/// tying it to the original produces a rank surplus.
#[test]
fn vlike_without_linearity_relations_has_rank_surplus() {
    let v = virasoro_like();
    let base = v.structure.clone();
    let ctx = v.ctx.clone();
    let mut families = v.families.clone();
    families.push(FamilySchema {
        name: "M".into(),
        central: false,
        params: vec![ParamRange::Window],
    });
    // M[m] behaves exactly like 2*L[m] but no relation links them.
    let structure: qvla::qvla::StructureFn = Arc::new(move |a, b| {
        let to_l = |g: &GeneratorIndex| -> (GeneratorIndex, i64) {
            if g.family == "M" {
                (GeneratorIndex::new("L", g.params.clone()), 2)
            } else {
                (g.clone(), 1)
            }
        };
        let (la, fa) = to_l(a);
        let (lb, fb) = to_l(b);
        let mut entries = base(&la, &lb);
        let f = qvla::scalars::Scalar::from_i64(&ctx, fa * fb);
        for e in entries.iter_mut() {
            for (mu, _) in e.value.iter_mut() {
                *mu = mu.mul(&f);
            }
        }
        entries
    });
    let ctx2 = v.ctx.clone();
    let base_basis = v.g_basis.clone();
    // The presented algebra is unchanged: M(m) maps to 2 L(m).
    let g_basis: qvla::qvla::GBasisFn = Arc::new(move |g, m| {
        if g.family == "M" {
            vec![(
                qvla::scalars::Scalar::from_i64(&ctx2, 2),
                GeneratorIndex::new("L", g.params.clone()),
                m,
            )]
        } else {
            base_basis(g, m)
        }
    });
    let mutated = Qvla {
        families,
        structure,
        g_basis,
        ..v
    };
    let r = check_maximality(&mutated, &w(1, 2, 1)).unwrap();
    assert!(!r.is_pass(), "rank surplus should be detected:\n{}", r.render_text());
    assert!(r.render_text().contains("surplus"));
}

/// Dropping the central-constancy collapse (c^alpha decoupled from c^1)
/// breaks injectivity of the reconstruction map.
#[test]
fn qheis_without_central_collapse_fails_injectivity() {
    let h = q_heisenberg();
    let mut families = h.families.clone();
    for f in families.iter_mut() {
        if f.name == "c" {
            f.central = false;
        }
    }
    let mutated = Qvla { families, ..h };
    let r = check_maximality(&mutated, &w(1, 2, 1)).unwrap();
    assert!(
        !r.is_pass(),
        "missing central relations should fail:\n{}",
        r.render_text()
    );
}

#[test]
fn lie_axioms_sampled_for_qheis_and_klein() {
    for q in [q_heisenberg(), klein_bottle()] {
        for zeta in [0i64, 1, 2] {
            let r = check_lie_axioms_sampled(&q, zeta, &w(2, 2, 1), 30, 20).unwrap();
            assert!(r.is_pass(), "{} zeta={}:\n{}", q.name, zeta, r.render_text());
        }
    }
}

#[test]
fn iso_qheis_window() {
    let r = check_example_isomorphism(IsoWhich::QHeis, 0, &w(1, 2, 1)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn iso_vlike_window() {
    let r = check_example_isomorphism(IsoWhich::VLike, 0, &w(2, 2, 1)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}

#[test]
fn iso_klein_windows() {
    for zeta in [0i64, 1] {
        let r = check_example_isomorphism(IsoWhich::Klein, zeta, &w(2, 2, 1)).unwrap();
        assert!(r.is_pass(), "zeta={}:\n{}", zeta, r.render_text());
    }
}

#[test]
fn iso_affine_windows() {
    for zeta in [0i64, 1] {
        let r = check_example_isomorphism(IsoWhich::Affine, zeta, &w(1, 2, 1)).unwrap();
        assert!(r.is_pass(), "zeta={}:\n{}", zeta, r.render_text());
    }
}

#[test]
fn iso_qtorus_window() {
    let r = check_example_isomorphism(IsoWhich::QTorus, 0, &w(1, 1, 1)).unwrap();
    assert!(r.is_pass(), "{}", r.render_text());
}
