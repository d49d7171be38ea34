mod common;

use common::{ctx, series};
use num_complex::Complex64;
use proptest::prelude::*;

use qplane::eq2::{
    build_coproduct_ops, build_generators, casimir_displayed, casimir_l, casimir_l_magnitude,
    check_coproduct_relations, check_relations, normwise_residual, radius_operator, rep_l,
    rep_l_word, rep_l_word_magnitude, scalar_product_a, sigma_grades, Generator, GradedElement,
    PhaseParams, TruncatedBasis,
};
use qplane::qcalc::{box_op, lattice_point};
use qplane::{DecayClass, QLattice, RadialFunction};

fn radial(ctx: &qplane::QContext, lo: i64, hi: i64, f: impl Fn(f64) -> f64) -> RadialFunction {
    let lat = QLattice::new(ctx, lo, hi).unwrap();
    RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, f).unwrap()
}

#[test]
fn relations_hold_at_defaults() {
    let ctx = ctx(0.5);
    let basis = TruncatedBasis::new(40, 2).unwrap();
    let g = build_generators(basis, PhaseParams::default(), &ctx);
    let report = check_relations(&g, &ctx);
    assert_eq!(report.checks.len(), 4);
    assert!(report.pass(), "{report:?}");
    let small = TruncatedBasis::new(8, 2).unwrap();
    let c = build_coproduct_ops(small, PhaseParams::new(0.3, 1.1), &ctx);
    assert!(check_coproduct_relations(&c, &ctx).pass());
}

#[test]
fn shift_drops_the_last_basis_vector() {
    let ctx = ctx(0.5);
    let basis = TruncatedBasis::new(5, 1).unwrap();
    let g = build_generators(basis, PhaseParams::default(), &ctx);
    let vv = g.v_star.mul(&g.v).unwrap();
    assert_eq!(vv.get(10, 10), Complex64::new(0.0, 0.0));
    assert_eq!(vv.get(3, 3), Complex64::new(1.0, 0.0));
}

#[test]
fn basis_rejects_bad_margins() {
    assert!(TruncatedBasis::new(3, 0).is_err());
    assert!(TruncatedBasis::new(3, 4).is_err());
}

#[test]
fn radius_operator_is_self_adjoint() {
    let ctx = ctx(0.6);
    let basis = TruncatedBasis::new(6, 1).unwrap();
    let r = radius_operator(basis, PhaseParams::new(0.4, 2.0), &ctx);
    let d = r.sub(&r.adjoint()).unwrap();
    assert!(d.inf_norm() <= 4.0 * f64::EPSILON * r.inf_norm());
}

#[test]
fn indicator_has_weight_one_minus_q_squared() {
    let ctx = ctx(0.5);
    let basis = TruncatedBasis::new(10, 1).unwrap();
    let lat = QLattice::symmetric(&ctx, 10).unwrap();
    let ind = GradedElement::radial(RadialFunction::indicator(&lat, 0).unwrap());
    let op = ind.realize(&ctx, basis, PhaseParams::default()).unwrap();
    let w = scalar_product_a(&ctx, basis, &op, &op).unwrap();
    assert_eq!(w.value, Complex64::new(0.75, 0.0));
}

#[test]
fn kappa_fixes_radial_elements() {
    let ctx = ctx(0.5);
    let e = GradedElement::radial(radial(&ctx, -5, 20, |r| (-r).exp()));
    assert_eq!(rep_l(&ctx, Generator::Kappa, &e).unwrap(), e);
    assert_eq!(rep_l(&ctx, Generator::KappaInv, &e).unwrap(), e);
}

#[test]
fn kappa_words_cancel() {
    let ctx = ctx(0.5);
    let e = GradedElement::component(2, -1, radial(&ctx, -5, 20, |r| r.sqrt()));
    let back = rep_l_word(&ctx, &[Generator::Kappa, Generator::KappaInv], &e).unwrap();
    let scale = rep_l_word_magnitude(&ctx, &[Generator::Kappa, Generator::KappaInv], &e).unwrap();
    assert!(normwise_residual(&back, &e, &scale) <= 4.0 * f64::EPSILON);
}

#[test]
fn casimir_of_rho_is_one() {
    let ctx = ctx(0.5);
    let e = GradedElement::radial(radial(&ctx, -10, 10, |r| r));
    let c = casimir_l(&ctx, &e).unwrap();
    let one = GradedElement::radial(radial(&ctx, -10, 10, |_| 1.0));
    let scale = casimir_l_magnitude(&ctx, &e).unwrap();
    assert!(normwise_residual(&c, &one, &scale) <= 16.0 * f64::EPSILON);
}

#[test]
fn casimir_is_box_on_radial_elements() {
    let ctx = ctx(0.7);
    let g = radial(&ctx, -12, 40, |r| (-r).exp() * (1.0 + r));
    let c = casimir_l(&ctx, &GradedElement::radial(g.clone())).unwrap();
    let b = GradedElement::radial(box_op(&ctx, &g).unwrap());
    let scale = casimir_l_magnitude(&ctx, &GradedElement::radial(g)).unwrap();
    assert!(normwise_residual(&c, &b, &scale) <= 16.0 * f64::EPSILON);
}

#[test]
fn bessel_function_is_a_casimir_eigenvector() {
    let ctx = ctx(0.5);
    let p = 0.37;
    let lat = QLattice::new(&ctx, -6, 30).unwrap();
    let g = RadialFunction::from_fn(&lat, DecayClass::Unrestricted, |j, _| {
        Complex64::new(series(0.5, p * lattice_point(&ctx, j), 0.0).0, 0.0)
    })
    .unwrap();
    let e = GradedElement::radial(g);
    let c = casimir_l(&ctx, &e).unwrap();
    let want = e.scale(Complex64::new(-p, 0.0));
    let scale = casimir_l_magnitude(&ctx, &e).unwrap();
    assert!(normwise_residual(&c, &want, &scale) <= 16.0 * f64::EPSILON);
}

#[test]
fn casimir_commutes_with_the_generators() {
    let ctx = ctx(0.5);
    let e = GradedElement::component(1, 2, radial(&ctx, -15, 25, |r| (-r).exp()));
    for g in [Generator::P, Generator::PStar, Generator::Kappa] {
        let c_then_g = rep_l(&ctx, g, &casimir_l(&ctx, &e).unwrap()).unwrap();
        let g_then_c = casimir_l(&ctx, &rep_l(&ctx, g, &e).unwrap()).unwrap();
        let s1 = rep_l_word_magnitude(
            &ctx,
            &[g, Generator::KappaInv, Generator::P, Generator::PStar],
            &e,
        )
        .unwrap();
        let s2 = rep_l_word_magnitude(
            &ctx,
            &[Generator::KappaInv, Generator::P, Generator::PStar, g],
            &e,
        )
        .unwrap();
        let scale = s1.add(&s2).unwrap();
        assert!(
            normwise_residual(&c_then_g, &g_then_c, &scale) <= 64.0 * f64::EPSILON,
            "{g:?}"
        );
    }
}

#[test]
fn projections_keep_the_right_grades() {
    let ctx = ctx(0.5);
    let g = radial(&ctx, -4, 4, |r| r);
    let mut e = GradedElement::new();
    for (m, j) in [(0, 0), (1, 1), (1, 0), (-2, -2), (0, 3)] {
        e.insert_add(m, j, g.clone()).unwrap();
    }
    let b: Vec<_> = e.project_b().components().map(|(k, _)| *k).collect();
    assert_eq!(b, vec![(-2, -2), (0, 0), (1, 1)]);
    let h: Vec<_> = e.project_h().components().map(|(k, _)| *k).collect();
    assert_eq!(h, vec![(0, 0)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relations_hold_for_any_phase(q in 0.05f64..0.95, psi in 0.0f64..7.0, phi in 0.0f64..7.0, l in 12i64..30) {
        let ctx = ctx(q);
        let basis = TruncatedBasis::new(l, 2).unwrap();
        let report = check_relations(&build_generators(basis, PhaseParams::new(psi, phi), &ctx), &ctx);
        prop_assert!(report.pass(), "{:?}", report);
    }

    #[test]
    fn composed_and_displayed_casimir_agree(q in 0.2f64..0.9, m in -3i64..4, j in -3i64..4) {
        let ctx = ctx(q);
        let e = GradedElement::component(m, j, radial(&ctx, -10, 30, |r| (-r).exp() + r.sqrt()));
        let a = casimir_l(&ctx, &e).unwrap();
        let b = casimir_displayed(&ctx, &e).unwrap();
        let scale = casimir_l_magnitude(&ctx, &e).unwrap();
        prop_assert!(normwise_residual(&a, &b, &scale) <= 32.0 * f64::EPSILON);
    }

    #[test]
    fn twists_are_unitary_and_commute_with_projection(t1 in -4.0f64..4.0, t2 in -4.0f64..4.0) {
        let ctx = ctx(0.5);
        let g = radial(&ctx, -3, 3, |r| 1.0 + r);
        let mut e = GradedElement::new();
        for (m, j) in [(0, 0), (1, 1), (2, -1)] {
            e.insert_add(m, j, g.clone()).unwrap();
        }
        let t = e.twist(t1, t2);
        prop_assert_eq!(t.project_h(), e.project_h());
        prop_assert_eq!(t.project_b(), e.project_b().twist(t1, t2));
        for ((&(m, j), a), (_, b)) in t.components().zip(e.components()) {
            let (g1, g2) = sigma_grades(m, j);
            for i in -3..=3 {
                let phase = Complex64::from_polar(1.0, t1 * g1 as f64 + t2 * g2 as f64);
                prop_assert!((a.at(i).unwrap() - b.at(i).unwrap() * phase).norm() <= 4.0 * f64::EPSILON * 8.0);
            }
        }
    }
}
