mod common;

use common::{ctx, rel};
use num_complex::Complex64;
use proptest::prelude::*;

use qplane::corpus::{corpus, TestFunction};
use qplane::qcalc::{
    box_op, box_stencil, d_minus, d_plus, delta_pairing, estimate_zero_limit, jackson_integral,
    lattice_point, pairing_h, q_factorial, q_number, weak_box_pairing,
};
use qplane::verify::radial_window;
use qplane::{DecayClass, QError, QLattice, RadialFunction};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn q_number_examples() {
    let ctx = ctx(0.5);
    assert_eq!(q_number(&ctx, 1), 1.0);
    assert!(rel(q_number(&ctx, 2), 2.5) < 1e-15);
    assert!(rel(q_number(&ctx, 3), 5.25) < 1e-15);
    assert_eq!(q_factorial(&ctx, 0).unwrap(), 1.0);
    assert!(rel(q_factorial(&ctx, 2).unwrap(), 2.5) < 1e-15);
    assert!(rel(q_factorial(&ctx, 3).unwrap(), 1.0 * 2.5 * 5.25) < 1e-15);
    assert!(matches!(q_factorial(&ctx, -1), Err(QError::Domain(_))));
}

#[test]
fn jackson_examples() {
    let ctx = ctx(0.5);
    let lat = QLattice::new(&ctx, -10, 80).unwrap();
    let ind = RadialFunction::indicator(&lat, 0).unwrap();
    assert_eq!(jackson_integral(&ctx, &ind).unwrap().value, c(1.0 - 0.25));
    assert_eq!(pairing_h(&ctx, &ind, &ind).unwrap().value, c(1.0 - 0.25));

    let f = RadialFunction::from_fn(&lat, DecayClass::CompactSupport, |j, r| {
        c(if j >= 0 { r } else { 0.0 })
    })
    .unwrap();
    assert!(rel(jackson_integral(&ctx, &f).unwrap().value.re, 0.8) < 1e-15);
}

#[test]
fn real_functions_pair_to_real_values() {
    let ctx = ctx(0.7);
    let lat = radial_window(&ctx, 800.0, 1e-17).unwrap();
    let fs: Vec<_> = corpus()
        .iter()
        .map(|f| f.sample(&ctx, &lat).unwrap())
        .collect();
    for f in &fs {
        for g in &fs {
            assert_eq!(pairing_h(&ctx, f, g).unwrap().value.im, 0.0);
        }
    }
}

#[test]
fn difference_operator_examples() {
    let ctx = ctx(0.5);
    let lat = QLattice::new(&ctx, -6, 6).unwrap();
    let one = RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |_| 1.0).unwrap();
    let rho = RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |r| r).unwrap();
    let rho2 = RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |r| r * r).unwrap();
    for v in d_plus(&ctx, &one).unwrap().samples() {
        assert_eq!(*v, c(0.0));
    }
    for v in d_plus(&ctx, &rho)
        .unwrap()
        .samples()
        .iter()
        .chain(d_minus(&ctx, &rho).unwrap().samples())
    {
        assert!((v - c(1.0)).norm() < 1e-14);
    }
    let d = d_plus(&ctx, &rho2).unwrap();
    for (j, r) in d.lattice().iter() {
        assert!(rel(d.at(j).unwrap().re, 1.25 * r) < 1e-14);
    }
    for v in box_op(&ctx, &one).unwrap().samples() {
        assert_eq!(*v, c(0.0));
    }
    for v in box_op(&ctx, &rho).unwrap().samples() {
        assert!((v - c(1.0)).norm() < 1e-14);
    }
}

#[test]
fn box_acts_on_j_as_minus_p() {
    let ctx = ctx(0.5);
    let p = 0.37;
    let lat = QLattice::new(&ctx, -6, 30).unwrap();
    let f = RadialFunction::from_fn(&lat, DecayClass::Unrestricted, |j, _| {
        c(common::series(0.5, p * lattice_point(&ctx, j), 0.0).0)
    })
    .unwrap();
    let b = box_op(&ctx, &f).unwrap();
    let q2 = ctx.q2();
    for (j, rho) in b.lattice().iter() {
        let want = -p * f.at(j).unwrap().re;
        let m = |k: i64| f.at(k).unwrap().norm();
        let cancellation = q2 * (m(j - 1) + 2.0 * m(j) + m(j + 1)) / ((1.0 - q2).powi(2) * rho);
        let bound = 8.0 * f64::EPSILON * cancellation + 1e-14;
        assert!((b.at(j).unwrap().re - want).abs() < bound, "j = {j}");
    }
}

#[test]
fn delta_pairing_examples() {
    let ctx = ctx(0.5);
    let lat = QLattice::new(&ctx, -4, 40).unwrap();
    let rho = RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |r| r).unwrap();
    assert!(delta_pairing(&ctx, &rho).unwrap().norm() < 1e-20);
    let one =
        RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |r| r * 0.0 + 7.0).unwrap();
    assert_eq!(
        delta_pairing(&ctx, &one.with_zero_limit(c(1.0))).unwrap(),
        c(1.0)
    );
    let j = RadialFunction::from_fn(&lat, DecayClass::Unrestricted, |j, _| {
        c(common::series(0.5, 2.0 * lattice_point(&ctx, j), 0.0).0)
    })
    .unwrap();
    assert!((delta_pairing(&ctx, &j).unwrap() - c(1.0)).norm() < 1e-14);
}

#[test]
fn zero_limit_rejects_non_contracting_samples() {
    let ctx = ctx(0.5);
    let lat = QLattice::new(&ctx, 0, 10).unwrap();
    let f = RadialFunction::from_fn(&lat, DecayClass::Unrestricted, |j, _| c(j as f64)).unwrap();
    assert!(matches!(
        estimate_zero_limit(&ctx, &f),
        Err(QError::Extrapolation(_))
    ));
}

#[test]
fn log_pairing_gives_the_delta_factor() {
    let ctx = ctx(0.5);
    let factor = (2.0 * 0.5 * 0.5f64.ln()) / (0.5 - 2.0);
    assert!((factor - 0.462_098_12).abs() < 1e-8);
    let lat = radial_window(&ctx, 800.0, 1e-17).unwrap();
    let g = RadialFunction::log_rho(&ctx, &lat).unwrap();
    for (f, want) in [
        (TestFunction::PowerExp { k: 0 }, factor),
        (TestFunction::PowerExp { k: 1 }, 0.0),
        (TestFunction::BesselCutoff { p: 1.0 }, factor),
    ] {
        let w = weak_box_pairing(&ctx, &g, &f.sample(&ctx, &lat).unwrap()).unwrap();
        assert!(
            (w.value.re - want).abs() <= w.truncation_estimate.max(1e-8),
            "{}",
            f.name()
        );
    }
}

#[test]
fn neighbouring_lattice_points_differ_by_q_squared() {
    let ctx = ctx(0.3);
    for j in -50..50 {
        assert!(
            rel(
                lattice_point(&ctx, j + 1),
                lattice_point(&ctx, j) * ctx.q2()
            ) < 4.0 * f64::EPSILON,
            "j = {j}"
        );
    }
}

fn q_strategy() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_numbers_are_odd_and_positive(q in q_strategy(), m in 1i64..40) {
        let ctx = ctx(q);
        prop_assert!(q_number(&ctx, m) > 0.0);
        prop_assert_eq!(q_number(&ctx, -m), -q_number(&ctx, m));
        prop_assert_eq!(q_number(&ctx, 0), 0.0);
    }

    #[test]
    fn single_point_jackson_integral_is_exact(q in q_strategy(), j in -30i64..30) {
        let ctx = ctx(q);
        let lat = QLattice::new(&ctx, j - 3, j + 3).unwrap();
        let f = RadialFunction::indicator(&lat, j).unwrap();
        prop_assert_eq!(jackson_integral(&ctx, &f).unwrap().value, c((1.0 - ctx.q2()) * lattice_point(&ctx, j)));
    }

    #[test]
    fn box_composition_matches_stencil(q in q_strategy(), pick in 0usize..5) {
        let ctx = ctx(q);
        let lat = radial_window(&ctx, 800.0, 1e-17).unwrap();
        let f = corpus()[pick].sample(&ctx, &lat).unwrap();
        let a = box_op(&ctx, &f).unwrap();
        let b = box_stencil(&ctx, &f).unwrap();
        let denom = (1.0 - ctx.q2()) * (1.0 / ctx.q2() - 1.0);
        for (j, rho) in a.lattice().iter() {
            let m = |k: i64| f.at(k).unwrap().norm();
            let scale = (m(j - 1) + 2.0 * m(j) + m(j + 1)) / (denom * rho);
            prop_assert!((a.at(j).unwrap() - b.at(j).unwrap()).norm() <= 8.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn box_is_symmetric_on_compact_support(q in 0.3f64..0.9, w1 in 0.5f64..8.0, w2 in 0.5f64..8.0) {
        let ctx = ctx(q);
        let lat = radial_window(&ctx, 50.0, 1e-17).unwrap();
        let f = TestFunction::Bump { width: w1 }.sample(&ctx, &lat).unwrap();
        let g = TestFunction::Bump { width: w2 }.sample(&ctx, &lat).unwrap();
        let bf = box_op(&ctx, &f).unwrap();
        let bg = box_op(&ctx, &g).unwrap();
        let (lo, hi) = (bf.lattice().j_min(), bf.lattice().j_max());
        let x = pairing_h(&ctx, &bf, &g.restrict(lo, hi).unwrap()).unwrap();
        let y = pairing_h(&ctx, &f.restrict(lo, hi).unwrap(), &bg).unwrap();
        let bound = x.truncation_estimate + y.truncation_estimate + 1e-12 * x.value.norm().max(1.0);
        prop_assert!((x.value - y.value).norm() <= bound);
    }

    #[test]
    fn q_taylor_tail_vanishes(q in 0.2f64..0.9, pick in 0usize..4) {
        let ctx = ctx(q);
        let f = corpus()[pick];
        let tail = |n: i64| {
            let a = f.eval(&ctx, lattice_point(&ctx, n + 1)).unwrap();
            let b = f.eval(&ctx, lattice_point(&ctx, n)).unwrap();
            (n as f64 * (a - b)).abs()
        };
        let n0 = 10;
        let n1 = n0 + (30.0 / -ctx.ln_q()).ceil() as i64;
        prop_assert!(tail(n1) <= tail(n0).max(1e-300) * 1e-6 || tail(n1) < 1e-12);
    }
}
