mod common;

use common::{ctx, rel, series};
use num_complex::Complex64;
use proptest::prelude::*;

use qplane::qcalc::{lattice_point, QLattice};
use qplane::qspecial::{
    bessel_j, bessel_j_at, bessel_j_order, estimate_c_q, fourier_bessel_matrix, green_g,
    helmholtz_residuals, neumann_n, spectral_green, Argument, Solution,
};
use qplane::verify::spectral_window;
use qplane::{GreenParams, PrecisionMode, QError};

#[test]
fn j_at_zero_is_one() {
    for q in [0.1, 0.5, 0.9] {
        assert_eq!(
            bessel_j(&ctx(q), 0.0).unwrap().value,
            Complex64::new(1.0, 0.0)
        );
    }
}

#[test]
fn j_matches_the_extended_oracle() {
    for q in [0.3, 0.5, 0.8] {
        let ctx = ctx(q);
        for x in [0.1, 0.5, 1.0, 2.5, 6.0] {
            let got = bessel_j(&ctx, x).unwrap();
            let (want, _) = series(q, x * x, 0.0);
            assert!(
                (got.value.re - want).abs() <= got.error_bound.max(4.0 * f64::EPSILON * want.abs()),
                "q={q} x={x}"
            );
        }
    }
}

#[test]
fn j_leading_order_near_zero() {
    let ctx = ctx(0.5);
    let x = 1e-4;
    let v = bessel_j(&ctx, x).unwrap().value.re;
    assert!(((1.0 - v) / (x * x) - 1.0).abs() < 1e-7);
}

#[test]
fn order_zero_is_the_plain_function() {
    let ctx = ctx(0.6);
    for x in [0.2, 1.3, 3.1] {
        assert_eq!(
            bessel_j_order(&ctx, 0, x).unwrap().value,
            bessel_j(&ctx, x).unwrap().value
        );
    }
}

#[test]
fn negative_arguments_are_rejected() {
    assert!(matches!(bessel_j(&ctx(0.5), -1.0), Err(QError::Domain(_))));
}

#[test]
fn neumann_matches_the_extended_oracle() {
    for q in [0.3, 0.5, 0.8] {
        let ctx = ctx(q);
        let params = GreenParams::new(&ctx, 0.37, 0.5772).unwrap();
        for rho in [0.05, 0.5, 1.0, 4.0, 20.0] {
            let got = neumann_n(&ctx, &params, rho).unwrap();
            let (_, want) = series(q, 0.37 * rho, 0.5772);
            assert!(
                (got.value.re - want).abs()
                    <= got
                        .error_bound
                        .max(8.0 * f64::EPSILON * want.abs().max(1.0)),
                "q={q} rho={rho}: {} vs {want}",
                got.value.re
            );
        }
    }
}

#[test]
fn neumann_is_affine_in_the_constant() {
    let ctx = ctx(0.5);
    let (p, rho) = (1.3, 0.7);
    let n0 = neumann_n(&ctx, &GreenParams::new(&ctx, p, 0.0).unwrap(), rho)
        .unwrap()
        .value
        .re;
    let n1 = neumann_n(&ctx, &GreenParams::new(&ctx, p, 1.0).unwrap(), rho)
        .unwrap()
        .value
        .re;
    let j = bessel_j_at(&ctx, 0, &Argument::Product { p, rho })
        .unwrap()
        .value
        .re;
    assert!(rel(n1 - n0, 2.0 * ctx.log_prefactor() * j) < 1e-12);
}

#[test]
fn green_is_neumann_minus_i_bessel() {
    let ctx = ctx(0.5);
    let params = GreenParams::new(&ctx, 0.8, 0.3).unwrap();
    for rho in [0.25, 1.0, 4.0] {
        let g = green_g(&ctx, &params, rho).unwrap();
        let n = neumann_n(&ctx, &params, rho).unwrap().value.re;
        let j = bessel_j_at(&ctx, 0, &Argument::Product { p: 0.8, rho })
            .unwrap()
            .value
            .re;
        assert_eq!(g, Complex64::new(n, -j));
    }
}

#[test]
fn homogeneous_solutions_satisfy_the_difference_equation() {
    let ctx = ctx(0.5);
    for which in [
        Solution::Bessel,
        Solution::Neumann { c_q: 0.0 },
        Solution::Neumann { c_q: 2.0 },
    ] {
        let worst = helmholtz_residuals(&ctx, which, 0.37, -20, 20)
            .unwrap()
            .iter()
            .map(|r| r.relative)
            .fold(0.0, f64::max);
        assert!(worst < 1e-30, "{which:?}: {worst:e}");
    }
}

#[test]
fn lattice_and_value_arguments_agree() {
    let ctx = ctx(0.5);
    for j in -4..6 {
        let a = bessel_j_at(&ctx, 0, &Argument::Lattice { p: 2.0, j })
            .unwrap()
            .value
            .re;
        let b = bessel_j_at(
            &ctx,
            0,
            &Argument::Product {
                p: 2.0,
                rho: lattice_point(&ctx, j),
            },
        )
        .unwrap()
        .value
        .re;
        assert!((a - b).abs() < 1e-14 * a.abs().max(1.0), "j = {j}");
    }
}

#[test]
fn extended_mode_agrees_with_double_mode() {
    let d = ctx(0.5);
    let e = ctx(0.5).with_precision(PrecisionMode::Extended);
    for x in [0.3, 2.0, 5.0] {
        let a = bessel_j(&d, x).unwrap();
        let b = bessel_j(&e, x).unwrap();
        assert!(b.extended);
        assert!((a.value.re - b.value.re).abs() <= a.error_bound + b.error_bound);
    }
}

#[test]
fn spectral_sum_is_real_off_resonance() {
    let ctx = ctx(0.5);
    let sp = spectral_window(&ctx, 0.0).unwrap();
    let params = GreenParams::new(&ctx, 0.37, 0.0).unwrap();
    for i in -1..=3 {
        let v = spectral_green(&ctx, &params, &sp, lattice_point(&ctx, 2 * i)).unwrap();
        assert_eq!(v.value.im, 0.0);
        assert!(v.value.re.is_finite());
    }
}

#[test]
fn spectral_sum_needs_epsilon_at_resonance() {
    let ctx = ctx(0.5);
    let a = ctx.bessel_scale();
    let params = GreenParams::new(&ctx, a * a * ctx.q2(), 0.0).unwrap();
    assert!(params.resonant(&ctx));
    let sp = spectral_window(&ctx, 0.0).unwrap();
    assert!(matches!(
        spectral_green(&ctx, &params, &sp, 1.0),
        Err(QError::InvalidParameter(_))
    ));
    let sp = spectral_window(&ctx, 1e-3).unwrap();
    assert!(spectral_green(&ctx, &params, &sp, 1.0).unwrap().value.im != 0.0);
}

#[test]
fn c_q_refit_is_consistent() {
    let ctx = ctx(0.5);
    let sp = spectral_window(&ctx, 0.0).unwrap();
    let grid: Vec<f64> = (-1..=4).map(|i| lattice_point(&ctx, 2 * i)).collect();
    let est = estimate_c_q(&ctx, &[0.37, 2.3], &grid, &sp, f64::INFINITY).unwrap();
    assert!(est.c_q.is_finite());
    assert_eq!(est.points.len(), 12);
    assert!(est.window_shift < 1e-8);
    let num: f64 = est
        .points
        .iter()
        .map(|pt| pt.slope * (pt.spectral.re - pt.model_at_zero.re))
        .sum();
    let den: f64 = est.points.iter().map(|pt| pt.slope * pt.slope).sum();
    assert!((num / den - est.c_q).abs() < 1e-10);
    assert!(matches!(
        estimate_c_q(&ctx, &[0.37], &grid, &sp, 1e-12),
        Err(QError::Calibration { .. })
    ));
}

#[test]
fn fourier_bessel_matrix_is_diagonal() {
    let ctx = ctx(0.5);
    let lat = QLattice::symmetric(&ctx, 60).unwrap();
    let m = fourier_bessel_matrix(&ctx, -3..=3, &lat, true).unwrap();
    for (a, row) in m.iter().enumerate() {
        let n = a as i64 - 3;
        let diag = row[a].value.re;
        assert!(
            rel(diag, (1.0 - ctx.q2()) * ctx.qpow(-2 * n)) < 1e-12,
            "n = {n}"
        );
        for (b, e) in row.iter().enumerate() {
            if a != b {
                assert!(e.value.norm() < 1e-12 * diag, "({a}, {b})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn negative_orders_reflect(q in 0.2f64..0.85, s in 1i64..5, x in 0.05f64..3.0) {
        let ctx = ctx(q);
        let lhs = bessel_j_order(&ctx, -s, x).unwrap();
        let inner = bessel_j_order(&ctx, s, ctx.qpow(s) * x).unwrap();
        let rhs = ctx.qpow(s) * inner.value.re;
        let tol = lhs.error_bound + ctx.qpow(s) * inner.error_bound + 1e-13 * lhs.value.re.abs().max(1e-300);
        prop_assert!((lhs.value.re - rhs).abs() <= tol.max(1e-15));
    }

    #[test]
    fn error_bound_covers_the_oracle(q in 0.2f64..0.9, x in 0.0f64..8.0) {
        let ctx = ctx(q);
        let got = bessel_j(&ctx, x).unwrap();
        let (want, _) = series(q, x * x, 0.0);
        prop_assert!((got.value.re - want).abs() <= got.error_bound.max(4.0 * f64::EPSILON * want.abs()));
    }

    #[test]
    fn green_imaginary_part_ignores_the_constant(c in -3.0f64..3.0, rho in 0.01f64..10.0) {
        let ctx = ctx(0.5);
        let a = green_g(&ctx, &GreenParams::new(&ctx, 0.9, c).unwrap(), rho).unwrap();
        let b = green_g(&ctx, &GreenParams::new(&ctx, 0.9, 0.0).unwrap(), rho).unwrap();
        prop_assert_eq!(a.im, b.im);
    }
}
