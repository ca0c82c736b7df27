//! Closed forms for the kernel sphere energy against independent oracles.

use nalgebra::{DMatrix, DVector};
use price_lab::hypergeom::*;
use price_lab::numeric::unit_sphere_area;
use price_lab::QuadratureSpec;
use proptest::prelude::*;

// Naive Pochhammer sum as an oracle for the compensated evaluator.
fn pochhammer_sum(a: i64, b: f64, c: f64, z: f64) -> f64 {
    let mut total = 0.0;
    for m in 0..=(-a) as usize {
        let mut t = 1.0;
        for i in 0..m {
            let i = i as f64;
            t *= (a as f64 + i) * (b + i) / ((c + i) * (i + 1.0));
        }
        total += t * z.powi(m as i32);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn terminating_sum_matches_naive(a in -8i64..=0, b in -3.0..3.0f64, c in 0.25..5.0f64, z in -2.0..2.0f64) {
        let got = hyp2f1_terminating(a, b, c, z).unwrap();
        let naive = pochhammer_sum(a, b, c, z);
        prop_assert!((got - naive).abs() < 1e-10 * (1.0 + naive.abs()));
    }

    #[test]
    fn coefficient_and_series_forms_agree(n in 3usize..=8, r in 0.25..10.0f64) {
        let q = q_coefficients(n, 1.0).unwrap();
        let a = q.eval(r);
        let b = q_closed_form(n, r, 1.0).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn euler_transformation_at_z_equal_one() {
    // Chu-Vandermonde: F(-m, b; c; 1) = (c - b)_m / (c)_m
    for m in 0..7i64 {
        for (b, c) in [(0.5, 2.5), (1.5, 4.0), (-0.5, 3.0)] {
            let mut expected = 1.0;
            for i in 0..m {
                expected *= (c - b + i as f64) / (c + i as f64);
            }
            let got = hyp2f1_terminating(-m, b, c, 1.0).unwrap();
            assert!((got - expected).abs() < 1e-13, "m={m} b={b} c={c}");
        }
    }
}

#[test]
fn calibrated_constant_matches_small_radius_limit() {
    for n in 3..=6 {
        let (a, b, c) = q_parameters(n);
        let c1 = calibrate_c1(n).unwrap();
        let f1 = hyp2f1_terminating(a, b, c, 1.0).unwrap();
        assert!((c1 * f1 / unit_sphere_area(n) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn far_field_slope() {
    for n in 3..=6 {
        let q = calibrated_q(n).unwrap();
        let slope = q.eval(11.0).ln() - q.eval(10.0).ln();
        assert!((slope - 2.0 * (n - 1) as f64).abs() < 1e-3);
    }
}

#[test]
fn exponential_fit_recovers_coefficients() {
    let q = calibrated_q(3).unwrap();
    let spec = QuadratureSpec::default().with_tol(1e-12);
    let radii: Vec<f64> = (0..40).map(|i| 0.1 + i as f64 * 0.05).collect();
    let a = DMatrix::from_fn(radii.len(), 5, |i, j| (2.0 * (j as f64 - 2.0) * radii[i]).exp());
    let y = DVector::from_iterator(radii.len(), radii.iter().map(|&r| q_quadrature(3, -1.0, r, &spec).unwrap()));
    let fit = a.svd(true, true).solve(&y, 1e-14).unwrap();
    let scale = q.alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (f, e) in fit.iter().zip(&q.alpha) {
        assert!((f - e).abs() < 1e-5 * scale, "{fit} vs {:?}", q.alpha);
    }
}

#[test]
fn rescaled_curvature_against_quadrature() {
    let q = calibrated_q(3).unwrap();
    let spec = QuadratureSpec::default().with_tol(1e-11);
    for r in [0.25, 0.5, 1.5] {
        let quad = q_quadrature(3, -4.0, r, &spec).unwrap();
        assert!((quad / rescaled_q(&q, -4.0, r).unwrap() - 1.0).abs() < 1e-6);
    }
    let slope = rescaled_q(&q, -4.0, 11.0).unwrap().ln() - rescaled_q(&q, -4.0, 10.0).unwrap().ln();
    assert!((slope - 8.0).abs() < 1e-3);
}
