//! Growth profiles against exact rational expressions and the integral
//! identities that tie the energies of a profile together.

use std::f64::consts::PI;

use price_lab::mu::*;
use price_lab::numeric::grid_derivative;
use price_lab::{Basis, HarmonicFunction, PoissonAtom, QuadratureSpec, SpaceForm, Term};

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn mixed() -> HarmonicFunction {
    // x_0 + 2 x_0 x_1 + (x_0^2 - x_2^2) / 3 + degree-3 axial about x_2
    HarmonicFunction::polynomial(
        SpaceForm::euclidean(3).unwrap(),
        vec![
            Term { basis: Basis::Coordinate { index: 0 }, coefficient: 1.0 },
            Term { basis: Basis::Product { i: 0, j: 1 }, coefficient: 2.0 },
            Term { basis: Basis::DiffSquares { i: 0, j: 2 }, coefficient: 1.0 / 3.0 },
            Term { basis: Basis::Axial { axis: 2, degree: 3 }, coefficient: 1.0 },
        ],
    )
    .unwrap()
}

#[test]
fn spectrum_predicts_mu() {
    let f = mixed();
    let spec = f.spectrum().unwrap();
    let degrees: Vec<usize> = spec.entries().iter().map(|e| e.0).collect();
    assert_eq!(degrees, vec![1, 2, 3]);
    let prof = growth_profile(&f, &grid(0.3, 3.0, 10), &QuadratureSpec::default()).unwrap();
    for s in &prof {
        assert!((s.mu - spec.mu(s.radius)).abs() < 1e-10, "R={}", s.radius);
    }
}

#[test]
fn spectrum_constants_are_exact() {
    // eps_1 of x_0 on S^2 is 4 pi / 3; eps_2 of 2 x_0 x_1 is 4 * 4 pi / 15
    let f = HarmonicFunction::polynomial(
        SpaceForm::euclidean(3).unwrap(),
        vec![
            Term { basis: Basis::Coordinate { index: 0 }, coefficient: 1.0 },
            Term { basis: Basis::Product { i: 0, j: 1 }, coefficient: 2.0 },
        ],
    )
    .unwrap();
    let e = f.spectrum().unwrap().entries().to_vec();
    assert!((e[0].1 / (4.0 * PI / 3.0) - 1.0).abs() < 1e-13);
    assert!((e[1].1 / (16.0 * PI / 15.0) - 1.0).abs() < 1e-13);
}

#[test]
fn mu_prime_matches_exact_rational_derivative() {
    // 1 + x_0 in R^3: mu = R^2 / (6 + 2 R^2)
    let f = HarmonicFunction::polynomial(
        SpaceForm::euclidean(3).unwrap(),
        vec![
            Term { basis: Basis::Constant, coefficient: 1.0 },
            Term { basis: Basis::Coordinate { index: 0 }, coefficient: 1.0 },
        ],
    )
    .unwrap();
    let spec = f.spectrum().unwrap();
    for r in [0.25, 0.8, 2.0, 4.0f64] {
        let h = 1e-4;
        let mu = |t: f64| t * t / (6.0 + 2.0 * t * t);
        let fd = (mu(r + h) - mu(r - h)) / (2.0 * h);
        assert!((mu_prime_series(spec, r).unwrap() / fd - 1.0).abs() < 1e-7);
    }
}

#[test]
fn almgren_is_degree_for_homogeneous() {
    for n in 2..=4 {
        for d in 0..=4 {
            let f = HarmonicFunction::axial(SpaceForm::euclidean(n).unwrap(), d).unwrap();
            let prof = growth_profile(&f, &[0.7, 1.9], &QuadratureSpec::default()).unwrap();
            for s in &prof {
                assert!((s.almgren - d as f64).abs() < 1e-9);
                if d > 0 {
                    assert!((almgren_frequency(s).unwrap() - d as f64).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn identities_hold_on_hyperbolic_profiles() {
    let sp = SpaceForm::new(4, -0.5).unwrap();
    let f = HarmonicFunction::poisson(
        sp,
        vec![
            PoissonAtom { weight: 1.0, direction: vec![1.0, 0.0, 0.0, 0.0] },
            PoissonAtom { weight: 0.3, direction: vec![0.0, 0.0, 0.6, 0.8] },
        ],
    )
    .unwrap();
    // four-dimensional tensor rules are costly; keep the window short
    let spec = QuadratureSpec::default().with_tol(1e-7);
    let r = grid(0.5, 1.5, 3);
    let prof = growth_profile(&f, &r, &spec).unwrap();
    for s in &prof {
        assert!(s.divergence_residual() < 10.0 * spec.target_rel_tol);
        assert!(s.green_residual() < 10.0 * spec.target_rel_tol);
        assert!((0.0..1.0).contains(&s.mu) && s.mu > 0.0);
    }
}

#[test]
fn co_area_derivative_of_ball_energy() {
    let f = HarmonicFunction::poisson_atom(SpaceForm::hyperbolic(3).unwrap(), 1).unwrap();
    let r = grid(0.5, 2.5, 81);
    let prof = growth_profile(&f, &r, &QuadratureSpec::default()).unwrap();
    let b: Vec<f64> = prof.iter().map(|s| s.ball_energy).collect();
    let d = grid_derivative(&r, &b);
    for (i, s) in prof.iter().enumerate().skip(1).take(r.len() - 2) {
        // three-point differences of a function growing like e^{4R}
        assert!((d[i] / s.sphere_energy - 1.0).abs() < 5e-3, "R={}", s.radius);
    }
}

#[test]
fn energies_follow_the_spectrum() {
    // S = sum eps_d R^{2d+n-1}, D = sum d eps_d R^{2d+n-2},
    // E = 2 int D = sum 2d eps_d R^{2d+n-1} / (2d+n-1)
    let f = mixed();
    let n = 3.0;
    let spec = f.spectrum().unwrap().entries().to_vec();
    let prof = growth_profile(&f, &grid(0.5, 2.0, 7), &QuadratureSpec::default()).unwrap();
    for s in &prof {
        let r = s.radius;
        let (mut sph, mut dir, mut it) = (0.0, 0.0, 0.0);
        for &(d, e) in &spec {
            let d = d as f64;
            sph += e * r.powf(2.0 * d + n - 1.0);
            dir += d * e * r.powf(2.0 * d + n - 2.0);
            it += 2.0 * d * e * r.powf(2.0 * d + n - 1.0) / (2.0 * d + n - 1.0);
        }
        assert!((s.sphere_energy / sph - 1.0).abs() < 1e-11);
        assert!((s.dirichlet / dir - 1.0).abs() < 1e-11);
        assert!((s.iterated / it - 1.0).abs() < 1e-11);
    }
}

#[test]
fn mu_vanishes_only_for_constants() {
    let sp = SpaceForm::hyperbolic(3).unwrap();
    let c = HarmonicFunction::constant(sp, -2.0).unwrap();
    let p = HarmonicFunction::poisson_atom(sp, 0).unwrap();
    let spec = QuadratureSpec::default();
    assert!(growth_profile(&c, &[0.5, 1.0], &spec).unwrap().iter().all(|s| s.mu == 0.0));
    assert!(growth_profile(&p, &[0.5, 1.0], &spec).unwrap().iter().all(|s| s.mu > 0.0));
}

#[test]
fn profile_rejects_bad_grids() {
    let f = HarmonicFunction::constant(SpaceForm::euclidean(3).unwrap(), 1.0).unwrap();
    let spec = QuadratureSpec::default();
    assert!(growth_profile(&f, &[], &spec).is_err());
    assert!(growth_profile(&f, &[1.0, 1.0], &spec).is_err());
    assert!(growth_profile(&f, &[-1.0, 1.0], &spec).is_err());
}
