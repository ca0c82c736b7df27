//! Envelope assembly against a Simpson-rule oracle, plus the report-level
//! guarantees of the verification scenarios.

use price_lab::mu::growth_profile;
use price_lab::price::*;
use price_lab::{HarmonicFunction, PoissonAtom, QuadratureSpec, SpaceForm};

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn two_atoms() -> HarmonicFunction {
    HarmonicFunction::poisson(
        SpaceForm::hyperbolic(3).unwrap(),
        vec![
            PoissonAtom { weight: 1.0, direction: vec![1.0, 0.0, 0.0] },
            PoissonAtom { weight: 0.5, direction: vec![-1.0, 0.0, 0.0] },
        ],
    )
    .unwrap()
}

#[test]
fn trapezoid_envelopes_match_simpson() {
    let sp = SpaceForm::hyperbolic(3).unwrap();
    let r = grid(1.0, 6.0, 401);
    let prof = growth_profile(&two_atoms(), &r, &QuadratureSpec::default()).unwrap();
    let mu: Vec<(f64, f64)> = prof.iter().map(|s| (s.radius, s.mu)).collect();
    let env = price_envelopes(&mu, &sp, -1.0, 1.0).unwrap();
    let g: Vec<f64> = mu.iter().map(|&(t, m)| sp.mean_curvature(t).unwrap() / (1.0 - m)).collect();
    let h = r[1] - r[0];
    let mut acc = 0.0;
    for i in (2..r.len()).step_by(2) {
        acc += h / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]);
        let oracle = acc.exp();
        assert!((env.lower_env[i] / oracle - 1.0).abs() < 1e-5, "R={}", r[i]);
    }
}

#[test]
fn report_constants_bracket_every_ratio() {
    let rep = verify_double_sided(&two_atoms(), -1.0, &grid(1.0, 6.0, 21), &QuadratureSpec::default(), DEFAULT_SLACK).unwrap();
    assert!(rep.brackets());
    assert!(rep.c1 > 0.0 && rep.c2.is_finite());
    assert_eq!(rep.lower_env[0], 1.0);
    assert!(rep.lower_env.windows(2).all(|w| w[1] > w[0]));
    assert!(rep.stability_ok);
}

#[test]
fn euclidean_power_law_window() {
    // v_d on R^n: B ~ R^{2d+n}, envelope (R/R0)^{2d+n-1}, ratio grows like R
    let sp = SpaceForm::euclidean(3).unwrap();
    let d = 2;
    let f = HarmonicFunction::axial(sp, d).unwrap();
    let r = grid(1.0, 4.0, 301);
    let rep = verify_double_sided(&f, 0.0, &r, &QuadratureSpec::default(), DEFAULT_SLACK).unwrap();
    let b1 = rep.ball_energy[0];
    for (i, t) in r.iter().enumerate() {
        let ratio = rep.ball_energy[i] / rep.lower_env[i];
        assert!((ratio / (b1 * t) - 1.0).abs() < 2e-4, "R={t}");
    }
    assert!((rep.c2 / rep.c1 - 4.0).abs() < 1e-3);
    assert!(!rep.stability_ok);
}

#[test]
fn kernel_has_unbounded_dirichlet_energy() {
    let f = HarmonicFunction::poisson_atom(SpaceForm::hyperbolic(3).unwrap(), 0).unwrap();
    let err = bounded_energy_window_check(&f, &grid(1.0, 4.0, 7), &QuadratureSpec::default(), DEFAULT_TAIL_TOL, DEFAULT_SLACK)
        .unwrap_err();
    assert!(matches!(err, price_lab::Error::NotFiniteEnergy(_)));
}

#[test]
fn exponent_reports() {
    let h3 = SpaceForm::hyperbolic(3).unwrap();
    let far = grid(4.0, 8.0, 9);
    let spec = QuadratureSpec::default();
    let c = growth_exponent_window(&HarmonicFunction::constant(h3, 1.0).unwrap(), -1.0, &far, &spec).unwrap();
    assert!(c.within && (c.lambda - 2.0).abs() < 0.1);
    let p = growth_exponent_window(&HarmonicFunction::poisson_atom(h3, 0).unwrap(), -1.0, &far, &spec).unwrap();
    assert_eq!(p.method, "closed-form");
    assert!(p.within && (p.lambda - 4.0).abs() < 0.1);
    // antipodal pair through quadrature lies inside the window
    let pair = growth_exponent_window(&two_atoms(), -1.0, &far, &spec).unwrap();
    assert_eq!(pair.method, "quadrature");
    assert!(pair.within && pair.lambda > 2.0 && pair.lambda < 4.0 + 0.2);
}
