//! Homogeneity and the kernel gradient identity in the harmonic catalog.

use price_lab::harmonics::axial_coefficients;
use price_lab::{Basis, HarmonicFunction, PoissonAtom, SpaceForm, Term};
use proptest::prelude::*;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn point_in_ball(n: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_flat_map(move |v| (Just(v), 0.0..radius))
        .prop_map(|(v, t)| unit(v).into_iter().map(|x| x * t).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn axial_harmonics_are_homogeneous(n in 2usize..=5, d in 0usize..=6, x in point_in_ball(5, 2.0), t in 0.1..3.0f64) {
        let f = HarmonicFunction::axial(SpaceForm::euclidean(n).unwrap(), d).unwrap();
        let x = &x[..n];
        let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
        let a = f.evaluate(&tx).unwrap();
        let b = t.powi(d as i32) * f.evaluate(x).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + b.abs()));
    }

    #[test]
    fn polynomials_are_linear(x in point_in_ball(4, 1.5), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let sp = SpaceForm::euclidean(4).unwrap();
        let t1 = Term { basis: Basis::Product { i: 0, j: 2 }, coefficient: 1.0 };
        let t2 = Term { basis: Basis::Axial { axis: 3, degree: 3 }, coefficient: 1.0 };
        let f1 = HarmonicFunction::polynomial(sp, vec![t1.clone()]).unwrap();
        let f2 = HarmonicFunction::polynomial(sp, vec![t2.clone()]).unwrap();
        let g = HarmonicFunction::polynomial(
            sp,
            vec![Term { coefficient: a, ..t1 }, Term { coefficient: b, ..t2 }],
        )
        .unwrap();
        let lhs = g.evaluate(&x).unwrap();
        let rhs = a * f1.evaluate(&x).unwrap() + b * f2.evaluate(&x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn poisson_gradient_identity(n in 2usize..=5, k in -3.0..-0.2f64, x in point_in_ball(5, 0.95), dir in prop::collection::vec(-1.0..1.0f64, 5)) {
        prop_assume!(dir[..n].iter().any(|v| v.abs() > 1e-2));
        let sp = SpaceForm::new(n, k).unwrap();
        let f = HarmonicFunction::poisson(sp, vec![PoissonAtom { weight: 1.0, direction: unit(dir[..n].to_vec()) }]).unwrap();
        let x = &x[..n];
        let p = f.evaluate(x).unwrap();
        let g = f.gradient(x).unwrap();
        let m = (n - 1) as f64;
        prop_assert!((g.riemannian_norm_sq / (m * m * k.abs() * p * p) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn poisson_combinations_are_linear(x in point_in_ball(3, 0.9), w1 in 0.1..4.0f64, w2 in 0.1..4.0f64) {
        let sp = SpaceForm::hyperbolic(3).unwrap();
        let d1 = vec![1.0, 0.0, 0.0];
        let d2 = unit(vec![0.3, -0.5, 0.8]);
        let one = |w: f64, d: &Vec<f64>| HarmonicFunction::poisson(sp, vec![PoissonAtom { weight: w, direction: d.clone() }]).unwrap();
        let both = HarmonicFunction::poisson(sp, vec![
            PoissonAtom { weight: w1, direction: d1.clone() },
            PoissonAtom { weight: w2, direction: d2.clone() },
        ]).unwrap();
        let lhs = both.evaluate(&x).unwrap();
        let rhs = one(w1, &d1).evaluate(&x).unwrap() + one(w2, &d2).evaluate(&x).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-13);
        prop_assert!(lhs > 0.0);
    }

    #[test]
    fn gradients_match_finite_differences(x in point_in_ball(3, 0.8)) {
        let sp = SpaceForm::hyperbolic(3).unwrap();
        let f = HarmonicFunction::poisson(sp, vec![
            PoissonAtom { weight: 1.0, direction: vec![0.0, 1.0, 0.0] },
            PoissonAtom { weight: 0.5, direction: vec![0.0, 0.0, -1.0] },
        ]).unwrap();
        let g = f.gradient(&x).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (f.evaluate(&a).unwrap() - f.evaluate(&b).unwrap()) / (2.0 * h);
            prop_assert!((fd - g.coords[i]).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}

#[test]
fn axial_matches_gegenbauer_form() {
    // degree-4 axial harmonic in R^3 is proportional to r^4 P_4(cos theta)
    let c = axial_coefficients(4, 3);
    let p4 = [35.0 / 8.0, -30.0 / 8.0, 3.0 / 8.0];
    for (a, b) in c.iter().zip(p4) {
        assert!((a * p4[0] - b).abs() < 1e-14, "{c:?}");
    }
}

#[test]
fn dimension_two_polynomials_live_on_the_hyperbolic_plane() {
    let sp = SpaceForm::hyperbolic(2).unwrap();
    let f = HarmonicFunction::axial(sp, 1).unwrap();
    for x in [[0.3, 0.1], [-0.5, 0.6], [0.9, -0.2]] {
        assert!(f.harmonicity_residual(&x, 1e-3).unwrap() < 1e-10);
    }
    assert!(HarmonicFunction::axial(SpaceForm::hyperbolic(3).unwrap(), 1).is_err());
}
