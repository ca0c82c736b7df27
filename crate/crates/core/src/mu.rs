//! Growth profiles of harmonic functions: sphere energy `S(R)`, ball energy
//! `B(R)`, Dirichlet energy `D(R)`, iterated energy `E(R) = 2 int_0^R D`,
//! the ratio `mu = E / S` and the Almgren frequency `U = R D / S`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::harmonics::{HarmonicFunction, PoissonAtom};
use crate::numeric::CompensatedSum;
use crate::quadrature::{radial_integrate, sphere_integral_vec, check_grid, QuadratureSpec, SphereIntegrand};
use crate::spaceform::SpaceForm;

/// Seed for the harmonicity gate when none is supplied.
pub const DEFAULT_GATE_SEED: u64 = 0x5eed;
pub const GATE_POINTS: usize = 20;
pub const GATE_STEP: f64 = 1e-3;
pub const GATE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleErrors {
    pub sphere_energy: f64,
    pub ball_energy: f64,
    pub dirichlet: f64,
    pub iterated: f64,
    pub curvature_weighted: f64,
    pub radial_flux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub radius: f64,
    /// `int_{S_R} f^2`.
    pub sphere_energy: f64,
    /// `int_{B_R} f^2`.
    pub ball_energy: f64,
    /// `int_{B_R} |grad f|^2`.
    pub dirichlet: f64,
    /// `2 int_0^R D(r) dr`.
    pub iterated: f64,
    pub mu: f64,
    pub almgren: f64,
    /// `int_{B_R} H_k f^2`.
    pub curvature_weighted: f64,
    /// `int_{S_R} d_r f^2`.
    pub radial_flux: f64,
    pub errors: SampleErrors,
}

impl GrowthSample {
    /// Relative residual of `S = int_B H f^2 + E`.
    pub fn divergence_residual(&self) -> f64 {
        (self.sphere_energy - self.curvature_weighted - self.iterated).abs()
            / self.sphere_energy.abs().max(f64::MIN_POSITIVE)
    }

    /// Relative residual of `2 D = int_S d_r f^2`.
    pub fn green_residual(&self) -> f64 {
        let scale = (2.0 * self.dirichlet).abs().max(self.radial_flux.abs());
        if scale == 0.0 {
            return 0.0;
        }
        (2.0 * self.dirichlet - self.radial_flux).abs() / scale
    }
}

/// Degrees of a harmonic polynomial with the sphere constants
/// `eps_d = int_{S_1} v_d^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpectrum {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl PolynomialSpectrum {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        if dim < 2 {
            return Err(domain("spectrum dimension must be at least 2"));
        }
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(domain("spectrum degrees must be strictly increasing"));
        }
        if entries.iter().any(|(_, e)| !(*e > 0.0) || !e.is_finite()) {
            return Err(domain("spectrum constants must be positive"));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// `mu(R) = sum mu_d eps_d R^{2d} / sum eps_d R^{2d}`.
    pub fn mu(&self, r: f64) -> f64 {
        let d1 = self.entries[0].0 as i32;
        let mut num = CompensatedSum::new();
        let mut den = CompensatedSum::new();
        for &(d, e) in &self.entries {
            let a = e * r.powi(2 * (d as i32 - d1));
            num.add(mu_closed_form(d, self.dim) * a);
            den.add(a);
        }
        num.value() / den.value()
    }
}

/// `mu_d = 2d / (2d + n - 1)` for a homogeneous harmonic polynomial of degree `d`.
pub fn mu_closed_form(degree: usize, dim: usize) -> f64 {
    let d = degree as f64;
    2.0 * d / (2.0 * d + dim as f64 - 1.0)
}

/// Derivative of `mu` for a Euclidean harmonic polynomial with the given spectrum:
///
/// `mu'(R) = sum_{j<k} 2 (d_k - d_j)(mu_k - mu_j) eps_j eps_k R^{2(d_j+d_k-2d_1)-1}
///           / (sum_j eps_j R^{2(d_j-d_1)})^2`.
pub fn mu_prime_series(spectrum: &PolynomialSpectrum, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain("mu' needs R > 0"));
    }
    let e = spectrum.entries();
    if e.is_empty() {
        return Err(domain("spectrum is empty"));
    }
    let n = spectrum.dim();
    let d1 = e[0].0 as i32;
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (j, &(dj, ej)) in e.iter().enumerate() {
        den.add(ej * r.powi(2 * (dj as i32 - d1)));
        for &(dk, ek) in &e[j + 1..] {
            let dmu = mu_closed_form(dk, n) - mu_closed_form(dj, n);
            let pow = 2 * (dk as i32 + dj as i32 - 2 * d1) - 1;
            num.add(2.0 * (dk - dj) as f64 * dmu * ej * ek * r.powi(pow));
        }
    }
    let den = den.value();
    Ok(num.value() / (den * den))
}

/// `U(R) = R D(R) / S(R)`.
pub fn almgren_frequency(sample: &GrowthSample) -> Result<f64> {
    if !(sample.sphere_energy > 0.0) {
        return Err(domain("Almgren frequency needs S(R) > 0"));
    }
    Ok(sample.radius * sample.dirichlet / sample.sphere_energy)
}

/// Sphere integrand `[f^2, |grad f|^2, d_r f^2]` of a harmonic function.
pub(crate) struct ProfileIntegrand<'a> {
    f: &'a HarmonicFunction,
}

impl<'a> ProfileIntegrand<'a> {
    pub fn new(f: &'a HarmonicFunction) -> Self {
        Self { f }
    }
}

impl SphereIntegrand for ProfileIntegrand<'_> {
    fn width(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64], omega: &[f64], out: &mut [f64]) {
        let mut grad = [0.0f64; 8];
        let n = x.len();
        let mut heap;
        let g: &mut [f64] = if n <= 8 {
            &mut grad[..n]
        } else {
            heap = vec![0.0; n];
            &mut heap
        };
        let v = self.f.value_and_gradient(x, g);
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let lambda = self.f.space().conformal_factor(r2);
        let e2: f64 = g.iter().map(|a| a * a).sum();
        let dr: f64 = g.iter().zip(omega).map(|(a, b)| a * b).sum::<f64>() / lambda;
        out[0] = v * v;
        out[1] = e2 / (lambda * lambda);
        out[2] = 2.0 * v * dr;
    }

    fn axis(&self) -> Option<Vec<f64>> {
        self.f.symmetry_axis()
    }

    fn peaks(&self) -> Vec<Vec<f64>> {
        self.f.peak_directions()
    }
}

/// Scalar field quantities of a harmonic function, usable with the public
/// quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldQuantity {
    /// `f^2`
    Square,
    /// `|grad f|^2` in the model metric
    GradientNormSq,
    /// `d_r f^2`
    RadialDerivativeOfSquare,
}

pub struct FieldIntegrand<'a> {
    inner: ProfileIntegrand<'a>,
    which: FieldQuantity,
}

impl<'a> FieldIntegrand<'a> {
    pub fn new(f: &'a HarmonicFunction, which: FieldQuantity) -> Self {
        Self {
            inner: ProfileIntegrand::new(f),
            which,
        }
    }
}

impl SphereIntegrand for FieldIntegrand<'_> {
    fn eval(&self, x: &[f64], omega: &[f64], out: &mut [f64]) {
        let mut all = [0.0; 3];
        self.inner.eval(x, omega, &mut all);
        out[0] = match self.which {
            FieldQuantity::Square => all[0],
            FieldQuantity::GradientNormSq => all[1],
            FieldQuantity::RadialDerivativeOfSquare => all[2],
        };
    }

    fn axis(&self) -> Option<Vec<f64>> {
        self.inner.axis()
    }

    fn peaks(&self) -> Vec<Vec<f64>> {
        self.inner.peaks()
    }
}

/// Checks harmonicity by finite differences at seeded random interior points.
pub fn harmonicity_gate(f: &HarmonicFunction, seed: u64) -> Result<()> {
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = if f.space().is_flat() { 1.0 } else { 0.5 };
    for _ in 0..GATE_POINTS {
        let x = random_point_in_ball(&mut rng, n, radius);
        let r = f.harmonicity_residual(&x, GATE_STEP)?;
        if !(r < GATE_TOL) {
            return Err(Error::Precondition(format!(
                "harmonicity residual {r:.3e} at {x:?} exceeds {GATE_TOL:e}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn random_point_in_ball<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() < radius * radius {
            return x;
        }
    }
}

/// Growth profile on an increasing grid of radii, after the harmonicity gate
/// with the default seed.
pub fn growth_profile(
    f: &HarmonicFunction,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<GrowthSample>> {
    growth_profile_seeded(f, grid, spec, DEFAULT_GATE_SEED)
}

pub fn growth_profile_seeded(
    f: &HarmonicFunction,
    grid: &[f64],
    spec: &QuadratureSpec,
    seed: u64,
) -> Result<Vec<GrowthSample>> {
    spec.validate()?;
    check_grid(grid)?;
    harmonicity_gate(f, seed)?;
    let space: SpaceForm = *f.space();
    let g = ProfileIntegrand::new(f);
    // slots: B, D, E, int_B H f^2
    let balls = radial_integrate(&g, &space, grid, spec, 4, |r, t, s, o| {
        o[0] = s[0];
        o[1] = s[1];
        o[2] = 2.0 * (r - t) * s[1];
        o[3] = space.mean_curvature_unchecked(t) * s[0];
    })?;
    let spheres = grid
        .iter()
        .map(|&r| sphere_integral_vec(&g, &space, r, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(grid.len());
    for ((&r, ball), sph) in grid.iter().zip(&balls).zip(&spheres) {
        let s = sph[0].value;
        let e = ball[2].value;
        let d = ball[1].value;
        let mu = if s > 0.0 { e / s } else { 0.0 };
        if !(mu < 1.0) || mu < 0.0 {
            return Err(Error::NumericalViolation(format!(
                "mu({r}) = {mu} lies outside [0, 1)"
            )));
        }
        let almgren = if s > 0.0 { r * d / s } else { 0.0 };
        out.push(GrowthSample {
            radius: r,
            sphere_energy: s,
            ball_energy: ball[0].value,
            dirichlet: d,
            iterated: e,
            mu,
            almgren,
            curvature_weighted: ball[3].value,
            radial_flux: sph[2].value,
            errors: SampleErrors {
                sphere_energy: sph[0].err_est,
                ball_energy: ball[0].err_est,
                dirichlet: ball[1].err_est,
                iterated: ball[2].err_est,
                curvature_weighted: ball[3].err_est,
                radial_flux: sph[2].err_est,
            },
        });
    }
    Ok(out)
}

/// First index `i` with `mu[i+1] < mu[i]`, if any.
pub fn first_mu_decrease(samples: &[GrowthSample]) -> Option<usize> {
    samples.windows(2).position(|w| w[1].mu < w[0].mu)
}

/// Two equal-weight Poisson atoms ten degrees apart on hyperbolic 3-space.
/// Its mu-function dips on roughly `R in [2.25, 3.0]` between two rising stretches.
pub fn non_monotone_witness() -> Result<HarmonicFunction> {
    let a = 10f64.to_radians();
    HarmonicFunction::poisson(
        SpaceForm::hyperbolic(3)?,
        vec![
            PoissonAtom { weight: 1.0, direction: vec![1.0, 0.0, 0.0] },
            PoissonAtom { weight: 1.0, direction: vec![a.cos(), a.sin(), 0.0] },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{Basis, Term};
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        assert_eq!(mu_closed_form(1, 3), 0.5);
        assert_eq!(mu_closed_form(0, 7), 0.0);
        assert!((mu_closed_form(3, 2) - 6.0 / 7.0).abs() < 1e-15);
        let mut prev = -1.0;
        for d in 0..50 {
            let m = mu_closed_form(d, 4);
            assert!(m > prev && m < 1.0);
            prev = m;
        }
        assert!(1.0 - mu_closed_form(100_000, 4) < 1e-4);
    }

    #[test]
    fn mu_prime_two_entry_spectrum() {
        // 1 + x_1 in R^3: mu = R^2 / (6 + 2R^2), mu' = 12 R / (6 + 2R^2)^2
        let s = PolynomialSpectrum::new(3, vec![(0, 4.0 * PI), (1, 4.0 * PI / 3.0)]).unwrap();
        assert!((mu_prime_series(&s, 1.0).unwrap() - 0.1875).abs() < 1e-15);
        for r in [0.3f64, 1.7, 4.0] {
            let exact = 12.0 * r / (6.0 + 2.0 * r * r).powi(2);
            assert!((mu_prime_series(&s, r).unwrap() / exact - 1.0).abs() < 1e-13);
            assert!((s.mu(r) - r * r / (6.0 + 2.0 * r * r)).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_prime_single_degree_is_zero() {
        let s = PolynomialSpectrum::new(4, vec![(3, 0.7)]).unwrap();
        assert_eq!(mu_prime_series(&s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn spectrum_validation() {
        assert!(PolynomialSpectrum::new(3, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(PolynomialSpectrum::new(3, vec![(1, 0.0)]).is_err());
    }

    #[test]
    fn constant_profile_is_flat_zero() {
        for sp in [SpaceForm::euclidean(3).unwrap(), SpaceForm::hyperbolic(4).unwrap()] {
            let f = HarmonicFunction::constant(sp, 1.0).unwrap();
            let prof = growth_profile(&f, &[0.5, 1.0, 2.0], &QuadratureSpec::default()).unwrap();
            for s in &prof {
                assert_eq!(s.mu, 0.0);
                assert_eq!(s.almgren, 0.0);
                assert!((s.ball_energy / sp.ball_volume(s.radius).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn one_plus_x_exact_rationals() {
        // S = 4 pi R^2 + 4 pi R^4 / 3, D = 4 pi R^3 / 3, E = 2 pi R^4 / 3
        let f = HarmonicFunction::polynomial(
            SpaceForm::euclidean(3).unwrap(),
            vec![
                Term { basis: Basis::Constant, coefficient: 1.0 },
                Term { basis: Basis::Coordinate { index: 0 }, coefficient: 1.0 },
            ],
        )
        .unwrap();
        let prof = growth_profile(&f, &[0.5, 1.0, 2.0], &QuadratureSpec::default()).unwrap();
        for s in &prof {
            let r = s.radius;
            let sph = 4.0 * PI * r * r + 4.0 * PI * r.powi(4) / 3.0;
            let d = 4.0 * PI * r.powi(3) / 3.0;
            assert!((s.sphere_energy / sph - 1.0).abs() < 1e-13);
            assert!((s.dirichlet / d - 1.0).abs() < 1e-13);
            assert!((s.mu - r * r / (6.0 + 2.0 * r * r)).abs() < 1e-13);
            assert!((s.almgren - r * d / sph).abs() < 1e-13);
            assert!(s.divergence_residual() < 1e-12);
            assert!(s.green_residual() < 1e-12);
        }
    }

    #[test]
    fn gate_accepts_harmonic_functions() {
        let f = HarmonicFunction::axial(SpaceForm::euclidean(3).unwrap(), 4).unwrap();
        assert!(harmonicity_gate(&f, 1).is_ok());
        let g = non_monotone_witness().unwrap();
        assert!(harmonicity_gate(&g, 7).is_ok());
    }
}
