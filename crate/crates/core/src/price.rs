//! Two-sided exponential envelopes for the ball energy `B(R)` driven by
//! `H/(1 - mu)`, together with the grid-level verification scenarios built on
//! them: envelope constants, bounded-energy windows and growth exponents.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::harmonics::{HarmonicFunction, Variant};
use crate::hypergeom::{calibrated_q, rescaled_ball_energy};
use crate::mu::{growth_profile, GrowthSample};
use crate::numeric::{cumulative_trapezoid, linear_fit};
use crate::quadrature::{cumulative_profile, QuadratureSpec};
use crate::mu::{FieldIntegrand, FieldQuantity};
use crate::spaceform::SpaceForm;

/// Calibration radius where both envelopes equal one.
pub const R0: f64 = 1.0;
/// Largest admissible `mu` before the envelope integrand is considered singular.
pub const DIVISION_GUARD: f64 = 1e-12;
pub const DEFAULT_SLACK: f64 = 1.5;
/// Relative tolerance on `D(R_max) - D(R_max / 2)` for the bounded-energy check.
pub const DEFAULT_TAIL_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub r_grid: Vec<f64>,
    /// `exp int_{R0}^R H_k / (1 - mu)`.
    pub lower_env: Vec<f64>,
    /// `exp int_{R0}^R H_{k'} / (1 - mu)`.
    pub upper_env: Vec<f64>,
}

/// Envelopes from `(R, mu)` samples by cumulative trapezoid integration.
/// The grid must start at `r0`.
pub fn price_envelopes(
    mu_samples: &[(f64, f64)],
    space: &SpaceForm,
    k_prime: f64,
    r0: f64,
) -> Result<Envelopes> {
    let k = space.curvature();
    if !(k_prime <= k) || !k_prime.is_finite() {
        return Err(domain(format!("need k' <= k, got k = {k}, k' = {k_prime}")));
    }
    if mu_samples.len() < 2 {
        return Err(domain("envelopes need at least two samples"));
    }
    if !(r0 > 0.0) || (mu_samples[0].0 - r0).abs() > 1e-12 * r0.max(1.0) {
        return Err(domain(format!(
            "grid must start at R0 = {r0}, starts at {}",
            mu_samples[0].0
        )));
    }
    if mu_samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(domain("grid must be strictly increasing"));
    }
    for &(r, mu) in mu_samples {
        if !(mu < 1.0 - DIVISION_GUARD) {
            return Err(Error::NumericalViolation(format!(
                "mu({r}) = {mu} reaches the division guard"
            )));
        }
        if mu < 0.0 {
            return Err(domain(format!("mu({r}) = {mu} is negative")));
        }
    }
    let upper_space = SpaceForm::new(space.dim(), k_prime)?;
    let r: Vec<f64> = mu_samples.iter().map(|s| s.0).collect();
    let env = |sp: &SpaceForm| -> Vec<f64> {
        let integrand: Vec<f64> = mu_samples
            .iter()
            .map(|&(t, mu)| sp.mean_curvature_unchecked(t) / (1.0 - mu))
            .collect();
        cumulative_trapezoid(&r, &integrand).into_iter().map(f64::exp).collect()
    };
    Ok(Envelopes {
        lower_env: env(space),
        upper_env: env(&upper_space),
        r_grid: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowExponents {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub r_grid: Vec<f64>,
    pub lower_env: Vec<f64>,
    pub upper_env: Vec<f64>,
    pub ball_energy: Vec<f64>,
    pub mu: Vec<f64>,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Constants from the first half of the grid.
    pub c1_half: f64,
    pub c2_half: f64,
    pub slack: f64,
    pub stability_ok: bool,
    pub window_exponents: WindowExponents,
}

impl EnvelopeReport {
    /// Whether `C1 <= B / lower_env` and `B / upper_env <= C2` at every grid point.
    pub fn brackets(&self) -> bool {
        let scale = 1.0 + 1e-12;
        self.ball_energy
            .iter()
            .zip(self.lower_env.iter().zip(&self.upper_env))
            .all(|(b, (lo, up))| b / lo * scale >= self.c1 && b / up <= self.c2 * scale)
    }
}

/// Index one past the last point of the first half of the grid.
fn half_grid_end(r: &[f64]) -> usize {
    let mid = r[0] + 0.5 * (r[r.len() - 1] - r[0]);
    let end = r.iter().take_while(|&&t| t <= mid * (1.0 + 1e-12)).count();
    end.max(2).min(r.len())
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Half-grid stability: constants from the first half bracket the whole grid
/// up to a multiplicative slack.
fn stable(lower_ratios: &[f64], upper_ratios: &[f64], c1_half: f64, c2_half: f64, slack: f64) -> bool {
    lower_ratios.iter().all(|&x| x >= c1_half / slack)
        && upper_ratios.iter().all(|&x| x <= c2_half * slack)
}

/// Assembles the envelope report from a computed profile.
pub fn envelope_report(
    samples: &[GrowthSample],
    space: &SpaceForm,
    k_prime: f64,
    slack: f64,
) -> Result<EnvelopeReport> {
    if !(slack >= 1.0) {
        return Err(domain(format!("slack must be at least 1, got {slack}")));
    }
    let mu: Vec<(f64, f64)> = samples.iter().map(|s| (s.radius, s.mu)).collect();
    let env = price_envelopes(&mu, space, k_prime, samples[0].radius)?;
    let b: Vec<f64> = samples.iter().map(|s| s.ball_energy).collect();
    let lo: Vec<f64> = b.iter().zip(&env.lower_env).map(|(b, e)| b / e).collect();
    let up: Vec<f64> = b.iter().zip(&env.upper_env).map(|(b, e)| b / e).collect();
    let c1 = min_max(&lo).0;
    let c2 = min_max(&up).1;
    let h = half_grid_end(&env.r_grid);
    let c1_half = min_max(&lo[..h]).0;
    let c2_half = min_max(&up[..h]).1;
    let log = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let fit = |v: &[f64]| linear_fit(&env.r_grid, &log(v)).map_or(f64::NAN, |f| f.0);
    Ok(EnvelopeReport {
        stability_ok: c1 > 0.0 && c2.is_finite() && stable(&lo, &up, c1_half, c2_half, slack),
        window_exponents: WindowExponents {
            lower: fit(&env.lower_env),
            upper: fit(&env.upper_env),
        },
        r_grid: env.r_grid,
        lower_env: env.lower_env,
        upper_env: env.upper_env,
        ball_energy: b,
        mu: mu.into_iter().map(|m| m.1).collect(),
        c1,
        c2,
        c1_half,
        c2_half,
        slack,
    })
}

/// Double-sided envelope constants for a non-constant harmonic function,
/// with the half-grid stability diagnostic.
pub fn verify_double_sided(
    f: &HarmonicFunction,
    k_prime: f64,
    grid: &[f64],
    spec: &QuadratureSpec,
    slack: f64,
) -> Result<EnvelopeReport> {
    if f.is_constant() {
        return Err(Error::Precondition(
            "double-sided verification needs a non-constant function".into(),
        ));
    }
    let samples = growth_profile(f, grid, spec)?;
    envelope_report(&samples, f.space(), k_prime, slack)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindowReport {
    pub r_grid: Vec<f64>,
    /// `B(R) / Vol(R)`.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub half_min: f64,
    pub half_max: f64,
    pub slack: f64,
    pub stability_ok: bool,
    /// Observed Dirichlet bound `D(R_max)`.
    pub sigma: f64,
    /// `(D(R_max) - D(R_max / 2)) / D(R_max)`.
    pub dirichlet_tail: f64,
    pub tail_tol: f64,
    /// `inf S(R) / sinh^{n-1}(sqrt|k| R)`.
    pub sphere_constant: f64,
    /// `2 sigma R / (c sinh^{n-1}(sqrt|k| R))` at each grid radius.
    pub mu_bound: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_bound_ok: bool,
}

/// Bounded-energy window for a profile that already includes `R_max / 2`.
/// `samples` must be sorted; the report covers the radii in `grid`.
pub fn energy_window_report(
    samples: &[GrowthSample],
    grid: &[f64],
    space: &SpaceForm,
    tail_tol: f64,
    slack: f64,
) -> Result<EnergyWindowReport> {
    let at = |r: f64| {
        samples
            .iter()
            .find(|s| (s.radius - r).abs() <= 1e-12 * r.max(1.0))
            .ok_or_else(|| domain(format!("profile has no sample at R = {r}")))
    };
    let r_max = grid[grid.len() - 1];
    let sigma = at(r_max)?.dirichlet;
    let d_half = at(0.5 * r_max)?.dirichlet;
    let dirichlet_tail = if sigma > 0.0 { (sigma - d_half) / sigma } else { 0.0 };
    let rows = grid.iter().map(|&r| at(r)).collect::<Result<Vec<_>>>()?;
    let ratios = rows
        .iter()
        .map(|s| Ok(s.ball_energy / space.ball_volume(s.radius)?))
        .collect::<Result<Vec<f64>>>()?;
    let (min, max) = min_max(&ratios);
    let h = half_grid_end(grid);
    let (half_min, half_max) = min_max(&ratios[..h]);
    let sh = |r: f64| {
        let m = (space.dim() - 1) as i32;
        if space.is_flat() {
            r.powi(m)
        } else {
            (space.scale() * r).sinh().powi(m)
        }
    };
    let c = rows
        .iter()
        .map(|s| s.sphere_energy / sh(s.radius))
        .fold(f64::INFINITY, f64::min);
    let mu_bound: Vec<f64> = rows
        .iter()
        .map(|s| 2.0 * sigma * s.radius / (c * sh(s.radius)))
        .collect();
    let mu: Vec<f64> = rows.iter().map(|s| s.mu).collect();
    let mu_bound_ok = mu.iter().zip(&mu_bound).all(|(m, b)| m <= b);
    if !(dirichlet_tail < tail_tol) {
        return Err(Error::NotFiniteEnergy(format!(
            "Dirichlet energy still grows: (D({r_max}) - D({})) / D({r_max}) = {dirichlet_tail:.4} exceeds {tail_tol}",
            0.5 * r_max
        )));
    }
    Ok(EnergyWindowReport {
        r_grid: grid.to_vec(),
        stability_ok: min > 0.0
            && max.is_finite()
            && stable(&ratios, &ratios, half_min, half_max, slack),
        ratios,
        min,
        max,
        half_min,
        half_max,
        slack,
        sigma,
        dirichlet_tail,
        tail_tol,
        sphere_constant: c,
        mu_bound,
        mu,
        mu_bound_ok,
    })
}

/// Grid with `R_max / 2` merged in, as the bounded-energy check needs it.
pub fn with_half_radius(grid: &[f64]) -> Vec<f64> {
    let half = 0.5 * grid[grid.len() - 1];
    let mut g = grid.to_vec();
    if !g.iter().any(|&r| (r - half).abs() <= 1e-12 * half.max(1.0)) {
        g.push(half);
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    g
}

/// Checks that `D(R)` has levelled off and reports `B(R) / Vol(R)` on the grid.
/// Fails with [`Error::NotFiniteEnergy`] when the Dirichlet tail exceeds `tail_tol`.
pub fn bounded_energy_window_check(
    f: &HarmonicFunction,
    grid: &[f64],
    spec: &QuadratureSpec,
    tail_tol: f64,
    slack: f64,
) -> Result<EnergyWindowReport> {
    if grid.is_empty() {
        return Err(domain("grid is empty"));
    }
    let full = with_half_radius(grid);
    let samples = growth_profile(f, &full, spec)?;
    energy_window_report(&samples, grid, f.space(), tail_tol, slack)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub lambda: f64,
    /// `(n - 1) sqrt|k|`.
    pub lower: f64,
    /// `2 (n - 1) sqrt|k'|`.
    pub upper: f64,
    pub tol: f64,
    pub within: bool,
    /// `"closed-form"` or `"quadrature"`.
    pub method: String,
    pub r_grid: Vec<f64>,
    pub ball_energy: Vec<f64>,
}

/// Least-squares slope of `log B(R)` over a far grid for a positive harmonic
/// function, checked against the window `[(n-1)sqrt|k|, 2(n-1)sqrt|k'|]`.
pub fn growth_exponent_window(
    f: &HarmonicFunction,
    k_prime: f64,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExponentReport> {
    let space = *f.space();
    if !f.is_positive() {
        return Err(domain("growth exponents need a positive harmonic function"));
    }
    if space.is_flat() {
        return Err(domain("growth exponents need negative curvature"));
    }
    if !(k_prime <= space.curvature()) {
        return Err(domain("need k' <= k"));
    }
    if grid.len() < 2 {
        return Err(domain("exponent fit needs at least two radii"));
    }
    let (b, method) = match f.variant() {
        Variant::Constant(c) => (
            grid.iter()
                .map(|&r| Ok(c * c * space.ball_volume(r)?))
                .collect::<Result<Vec<_>>>()?,
            "closed-form",
        ),
        Variant::Poisson(atoms) if atoms.len() == 1 && space.dim() >= 3 => {
            let q = calibrated_q(space.dim())?;
            let w2 = atoms[0].weight * atoms[0].weight;
            (
                grid.iter()
                    .map(|&r| Ok(w2 * rescaled_ball_energy(&q, space.curvature(), r)?))
                    .collect::<Result<Vec<_>>>()?,
                "closed-form",
            )
        }
        _ => {
            let g = FieldIntegrand::new(f, FieldQuantity::Square);
            let prof = cumulative_profile(&g, &space, grid, spec)?;
            (prof.iter().map(|p| p.running.value).collect(), "quadrature")
        }
    };
    let logs: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let (lambda, _) = linear_fit(grid, &logs).ok_or_else(|| domain("degenerate exponent fit"))?;
    let m = (space.dim() - 1) as f64;
    let lower = m * space.scale();
    let upper = 2.0 * m * k_prime.abs().sqrt();
    let tol = 0.1 * lower;
    Ok(ExponentReport {
        lambda,
        lower,
        upper,
        tol,
        within: lambda >= lower - tol && lambda <= upper + tol,
        method: method.into(),
        r_grid: grid.to_vec(),
        ball_energy: b,
    })
}
