//! Constant-curvature model spaces.
//!
//! Flat space uses Cartesian coordinates. Hyperbolic space of curvature
//! `k = -s^2` uses the Poincaré ball with conformal factor `2 / (s (1 - |x|^2))`,
//! so a geodesic sphere of radius `R` about the origin is the Euclidean sphere
//! of radius `tanh(s R / 2)`. Every other module reaches metric quantities
//! through this type and stays coordinate-agnostic.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{compensated_sum, unit_sphere_area};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    dim: usize,
    curvature: f64,
}

impl SpaceForm {
    pub fn new(dim: usize, curvature: f64) -> Result<Self> {
        if dim < 2 {
            return Err(domain(format!("dimension must be at least 2, got {dim}")));
        }
        if !curvature.is_finite() || curvature > 0.0 {
            return Err(domain(format!(
                "curvature must be finite and non-positive, got {curvature}"
            )));
        }
        Ok(Self { dim, curvature })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, 0.0)
    }

    /// Hyperbolic space of curvature -1.
    pub fn hyperbolic(dim: usize) -> Result<Self> {
        Self::new(dim, -1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn is_flat(&self) -> bool {
        self.curvature == 0.0
    }

    /// `sqrt(|k|)`.
    pub fn scale(&self) -> f64 {
        self.curvature.abs().sqrt()
    }

    /// Mean curvature `H_k(r)` of the geodesic sphere of radius `r`.
    pub fn mean_curvature(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain(format!("mean curvature needs r > 0, got {r}")));
        }
        Ok(self.mean_curvature_unchecked(r))
    }

    pub(crate) fn mean_curvature_unchecked(&self, r: f64) -> f64 {
        let m = (self.dim - 1) as f64;
        if self.is_flat() {
            m / r
        } else {
            let s = self.scale();
            m * s / (s * r).tanh()
        }
    }

    /// Area density `A(R)`: the geodesic sphere of radius `R` has area `A(R) * |S^{n-1}|`.
    pub(crate) fn area_density(&self, r: f64) -> f64 {
        let m = (self.dim - 1) as i32;
        if self.is_flat() {
            r.powi(m)
        } else {
            let s = self.scale();
            ((s * r).sinh() / s).powi(m)
        }
    }

    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain(format!("sphere area needs R >= 0, got {r}")));
        }
        Ok(unit_sphere_area(self.dim) * self.area_density(r))
    }

    /// Volume of the geodesic ball of radius `R`, from the exact recurrence for
    /// `int_0^R sinh^m` (quadrature when `sqrt|k| R < 1`).
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain(format!("ball volume needs R >= 0, got {r}")));
        }
        let n = self.dim;
        let omega = unit_sphere_area(n);
        if self.is_flat() {
            return Ok(omega * r.powi(n as i32) / n as f64);
        }
        let s = self.scale();
        let t = s * r;
        let m = n - 1;
        if t < 1.0 {
            // the recurrence cancels for small t; the integrand is entire, so
            // one Gauss-Legendre panel is exact to rounding
            let (x, w) = gauss_legendre(24);
            let half = 0.5 * t;
            let v = compensated_sum(
                x.iter().zip(&w).map(|(xi, wi)| wi * (half * (xi + 1.0)).sinh().powi(m as i32)),
            );
            return Ok(omega * half * v / s.powi(n as i32));
        }
        // I_j = int_0^t sinh^j
        let (sh, ch) = (t.sinh(), t.cosh());
        let mut lo = if m % 2 == 0 { t } else { ch - 1.0 };
        let mut j = if m % 2 == 0 { 0 } else { 1 };
        while j < m {
            j += 2;
            let jf = j as f64;
            lo = sh.powi(j as i32 - 1) * ch / jf - (jf - 1.0) / jf * lo;
        }
        Ok(omega * lo / s.powi(n as i32))
    }

    /// Poincaré-ball radius of the geodesic sphere of radius `R`.
    pub fn geodesic_to_ball_radius(&self, r: f64) -> Result<f64> {
        if self.is_flat() {
            return Err(Error::Unsupported(
                "ball-model coordinates need negative curvature".into(),
            ));
        }
        if !(r >= 0.0) {
            return Err(domain(format!("geodesic radius must be >= 0, got {r}")));
        }
        Ok((0.5 * self.scale() * r).tanh())
    }

    pub fn ball_to_geodesic_radius(&self, rho: f64) -> Result<f64> {
        if self.is_flat() {
            return Err(Error::Unsupported(
                "ball-model coordinates need negative curvature".into(),
            ));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(domain(format!("ball radius must lie in [0, 1), got {rho}")));
        }
        Ok(2.0 * rho.atanh() / self.scale())
    }

    /// Model-coordinate radius of the geodesic sphere of radius `R`
    /// (identity in flat space).
    pub(crate) fn model_radius(&self, r: f64) -> f64 {
        if self.is_flat() {
            r
        } else {
            (0.5 * self.scale() * r).tanh()
        }
    }

    /// `1 - rho(R)^2` evaluated without cancellation.
    pub(crate) fn one_minus_rho_sq(&self, r: f64) -> f64 {
        let c = (0.5 * self.scale() * r).cosh();
        1.0 / (c * c)
    }

    /// Conformal factor `lambda(x)` at a model point with `|x|^2 = norm_sq`;
    /// the metric is `lambda^2 |dx|^2`.
    #[inline]
    pub(crate) fn conformal_factor(&self, norm_sq: f64) -> f64 {
        if self.is_flat() {
            1.0
        } else {
            2.0 / (self.scale() * (1.0 - norm_sq))
        }
    }

    /// Whether a model point lies inside the domain of the coordinates.
    pub(crate) fn contains(&self, norm_sq: f64) -> bool {
        self.is_flat() || norm_sq < 1.0
    }
}
