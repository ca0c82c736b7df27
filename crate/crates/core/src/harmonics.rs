//! Exactly harmonic test functions on the model spaces.
//!
//! Flat space carries homogeneous harmonic polynomials. Hyperbolic space
//! carries positive combinations of Poisson kernels
//! `P(x, zeta) = ((1 - |x|^2) / |x - zeta|^2)^{n-1}` in ball coordinates,
//! normalised so that `P(0, zeta) = 1`. The same ball-coordinate formula is
//! harmonic for every negative curvature, since rescaling the metric by a
//! constant only rescales the Laplacian. In dimension two the Laplacian is
//! conformally invariant, so Euclidean polynomials are also harmonic on the
//! hyperbolic plane.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::mu::PolynomialSpectrum;
use crate::quadrature::{sphere_integral, FnIntegrand, QuadratureSpec};
use crate::spaceform::SpaceForm;

/// Homogeneous harmonic basis polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case", deny_unknown_fields)]
pub enum Basis {
    Constant,
    /// `x_index`.
    Coordinate { index: usize },
    /// `x_i x_j`, `i != j`.
    Product { i: usize, j: usize },
    /// `x_i^2 - x_j^2`, `i != j`.
    DiffSquares { i: usize, j: usize },
    /// Axially symmetric solid harmonic `r^d G_d(x_axis / r)` with leading
    /// coefficient one.
    Axial { axis: usize, degree: usize },
}

impl Basis {
    pub fn degree(&self) -> usize {
        match self {
            Basis::Constant => 0,
            Basis::Coordinate { .. } => 1,
            Basis::Product { .. } | Basis::DiffSquares { .. } => 2,
            Basis::Axial { degree, .. } => *degree,
        }
    }

    fn symmetry_axis(&self) -> Option<Option<usize>> {
        // Some(None): symmetric about every axis
        match self {
            Basis::Constant => Some(None),
            Basis::Coordinate { index } => Some(Some(*index)),
            Basis::Axial { axis, degree } => Some(if *degree == 0 { None } else { Some(*axis) }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(flatten)]
    pub basis: Basis,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonAtom {
    pub weight: f64,
    /// Unit boundary direction `zeta`.
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    Constant(f64),
    Polynomial(Vec<Term>),
    Poisson(Vec<PoissonAtom>),
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    basis: Basis,
    coefficient: f64,
    // coefficients c_k of x_axis^{d-2k} r^{2k} for axial terms
    axial: Vec<f64>,
}

/// Coefficients `c_k` of the axial solid harmonic
/// `sum_k c_k x_a^{d-2k} |x|^{2k}` in dimension `n`, with `c_0 = 1`.
///
/// Harmonicity forces
/// `c_{k+1} = -c_k (d-2k)(d-2k-1) / (2 (k+1) (2d - 2k + n - 4))`.
pub fn axial_coefficients(degree: usize, n: usize) -> Vec<f64> {
    let d = degree as f64;
    let nf = n as f64;
    let mut c = vec![1.0];
    for k in 0..degree / 2 {
        let kf = k as f64;
        let num = (d - 2.0 * kf) * (d - 2.0 * kf - 1.0);
        let den = 2.0 * (kf + 1.0) * (2.0 * d - 2.0 * kf + nf - 4.0);
        let next = -c[k] * num / den;
        c.push(next);
    }
    c
}

/// Analytic gradient data at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// Coordinate components `partial_i f`.
    pub coords: Vec<f64>,
    /// `|grad f|^2` in the model metric.
    pub riemannian_norm_sq: f64,
}

#[derive(Debug)]
pub struct HarmonicFunction {
    variant: Variant,
    space: SpaceForm,
    terms: Vec<CompiledTerm>,
    spectrum: OnceLock<PolynomialSpectrum>,
}

impl Clone for HarmonicFunction {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            variant: self.variant.clone(),
            space: self.space,
            terms: self.terms.clone(),
            spectrum,
        }
    }
}

impl HarmonicFunction {
    pub fn constant(space: SpaceForm, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(domain("constant must be finite"));
        }
        Ok(Self {
            variant: Variant::Constant(value),
            space,
            terms: Vec::new(),
            spectrum: OnceLock::new(),
        })
    }

    pub fn polynomial(space: SpaceForm, terms: Vec<Term>) -> Result<Self> {
        let n = space.dim();
        if !space.is_flat() && n != 2 {
            return Err(Error::Unsupported(format!(
                "Euclidean polynomials are harmonic on curved space only in dimension 2, got n = {n}"
            )));
        }
        if terms.is_empty() {
            return Err(domain("polynomial needs at least one term"));
        }
        let mut compiled = Vec::with_capacity(terms.len());
        for t in &terms {
            if !t.coefficient.is_finite() {
                return Err(domain("polynomial coefficients must be finite"));
            }
            let check = |i: usize| {
                if i >= n {
                    Err(domain(format!("coordinate index {i} out of range for n = {n}")))
                } else {
                    Ok(())
                }
            };
            match t.basis {
                Basis::Constant => {}
                Basis::Coordinate { index } => check(index)?,
                Basis::Product { i, j } | Basis::DiffSquares { i, j } => {
                    check(i)?;
                    check(j)?;
                    if i == j {
                        return Err(domain("quadratic basis elements need i != j"));
                    }
                }
                Basis::Axial { axis, .. } => check(axis)?,
            }
            let axial = match t.basis {
                Basis::Axial { degree, .. } => axial_coefficients(degree, n),
                _ => Vec::new(),
            };
            compiled.push(CompiledTerm {
                basis: t.basis.clone(),
                coefficient: t.coefficient,
                axial,
            });
        }
        Ok(Self {
            variant: Variant::Polynomial(terms),
            space,
            terms: compiled,
            spectrum: OnceLock::new(),
        })
    }

    pub fn poisson(space: SpaceForm, atoms: Vec<PoissonAtom>) -> Result<Self> {
        if space.is_flat() {
            return Err(Error::Unsupported(
                "Poisson kernels need negative curvature".into(),
            ));
        }
        if atoms.is_empty() {
            return Err(domain("Poisson combination needs at least one atom"));
        }
        let n = space.dim();
        let mut normed = Vec::with_capacity(atoms.len());
        for a in atoms {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(domain(format!(
                    "Poisson weights must be positive, got {}",
                    a.weight
                )));
            }
            if a.direction.len() != n {
                return Err(domain(format!(
                    "boundary direction has {} components, expected {n}",
                    a.direction.len()
                )));
            }
            let norm = a.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(domain(format!("boundary direction must be a unit vector, |zeta| = {norm}")));
            }
            normed.push(PoissonAtom {
                weight: a.weight,
                direction: a.direction.iter().map(|v| v / norm).collect(),
            });
        }
        Ok(Self {
            variant: Variant::Poisson(normed),
            space,
            terms: Vec::new(),
            spectrum: OnceLock::new(),
        })
    }

    /// Single Poisson kernel at `e_axis` with unit weight.
    pub fn poisson_atom(space: SpaceForm, axis: usize) -> Result<Self> {
        let mut z = vec![0.0; space.dim()];
        if axis >= z.len() {
            return Err(domain("axis out of range"));
        }
        z[axis] = 1.0;
        Self::poisson(space, vec![PoissonAtom { weight: 1.0, direction: z }])
    }

    /// Axial solid harmonic of the given degree about `e_0`.
    pub fn axial(space: SpaceForm, degree: usize) -> Result<Self> {
        Self::polynomial(
            space,
            vec![Term {
                basis: Basis::Axial { axis: 0, degree },
                coefficient: 1.0,
            }],
        )
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn space(&self) -> &SpaceForm {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// True when the function is constant (zero gradient everywhere).
    pub fn is_constant(&self) -> bool {
        match &self.variant {
            Variant::Constant(_) => true,
            Variant::Polynomial(_) => self
                .terms
                .iter()
                .all(|t| t.coefficient == 0.0 || t.basis.degree() == 0),
            Variant::Poisson(_) => false,
        }
    }

    /// True when the function is known to be positive everywhere.
    pub fn is_positive(&self) -> bool {
        match &self.variant {
            Variant::Constant(c) => *c > 0.0,
            Variant::Poisson(_) => true,
            Variant::Polynomial(_) => self.is_constant() && self.terms_constant_value() > 0.0,
        }
    }

    fn terms_constant_value(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.basis.degree() == 0)
            .map(|t| t.coefficient)
            .sum()
    }

    /// Axis of rotational symmetry, if the function has one.
    pub fn symmetry_axis(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        let unit = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        match &self.variant {
            Variant::Constant(_) => Some(unit(0)),
            Variant::Polynomial(_) => {
                let mut axis: Option<usize> = None;
                for t in &self.terms {
                    if t.coefficient == 0.0 {
                        continue;
                    }
                    match t.basis.symmetry_axis() {
                        None => return None,
                        Some(None) => {}
                        Some(Some(a)) => match axis {
                            None => axis = Some(a),
                            Some(b) if a == b => {}
                            Some(_) => return None,
                        },
                    }
                }
                Some(unit(axis.unwrap_or(0)))
            }
            Variant::Poisson(atoms) => {
                let first = &atoms[0].direction;
                let collinear = atoms.iter().all(|a| {
                    let dot: f64 = a.direction.iter().zip(first).map(|(x, y)| x * y).sum();
                    (dot.abs() - 1.0).abs() < 1e-12
                });
                collinear.then(|| first.clone())
            }
        }
    }

    /// Boundary directions of the Poisson atoms.
    pub fn peak_directions(&self) -> Vec<Vec<f64>> {
        match &self.variant {
            Variant::Poisson(atoms) => atoms.iter().map(|a| a.direction.clone()).collect(),
            _ => Vec::new(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain("point must be finite"));
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if !self.space.contains(r2) {
            if let Variant::Poisson(atoms) = &self.variant {
                for a in atoms {
                    if a.direction.iter().zip(x).all(|(z, v)| z == v) {
                        return Err(Error::SingularBoundary(format!(
                            "point coincides with boundary direction {:?}",
                            a.direction
                        )));
                    }
                }
            }
            return Err(domain(format!("|x|^2 = {r2} lies outside the unit ball")));
        }
        Ok(r2)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut g = vec![0.0; x.len()];
        Ok(self.value_and_gradient(x, &mut g))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Gradient> {
        let r2 = self.check_point(x)?;
        let mut g = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut g);
        let lambda = self.space.conformal_factor(r2);
        let e2: f64 = g.iter().map(|v| v * v).sum();
        Ok(Gradient {
            riemannian_norm_sq: e2 / (lambda * lambda),
            coords: g,
        })
    }

    /// Value and coordinate gradient at an in-domain point. No validation.
    pub(crate) fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        match &self.variant {
            Variant::Constant(c) => *c,
            Variant::Polynomial(_) => {
                let mut value = 0.0;
                for t in &self.terms {
                    value += t.coefficient * eval_term(t, x, grad);
                }
                value
            }
            Variant::Poisson(atoms) => {
                let n = x.len();
                let m = (n - 1) as f64;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let om = 1.0 - r2;
                let mut value = 0.0;
                for a in atoms {
                    let d2: f64 = x.iter().zip(&a.direction).map(|(p, z)| (p - z) * (p - z)).sum();
                    let p = (om / d2).powi(n as i32 - 1) * a.weight;
                    value += p;
                    let cx = -2.0 * m * p / om;
                    let cd = -2.0 * m * p / d2;
                    for i in 0..n {
                        grad[i] += cx * x[i] + cd * (x[i] - a.direction[i]);
                    }
                }
                value
            }
        }
    }

    /// Finite-difference Laplace-Beltrami residual at `x` with step `h`.
    ///
    /// Uses the conservative form `lambda^{-n} sum_i d_i(lambda^{n-2} d_i f)`
    /// with half-step metric factors. The sum is divided by the local scale
    /// `max(1, |f(x)|, lambda^{-n} sum_i |d_i(lambda^{n-2} d_i f)|)`, so a
    /// harmonic function with steep curvature is not penalised for the
    /// `O(h^2)` truncation of its individual second differences.
    pub fn harmonicity_residual(&self, x: &[f64], h: f64) -> Result<f64> {
        let r2 = self.check_point(x)?;
        if !(h > 0.0) {
            return Err(domain("finite-difference step must be positive"));
        }
        let n = x.len();
        let mut scratch = vec![0.0; n];
        let mut p = x.to_vec();
        let space = self.space;
        let a = |q: &[f64]| -> f64 {
            let s: f64 = q.iter().map(|v| v * v).sum();
            space.conformal_factor(s).powi(n as i32 - 2)
        };
        let f0 = self.value_and_gradient(x, &mut scratch);
        let (mut lap, mut magnitude) = (0.0, 0.0);
        for i in 0..n {
            let xi = x[i];
            p[i] = xi + h;
            if !self.space.contains(p.iter().map(|v| v * v).sum()) {
                return Err(domain("finite-difference stencil leaves the domain"));
            }
            let fp = self.value_and_gradient(&p, &mut scratch);
            p[i] = xi - h;
            if !self.space.contains(p.iter().map(|v| v * v).sum()) {
                return Err(domain("finite-difference stencil leaves the domain"));
            }
            let fm = self.value_and_gradient(&p, &mut scratch);
            p[i] = xi + 0.5 * h;
            let ap = a(&p);
            p[i] = xi - 0.5 * h;
            let am = a(&p);
            p[i] = xi;
            let term = (ap * (fp - f0) - am * (f0 - fm)) / (h * h);
            lap += term;
            magnitude += term.abs();
        }
        let ln = self.space.conformal_factor(r2).powi(n as i32);
        let scale = f0.abs().max(magnitude / ln).max(1.0);
        Ok((lap / ln).abs() / scale)
    }

    /// Degree decomposition `(d, eps_d)` with `eps_d = int_{S_1} v_d^2`, where
    /// `v_d` collects the terms of degree `d`. Computed once by quadrature on
    /// the unit sphere and cached.
    pub fn spectrum(&self) -> Result<&PolynomialSpectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let n = self.dim();
        let computed = match &self.variant {
            Variant::Poisson(_) => {
                return Err(Error::Unsupported(
                    "Poisson combinations have no finite polynomial spectrum".into(),
                ))
            }
            Variant::Constant(c) => {
                PolynomialSpectrum::new(n, vec![(0, c * c * crate::numeric::unit_sphere_area(n))])?
            }
            Variant::Polynomial(_) => {
                let mut degrees: Vec<usize> = self.terms.iter().map(|t| t.basis.degree()).collect();
                degrees.sort_unstable();
                degrees.dedup();
                let flat = SpaceForm::euclidean(n)?;
                let spec = QuadratureSpec::default().with_tol(1e-12).without_symmetry_reduction();
                let mut entries = Vec::new();
                for d in degrees {
                    let group: Vec<&CompiledTerm> =
                        self.terms.iter().filter(|t| t.basis.degree() == d).collect();
                    let g = FnIntegrand::new(|x: &[f64]| {
                        let mut scratch = vec![0.0; x.len()];
                        let v: f64 = group
                            .iter()
                            .map(|t| t.coefficient * eval_term(t, x, &mut scratch))
                            .sum();
                        v * v
                    });
                    let eps = sphere_integral(&g, &flat, 1.0, &spec)?.value;
                    if eps > 0.0 {
                        entries.push((d, eps));
                    }
                }
                PolynomialSpectrum::new(n, entries)?
            }
        };
        Ok(self.spectrum.get_or_init(|| computed))
    }
}

// Evaluates one basis element (without its coefficient) and adds
// coefficient * gradient into `grad`.
fn eval_term(t: &CompiledTerm, x: &[f64], grad: &mut [f64]) -> f64 {
    let c = t.coefficient;
    match t.basis {
        Basis::Constant => 1.0,
        Basis::Coordinate { index } => {
            grad[index] += c;
            x[index]
        }
        Basis::Product { i, j } => {
            grad[i] += c * x[j];
            grad[j] += c * x[i];
            x[i] * x[j]
        }
        Basis::DiffSquares { i, j } => {
            grad[i] += c * 2.0 * x[i];
            grad[j] -= c * 2.0 * x[j];
            x[i] * x[i] - x[j] * x[j]
        }
        Basis::Axial { axis, degree } => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let xa = x[axis];
            let d = degree as i32;
            let mut value = 0.0;
            // gradient: d/dx_a contributes (d-2k) x_a^{d-2k-1} r^{2k};
            // every coordinate gets 2k x_a^{d-2k} r^{2k-2} x_i
            let mut radial = 0.0;
            let mut along = 0.0;
            for (k, ck) in t.axial.iter().enumerate() {
                let k2 = 2 * k as i32;
                let pa = d - k2;
                let rk = r2.powi(k as i32);
                value += ck * xa.powi(pa) * rk;
                if pa > 0 {
                    along += ck * pa as f64 * xa.powi(pa - 1) * rk;
                }
                if k > 0 {
                    radial += ck * k2 as f64 * xa.powi(pa) * r2.powi(k as i32 - 1);
                }
            }
            for (i, g) in grad.iter_mut().enumerate() {
                *g += c * radial * x[i];
            }
            grad[axis] += c * along;
            value
        }
    }
}
