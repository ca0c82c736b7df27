//! Integration over geodesic spheres and balls of the model spaces.
//!
//! Sphere integrals use a tensor product rule over hyperspherical angles:
//! composite Gauss-Legendre in each polar angle (with the `sin^j` Jacobian
//! folded into the weights) and either a uniform trapezoid rule or graded
//! Gauss-Legendre panels in the azimuth. Integrands that concentrate near
//! boundary directions (Poisson kernels close to the ideal boundary) report
//! those directions, and panels are graded geometrically toward them.
//! Rotationally symmetric integrands reduce to a single polar integral.
//!
//! Every estimate is produced twice, with the per-panel order `p` and `2p`;
//! the higher-order value is returned and the difference is the error estimate.
//! Reductions run in a fixed order, so results do not depend on thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::numeric::{unit_sphere_area, CompensatedSum};
use crate::spaceform::SpaceForm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per angular panel (doubled for the error estimate).
    pub angular_order: usize,
    /// Gauss-Legendre nodes per radial panel (doubled for the error estimate).
    pub radial_order: usize,
    pub target_rel_tol: f64,
    pub max_refinements: usize,
    /// Use the one-dimensional polar reduction for axially symmetric integrands.
    pub symmetry_reduction: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            angular_order: 8,
            radial_order: 8,
            target_rel_tol: 1e-9,
            max_refinements: 6,
            symmetry_reduction: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.angular_order < 4 {
            return Err(domain("angular_order must be at least 4"));
        }
        if self.radial_order < 8 {
            return Err(domain("radial_order must be at least 8"));
        }
        if !(self.target_rel_tol > 0.0 && self.target_rel_tol <= 1e-2) {
            return Err(domain("target_rel_tol must lie in (0, 1e-2]"));
        }
        if self.max_refinements < 1 {
            return Err(domain("max_refinements must be at least 1"));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.target_rel_tol = tol;
        self
    }

    pub fn without_symmetry_reduction(mut self) -> Self {
        self.symmetry_reduction = false;
        self
    }
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

impl Estimate {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.err_est == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.err_est / self.value.abs()
        }
    }
}

/// Something integrable over spheres centred at the origin of a model space.
///
/// `eval` receives the model-coordinate point `x = rho * omega` and the unit
/// direction `omega`, and writes `width()` components.
pub trait SphereIntegrand: Sync {
    fn width(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], omega: &[f64], out: &mut [f64]);

    /// Unit axis of rotational symmetry, if any.
    fn axis(&self) -> Option<Vec<f64>> {
        None
    }

    /// Boundary directions where the integrand concentrates as the sphere
    /// approaches the ideal boundary.
    fn peaks(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// Scalar integrand built from a closure.
pub struct FnIntegrand<F> {
    f: F,
    axis: Option<Vec<f64>>,
    peaks: Vec<Vec<f64>>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            axis: None,
            peaks: Vec::new(),
        }
    }

    pub fn axial(mut self, axis: Vec<f64>) -> Self {
        self.axis = Some(axis);
        self
    }

    pub fn with_peaks(mut self, peaks: Vec<Vec<f64>>) -> Self {
        self.peaks = peaks;
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SphereIntegrand for FnIntegrand<F> {
    fn eval(&self, x: &[f64], _omega: &[f64], out: &mut [f64]) {
        out[0] = (self.f)(x);
    }

    fn axis(&self) -> Option<Vec<f64>> {
        self.axis.clone()
    }

    fn peaks(&self) -> Vec<Vec<f64>> {
        self.peaks.clone()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_p).
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; p];
    let mut weights = vec![0.0; p];
    let pf = p as f64;
    for i in 0..p.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (pf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=p {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if p == 0 {
                break;
            }
            let pn = if p == 1 { z } else { p1 };
            let pm = if p == 1 { 1.0 } else { p0 };
            dp = pf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[p - 1 - i] = z;
        weights[i] = w;
        weights[p - 1 - i] = w;
    }
    if p % 2 == 1 {
        nodes[p / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite rule on consecutive panels given by `breaks`.
#[derive(Debug, Clone)]
pub(crate) struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn composite(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Self { nodes, weights }
    }

    fn trapezoid_periodic(m: usize) -> Self {
        let h = 2.0 * PI / m as f64;
        Self {
            nodes: (0..m).map(|i| i as f64 * h).collect(),
            weights: vec![h; m],
        }
    }
}

/// Breakpoints on `[lo, hi]`: `base` uniform panels plus geometric grading
/// (ratio 2, smallest panel `min_width`) toward each peak, each panel then
/// split into `2^level` equal pieces.
pub(crate) fn graded_breaks(
    lo: f64,
    hi: f64,
    base: usize,
    peaks: &[f64],
    min_width: Option<f64>,
    level: usize,
) -> Vec<f64> {
    let len = hi - lo;
    let mut b: Vec<f64> = (0..=base).map(|i| lo + len * i as f64 / base as f64).collect();
    if let Some(w) = min_width {
        for &p in peaks {
            if p < lo - len || p > hi + len {
                continue;
            }
            b.push(p);
            let mut d = w;
            while d < len {
                b.push(p - d);
                b.push(p + d);
                d *= 2.0;
            }
        }
    }
    b.retain(|v| *v >= lo && *v <= hi);
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    let eps = 1e-13 * len;
    b.dedup_by(|a, c| (*a - *c).abs() <= eps);
    if let Some(first) = b.first_mut() {
        *first = lo;
    }
    if let Some(last) = b.last_mut() {
        *last = hi;
    }
    if level == 0 {
        return b;
    }
    let split = 1usize << level;
    let mut out = Vec::with_capacity((b.len() - 1) * split + 1);
    for pair in b.windows(2) {
        for s in 0..split {
            out.push(pair[0] + (pair[1] - pair[0]) * s as f64 / split as f64);
        }
    }
    out.push(hi);
    out
}

/// Peak half-width in angle for a sphere of model radius `rho`; `None` when
/// integrands are smooth enough on the sphere that no grading is needed.
fn peak_width(space: &SpaceForm, r: f64) -> Option<f64> {
    if space.is_flat() {
        return None;
    }
    let rho = space.model_radius(r);
    let gap = space.one_minus_rho_sq(r) / (1.0 + rho);
    if gap > 0.25 {
        None
    } else {
        Some((0.5 * gap / rho.max(1e-300)).max(1e-9))
    }
}

/// Hyperspherical angles of a direction: polar angles for levels `0..n-2`
/// and azimuth, each `None` once the remaining components vanish.
fn direction_angles(h: &[f64]) -> (Vec<Option<f64>>, Option<f64>) {
    let n = h.len();
    let mut polar = Vec::with_capacity(n.saturating_sub(2));
    for j in 0..n.saturating_sub(2) {
        let tail: f64 = h[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if tail < 1e-12 {
            polar.push(None);
        } else {
            let rest: f64 = h[j + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            polar.push(Some(rest.atan2(h[j])));
        }
    }
    let az_norm = (h[n - 2] * h[n - 2] + h[n - 1] * h[n - 1]).sqrt();
    let az = if az_norm < 1e-12 {
        None
    } else {
        let a = h[n - 1].atan2(h[n - 2]);
        Some(if a < 0.0 { a + 2.0 * PI } else { a })
    };
    (polar, az)
}

struct LevelNodes {
    cos: Vec<f64>,
    sin: Vec<f64>,
    w: Vec<f64>,
}

impl LevelNodes {
    fn from_rule(rule: Rule1D, sin_power: i32) -> Self {
        let cos = rule.nodes.iter().map(|t| t.cos()).collect();
        let sin: Vec<f64> = rule.nodes.iter().map(|t| t.sin()).collect();
        let w = rule
            .weights
            .iter()
            .zip(&sin)
            .map(|(w, s)| w * s.powi(sin_power))
            .collect();
        Self { cos, sin, w }
    }
}

/// Tensor product rule over S^{n-1}; weights include every Jacobian factor,
/// so they sum to `|S^{n-1}|`.
struct SphereRule {
    n: usize,
    polar: Vec<LevelNodes>,
    azimuth: LevelNodes,
}

impl SphereRule {
    fn build(n: usize, order: usize, peaks: &[Vec<f64>], width: Option<f64>, level: usize) -> Self {
        let angles: Vec<_> = peaks.iter().map(|p| direction_angles(p)).collect();
        let polar = (0..n - 2)
            .map(|j| {
                let pk: Vec<f64> = angles.iter().filter_map(|(pl, _)| pl[j]).collect();
                let br = graded_breaks(0.0, PI, 2, &pk, width, level);
                LevelNodes::from_rule(Rule1D::composite(&br, order), (n - 2 - j) as i32)
            })
            .collect();
        let az_peaks: Vec<f64> = angles
            .iter()
            .filter_map(|(_, a)| *a)
            .flat_map(|a| [a - 2.0 * PI, a, a + 2.0 * PI])
            .collect();
        let azimuth = if width.is_some() && !az_peaks.is_empty() {
            let br = graded_breaks(0.0, 2.0 * PI, 4, &az_peaks, width, level);
            LevelNodes::from_rule(Rule1D::composite(&br, order), 0)
        } else {
            LevelNodes::from_rule(Rule1D::trapezoid_periodic(2 * order << level), 0)
        };
        Self { n, polar, azimuth }
    }

    /// Integrates `g` over the sphere of model radius `rho`. Returns per-component
    /// sums and sums of absolute contributions.
    fn integrate<G: SphereIntegrand + ?Sized>(&self, g: &G, rho: f64) -> (Vec<f64>, Vec<f64>) {
        let width = g.width();
        let n = self.n;
        if n == 2 {
            let mut acc = vec![CompensatedSum::new(); width];
            let mut abs = vec![0.0; width];
            let mut omega = vec![0.0; 2];
            let mut x = vec![0.0; 2];
            let mut out = vec![0.0; width];
            for i in 0..self.azimuth.w.len() {
                omega[0] = self.azimuth.cos[i];
                omega[1] = self.azimuth.sin[i];
                x[0] = rho * omega[0];
                x[1] = rho * omega[1];
                g.eval(&x, &omega, &mut out);
                let w = self.azimuth.w[i];
                for c in 0..width {
                    acc[c].add(w * out[c]);
                    abs[c] += (w * out[c]).abs();
                }
            }
            return (acc.iter().map(|a| a.value()).collect(), abs);
        }
        // parallel over the outermost polar nodes, reduced in index order
        let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..self.polar[0].w.len())
            .into_par_iter()
            .map(|i0| {
                let mut acc = vec![CompensatedSum::new(); width];
                let mut abs = vec![0.0; width];
                let mut omega = vec![0.0; n];
                let mut x = vec![0.0; n];
                let mut out = vec![0.0; width];
                let mut idx = vec![0usize; n - 2];
                idx[0] = i0;
                loop {
                    // assemble the direction for the current multi-index
                    let mut sp = 1.0;
                    let mut w = 1.0;
                    for (j, lv) in self.polar.iter().enumerate() {
                        let k = idx[j];
                        omega[j] = sp * lv.cos[k];
                        sp *= lv.sin[k];
                        w *= lv.w[k];
                    }
                    for a in 0..self.azimuth.w.len() {
                        omega[n - 2] = sp * self.azimuth.cos[a];
                        omega[n - 1] = sp * self.azimuth.sin[a];
                        for d in 0..n {
                            x[d] = rho * omega[d];
                        }
                        g.eval(&x, &omega, &mut out);
                        let wa = w * self.azimuth.w[a];
                        for c in 0..width {
                            acc[c].add(wa * out[c]);
                            abs[c] += (wa * out[c]).abs();
                        }
                    }
                    // advance the odometer over inner polar levels
                    let mut j = n - 3;
                    loop {
                        if j == 0 {
                            return (acc.iter().map(|a| a.value()).collect(), abs);
                        }
                        idx[j] += 1;
                        if idx[j] < self.polar[j].w.len() {
                            break;
                        }
                        idx[j] = 0;
                        j -= 1;
                    }
                }
            })
            .collect();
        let mut acc = vec![CompensatedSum::new(); width];
        let mut abs = vec![0.0; width];
        for (v, a) in partials {
            for c in 0..width {
                acc[c].add(v[c]);
                abs[c] += a[c];
            }
        }
        (acc.iter().map(|a| a.value()).collect(), abs)
    }
}

/// One-dimensional polar rule for integrands symmetric about `axis`.
struct AxialRule {
    axis: Vec<f64>,
    perp: Vec<f64>,
    polar: LevelNodes,
    factor: f64,
}

impl AxialRule {
    fn build(n: usize, axis: &[f64], order: usize, peaks: &[Vec<f64>], width: Option<f64>, level: usize) -> Self {
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        let axis: Vec<f64> = axis.iter().map(|v| v / norm).collect();
        // least aligned coordinate vector, orthogonalised
        let j = (0..n)
            .min_by(|a, b| axis[*a].abs().partial_cmp(&axis[*b].abs()).unwrap())
            .unwrap();
        let mut perp: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let dot = axis[j];
        for i in 0..n {
            perp[i] -= dot * axis[i];
        }
        let pn = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
        perp.iter_mut().for_each(|v| *v /= pn);
        let pk: Vec<f64> = peaks
            .iter()
            .map(|p| {
                let c: f64 = p.iter().zip(&axis).map(|(a, b)| a * b).sum();
                c.clamp(-1.0, 1.0).acos()
            })
            .collect();
        let br = graded_breaks(0.0, PI, 2, &pk, width, level);
        let polar = LevelNodes::from_rule(Rule1D::composite(&br, order), (n - 2) as i32);
        Self {
            axis,
            perp,
            polar,
            factor: unit_sphere_area(n - 1),
        }
    }

    fn integrate<G: SphereIntegrand + ?Sized>(&self, g: &G, rho: f64) -> (Vec<f64>, Vec<f64>) {
        let width = g.width();
        let n = self.axis.len();
        let mut acc = vec![CompensatedSum::new(); width];
        let mut abs = vec![0.0; width];
        let mut omega = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut out = vec![0.0; width];
        for i in 0..self.polar.w.len() {
            let (c, s) = (self.polar.cos[i], self.polar.sin[i]);
            for d in 0..n {
                omega[d] = c * self.axis[d] + s * self.perp[d];
                x[d] = rho * omega[d];
            }
            g.eval(&x, &omega, &mut out);
            let w = self.factor * self.polar.w[i];
            for k in 0..width {
                acc[k].add(w * out[k]);
                abs[k] += (w * out[k]).abs();
            }
        }
        (acc.iter().map(|a| a.value()).collect(), abs)
    }
}

const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

fn accepted(value: f64, err: f64, abs_scale: f64, tol: f64) -> bool {
    err <= tol * value.abs() || err <= ROUNDOFF_FLOOR * abs_scale
}

/// Vector-valued sphere integral with per-component estimates.
pub fn sphere_integral_vec<G: SphereIntegrand + ?Sized>(
    g: &G,
    space: &SpaceForm,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate>> {
    spec.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("sphere radius must be positive, got {r}")));
    }
    let n = space.dim();
    let rho = space.model_radius(r);
    let density = space.area_density(r);
    let width = peak_width(space, r);
    let peaks = g.peaks();
    let axis = if spec.symmetry_reduction { g.axis() } else { None };
    let p = spec.angular_order;
    let mut best: Option<Vec<Estimate>> = None;
    for level in 0..=spec.max_refinements {
        let (lo, hi) = match &axis {
            Some(a) => (
                AxialRule::build(n, a, p, &peaks, width, level).integrate(g, rho),
                AxialRule::build(n, a, 2 * p, &peaks, width, level).integrate(g, rho),
            ),
            None => (
                SphereRule::build(n, p, &peaks, width, level).integrate(g, rho),
                SphereRule::build(n, 2 * p, &peaks, width, level).integrate(g, rho),
            ),
        };
        let (v_lo, _) = lo;
        let (v_hi, abs_hi) = hi;
        let est: Vec<Estimate> = v_lo
            .iter()
            .zip(&v_hi)
            .map(|(a, b)| Estimate {
                value: b * density,
                err_est: (b - a).abs() * density,
            })
            .collect();
        let ok = est
            .iter()
            .zip(&abs_hi)
            .all(|(e, s)| accepted(e.value, e.err_est, s * density, spec.target_rel_tol));
        if ok {
            return Ok(est);
        }
        best = Some(est);
    }
    let best = best.unwrap();
    let worst = best
        .iter()
        .max_by(|a, b| a.rel_err().partial_cmp(&b.rel_err()).unwrap())
        .unwrap();
    Err(Error::NonConvergence {
        best: worst.value,
        err_est: worst.err_est,
        target: spec.target_rel_tol,
    })
}

/// `int_{S_R} g d sigma` on the geodesic sphere of radius `R` about the origin.
pub fn sphere_integral<G: SphereIntegrand + ?Sized>(
    g: &G,
    space: &SpaceForm,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    Ok(sphere_integral_vec(g, space, r, spec)?[0])
}

/// Radial breakpoints from 0 through every grid radius, subdivided so no
/// panel is wider than `max_width`.
pub(crate) fn radial_breaks(grid: &[f64], max_width: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut prev = 0.0;
    for &r in grid {
        let pieces = ((r - prev) / max_width).ceil().max(1.0) as usize;
        for i in 1..=pieces {
            out.push(prev + (r - prev) * i as f64 / pieces as f64);
        }
        prev = r;
    }
    out
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("radius grid is empty"));
    }
    if grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(domain("radius grid must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("radius grid must be strictly increasing"));
    }
    Ok(())
}

const RADIAL_PANEL: f64 = 0.5;

/// Generic radial assembly shared by ball integrals and growth profiles.
///
/// For every grid radius `R` and output slot `j`,
/// `out_j(R) = int_0^R kernel_j(R, t, s(t)) dt` where `s(t)` are the sphere
/// integrals of `g` at radius `t`. The kernel must be linear in `s` with
/// non-negative coefficients, so that sphere errors propagate through it.
pub(crate) fn radial_integrate<G, K>(
    g: &G,
    space: &SpaceForm,
    grid: &[f64],
    spec: &QuadratureSpec,
    n_out: usize,
    kernel: K,
) -> Result<Vec<Vec<Estimate>>>
where
    G: SphereIntegrand + ?Sized,
    K: Fn(f64, f64, &[f64], &mut [f64]) + Sync,
{
    spec.validate()?;
    check_grid(grid)?;
    let sphere_spec = spec.with_tol(spec.target_rel_tol / 4.0);
    let width = g.width();
    let mut last: Option<Vec<Vec<Estimate>>> = None;
    for level in 0..=spec.max_refinements {
        let breaks = radial_breaks(grid, RADIAL_PANEL / (1usize << level) as f64);
        let lo = Rule1D::composite(&breaks, spec.radial_order);
        let hi = Rule1D::composite(&breaks, 2 * spec.radial_order);
        let nodes: Vec<f64> = lo.nodes.iter().chain(&hi.nodes).copied().collect();
        let sphere: Vec<Vec<Estimate>> = nodes
            .par_iter()
            .map(|&t| sphere_integral_vec(g, space, t, &sphere_spec))
            .collect::<Result<_>>()?;
        let (s_lo, s_hi) = sphere.split_at(lo.nodes.len());
        let mut results = Vec::with_capacity(grid.len());
        let mut all_ok = true;
        let mut vals = vec![0.0; width];
        let mut errs = vec![0.0; width];
        let mut kv = vec![0.0; n_out];
        let mut ke = vec![0.0; n_out];
        for &r in grid {
            let mut acc_lo = vec![CompensatedSum::new(); n_out];
            let mut acc_hi = vec![CompensatedSum::new(); n_out];
            let mut abs_hi = vec![0.0; n_out];
            let mut sph_err = vec![0.0; n_out];
            for (i, &t) in lo.nodes.iter().enumerate() {
                if t >= r {
                    break;
                }
                for c in 0..width {
                    vals[c] = s_lo[i][c].value;
                }
                kernel(r, t, &vals, &mut kv);
                for j in 0..n_out {
                    acc_lo[j].add(lo.weights[i] * kv[j]);
                }
            }
            for (i, &t) in hi.nodes.iter().enumerate() {
                if t >= r {
                    break;
                }
                for c in 0..width {
                    vals[c] = s_hi[i][c].value;
                    errs[c] = s_hi[i][c].err_est;
                }
                kernel(r, t, &vals, &mut kv);
                kernel(r, t, &errs, &mut ke);
                for j in 0..n_out {
                    acc_hi[j].add(hi.weights[i] * kv[j]);
                    abs_hi[j] += (hi.weights[i] * kv[j]).abs();
                    sph_err[j] += hi.weights[i] * ke[j].abs();
                }
            }
            let row: Vec<Estimate> = (0..n_out)
                .map(|j| {
                    let v = acc_hi[j].value();
                    Estimate {
                        value: v,
                        err_est: (v - acc_lo[j].value()).abs() + sph_err[j],
                    }
                })
                .collect();
            for (j, e) in row.iter().enumerate() {
                if !accepted(e.value, e.err_est, abs_hi[j], spec.target_rel_tol) {
                    all_ok = false;
                }
            }
            results.push(row);
        }
        if all_ok {
            return Ok(results);
        }
        last = Some(results);
    }
    let last = last.unwrap();
    let worst = last
        .iter()
        .flatten()
        .max_by(|a, b| a.rel_err().partial_cmp(&b.rel_err()).unwrap())
        .unwrap();
    Err(Error::NonConvergence {
        best: worst.value,
        err_est: worst.err_est,
        target: spec.target_rel_tol,
    })
}

/// `int_{B_R} g d mu` over the geodesic ball of radius `R`.
pub fn ball_integral<G: SphereIntegrand + ?Sized>(
    g: &G,
    space: &SpaceForm,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let out = radial_integrate(g, space, &[r], spec, 1, |_, _, s, o| o[0] = s[0])?;
    Ok(out[0][0])
}

/// Running ball integral and its iterated radial integral at one grid radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeValue {
    pub radius: f64,
    /// `int_{B_r} g`.
    pub running: Estimate,
    /// `int_0^r int_{B_t} g dt`.
    pub iterated: Estimate,
}

/// Running ball integrals along an increasing grid, plus the iterated integral
/// `int_0^R (int_{B_t} g) dt = int_0^R (R - t) s(t) dt`.
pub fn cumulative_profile<G: SphereIntegrand + ?Sized>(
    g: &G,
    space: &SpaceForm,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<CumulativeValue>> {
    let out = radial_integrate(g, space, grid, spec, 2, |r, t, s, o| {
        o[0] = s[0];
        o[1] = (r - t) * s[0];
    })?;
    Ok(grid
        .iter()
        .zip(out)
        .map(|(&radius, row)| CumulativeValue {
            radius,
            running: row[0],
            iterated: row[1],
        })
        .collect())
}
