//! Terminating Gauss hypergeometric sums and the closed form of the sphere
//! energy `Q(R) = int_{S_R} P^2` of a single Poisson kernel on hyperbolic space.
//!
//! For `n >= 3`,
//! `Q(R) = c1 sinh^{n-1}(R) F(1-n, (n-1)/2, (5-3n)/2; e^{2R}) / e^{(n-1)R}`,
//! which collects into `sum_{j=-(n-1)}^{n-1} alpha_j e^{2jR}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::harmonics::HarmonicFunction;
use crate::mu::{FieldIntegrand, FieldQuantity};
use crate::numeric::CompensatedSum;
use crate::quadrature::{sphere_integral, QuadratureSpec};
use crate::spaceform::SpaceForm;

/// Tolerance used when anchoring `c1` against quadrature.
pub const CALIBRATION_TOL: f64 = 1e-12;

/// `2F1(a, b; c; z)` for a non-positive integer `a`, summed exactly up to `m = |a|`.
pub fn hyp2f1_terminating(a: i64, b: f64, c: f64, z: f64) -> Result<f64> {
    if a > 0 {
        return Err(domain(format!("first parameter must be a non-positive integer, got {a}")));
    }
    let top = (-a) as usize;
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    acc.add(term);
    for m in 0..top {
        let mf = m as f64;
        if c + mf == 0.0 {
            return Err(Error::ParameterConflict(format!(
                "(c)_m vanishes at m = {} before the series terminates at {top}",
                m + 1
            )));
        }
        term *= (a as f64 + mf) * (b + mf) / ((c + mf) * (mf + 1.0)) * z;
        acc.add(term);
    }
    Ok(acc.value())
}

/// Parameters `(a, b, c)` of the hypergeometric factor in `Q` for dimension `n`.
pub fn q_parameters(n: usize) -> (i64, f64, f64) {
    let nf = n as f64;
    (1 - n as i64, (nf - 1.0) / 2.0, (5.0 - 3.0 * nf) / 2.0)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 {
        return Err(Error::Unsupported(
            "the hypergeometric series does not terminate in dimension 2".into(),
        ));
    }
    if n < 2 {
        return Err(domain(format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

/// `Q(R)` from the hypergeometric form. Loses accuracy only when
/// `e^{2(n-1)R}` overflows; [`QFormEvaluation::eval`] has no such limit.
pub fn q_closed_form(n: usize, r: f64, c1: f64) -> Result<f64> {
    check_dim(n)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("R must be positive, got {r}")));
    }
    let (a, b, c) = q_parameters(n);
    let f = hyp2f1_terminating(a, b, c, (2.0 * r).exp())?;
    let m = (n - 1) as i32;
    // sinh^{n-1}(R) / e^{(n-1)R} = ((1 - e^{-2R}) / 2)^{n-1}
    let ratio = (-(-2.0 * r).exp_m1() / 2.0).powi(m);
    Ok(c1 * ratio * f)
}

/// Sphere energy of the Poisson kernel with pole `e_0` on `H^n` by quadrature.
pub fn q_quadrature(n: usize, curvature: f64, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let space = SpaceForm::new(n, curvature)?;
    if space.is_flat() {
        return Err(Error::Unsupported("the Poisson kernel needs negative curvature".into()));
    }
    let p = HarmonicFunction::poisson_atom(space, 0)?;
    let g = FieldIntegrand::new(&p, FieldQuantity::Square);
    Ok(sphere_integral(&g, &space, r, spec)?.value)
}

/// Anchors `c1` so that the closed form matches quadrature at `R = 1`.
pub fn calibrate_c1(n: usize) -> Result<f64> {
    check_dim(n)?;
    let spec = QuadratureSpec::default().with_tol(CALIBRATION_TOL);
    let quad = q_quadrature(n, -1.0, 1.0, &spec)?;
    Ok(quad / q_closed_form(n, 1.0, 1.0)?)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact coefficients of the hypergeometric polynomial in `z` for dimension `n`.
fn hyp_poly_exact(n: usize) -> Result<Vec<BigRational>> {
    let top = n - 1;
    let a = -(top as i64);
    // b and c carry a denominator of 2
    let b2 = n as i64 - 1;
    let c2 = 5 - 3 * n as i64;
    let mut out = vec![BigRational::one()];
    for m in 0..top as i64 {
        let cm = ratio(c2 + 2 * m, 2);
        if cm.is_zero() {
            return Err(Error::ParameterConflict(format!(
                "(c)_m vanishes at m = {} for n = {n}",
                m + 1
            )));
        }
        let factor = ratio(a + m, 1) * ratio(b2 + 2 * m, 2) / (cm * ratio(m + 1, 1));
        let next = out.last().unwrap() * factor;
        out.push(next);
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact exponential-sum coefficients of `Q / c1`, indexed by `j + n - 1`.
pub fn q_alpha_exact(n: usize) -> Result<Vec<BigRational>> {
    check_dim(n)?;
    let m = n - 1;
    let f = hyp_poly_exact(n)?;
    let scale = BigRational::new(BigInt::one(), BigInt::from(2u32).pow(m as u32));
    let mut alpha = vec![BigRational::zero(); 2 * m + 1];
    // sinh^m(R) e^{-mR} = 2^{-m} sum_i (-1)^i C(m, i) e^{-2iR}
    for i in 0..=m {
        let mut bin = BigRational::from_integer(binomial(m, i));
        if i % 2 == 1 {
            bin = -bin;
        }
        for (deg, fm) in f.iter().enumerate() {
            // exponent 2(deg - i)R
            let idx = deg + m - i;
            alpha[idx] += &bin * fm * &scale;
        }
    }
    Ok(alpha)
}

/// Exponential-sum form of `Q(R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFormEvaluation {
    pub n: usize,
    pub c1: f64,
    /// `alpha[j + n - 1]` multiplies `e^{2jR}`.
    pub alpha: Vec<f64>,
}

impl QFormEvaluation {
    pub fn eval(&self, r: f64) -> f64 {
        let m = (self.n - 1) as i64;
        let mut acc = CompensatedSum::new();
        for (idx, a) in self.alpha.iter().enumerate() {
            let j = idx as i64 - m;
            acc.add(a * (2.0 * j as f64 * r).exp());
        }
        acc.value()
    }

    /// `int_0^R Q(t) dt`, the ball energy of the kernel.
    pub fn ball_energy(&self, r: f64) -> f64 {
        let m = (self.n - 1) as i64;
        let mut acc = CompensatedSum::new();
        for (idx, a) in self.alpha.iter().enumerate() {
            let j = idx as i64 - m;
            if j == 0 {
                acc.add(a * r);
            } else {
                let jf = 2.0 * j as f64;
                acc.add(a * (jf * r).exp_m1() / jf);
            }
        }
        acc.value()
    }

    /// Index range `-(n-1)..=(n-1)` paired with the coefficients.
    pub fn indexed(&self) -> Vec<(i64, f64)> {
        let m = (self.n - 1) as i64;
        self.alpha.iter().enumerate().map(|(i, a)| (i as i64 - m, *a)).collect()
    }
}

/// Coefficients `alpha_j` for a given `c1`, from exact rational arithmetic.
pub fn q_coefficients(n: usize, c1: f64) -> Result<QFormEvaluation> {
    let exact = q_alpha_exact(n)?;
    let alpha = exact
        .iter()
        .map(|a| {
            a.to_f64()
                .map(|v| c1 * v)
                .ok_or_else(|| domain("coefficient not representable"))
        })
        .collect::<Result<Vec<_>>>()?;
    if exact.last().map_or(true, |a| !a.is_positive()) {
        return Err(Error::NumericalViolation("leading coefficient is not positive".into()));
    }
    Ok(QFormEvaluation { n, c1, alpha })
}

/// Calibrated coefficient form for dimension `n`.
pub fn calibrated_q(n: usize) -> Result<QFormEvaluation> {
    q_coefficients(n, calibrate_c1(n)?)
}

fn check_rescale(k_prime: f64) -> Result<f64> {
    if !(k_prime < 0.0) || !k_prime.is_finite() {
        return Err(domain(format!("k' must be negative, got {k_prime}")));
    }
    Ok(k_prime.abs().sqrt())
}

/// `Q` on the space of curvature `k' < 0`:
/// `|k'|^{-(n-1)/2} Q(sqrt|k'| R)`.
pub fn rescaled_q(q: &QFormEvaluation, k_prime: f64, r: f64) -> Result<f64> {
    let s = check_rescale(k_prime)?;
    Ok(s.powi(1 - q.n as i32) * q.eval(s * r))
}

/// Ball energy of the kernel on the space of curvature `k' < 0`.
pub fn rescaled_ball_energy(q: &QFormEvaluation, k_prime: f64, r: f64) -> Result<f64> {
    let s = check_rescale(k_prime)?;
    Ok(s.powi(-(q.n as i32)) * q.ball_energy(s * r))
}
