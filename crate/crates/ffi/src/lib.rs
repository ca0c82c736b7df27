//! C ABI over `price_lab`.
//!
//! Every fallible function returns a [`PlStatus`] and writes its result through
//! an out-pointer. On failure, [`pl_last_error_message`] describes the error
//! for the calling thread. Handles are opaque and must be released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use price_lab::config::FunctionConfig;
use price_lab::hypergeom;
use price_lab::mu::{growth_profile, mu_closed_form, GrowthSample};
use price_lab::{Error, HarmonicFunction, QuadratureSpec, SpaceForm};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    SingularBoundary = 4,
    NumericalViolation = 5,
    NonConvergence = 6,
    ParameterConflict = 7,
    Precondition = 8,
    NotFiniteEnergy = 9,
    InvalidJson = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlStatus {
    match e {
        Error::Domain(_) => PlStatus::Domain,
        Error::Unsupported(_) => PlStatus::Unsupported,
        Error::SingularBoundary(_) => PlStatus::SingularBoundary,
        Error::NumericalViolation(_) => PlStatus::NumericalViolation,
        Error::NonConvergence { .. } => PlStatus::NonConvergence,
        Error::ParameterConflict(_) => PlStatus::ParameterConflict,
        Error::Precondition(_) => PlStatus::Precondition,
        Error::NotFiniteEnergy(_) => PlStatus::NotFiniteEnergy,
    }
}

struct Failure(PlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PlStatus::NullPointer, format!("null pointer: {what}"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(Failure(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PlStatus::Panic
        }
    }
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Opaque harmonic function.
pub struct PlHarmonic {
    inner: HarmonicFunction,
}

unsafe fn boxed(out: *mut *mut PlHarmonic, f: HarmonicFunction) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(PlHarmonic { inner: f })))
}

/// Builds a function from JSON such as
/// `{"kind": "poisson", "atoms": [{"axis": 0}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_from_json(
    dim: usize,
    curvature: f64,
    json: *const c_char,
    out: *mut *mut PlHarmonic,
) -> PlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(PlStatus::InvalidJson, e.to_string()))?;
        let cfg: FunctionConfig = serde_json::from_str(text)
            .map_err(|e| Failure(PlStatus::InvalidJson, e.to_string()))?;
        let space = SpaceForm::new(dim, curvature)?;
        let f = cfg
            .build(space, "function")
            .map_err(|e| Failure(PlStatus::InvalidJson, e.to_string()))?;
        boxed(out, f)
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_constant(
    dim: usize,
    curvature: f64,
    value: f64,
    out: *mut *mut PlHarmonic,
) -> PlStatus {
    guard(|| boxed(out, HarmonicFunction::constant(SpaceForm::new(dim, curvature)?, value)?))
}

/// Poisson kernel with its pole at the unit vector of coordinate `axis`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_poisson_atom(
    dim: usize,
    curvature: f64,
    axis: usize,
    out: *mut *mut PlHarmonic,
) -> PlStatus {
    guard(|| boxed(out, HarmonicFunction::poisson_atom(SpaceForm::new(dim, curvature)?, axis)?))
}

/// Axial harmonic polynomial of the given degree about the first axis.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_axial(
    dim: usize,
    curvature: f64,
    degree: usize,
    out: *mut *mut PlHarmonic,
) -> PlStatus {
    guard(|| boxed(out, HarmonicFunction::axial(SpaceForm::new(dim, curvature)?, degree)?))
}

/// # Safety
/// `h` must come from a `pl_harmonic_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_free(h: *mut PlHarmonic) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle and `x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_evaluate(
    h: *const PlHarmonic,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        put(out, h.inner.evaluate(slice(x, len)?)?)
    })
}

/// Coordinate gradient into `grad` (`len` entries) and the squared norm in
/// the model metric into `norm_sq`.
///
/// # Safety
/// `h` must be a live handle; `x` and `grad` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_harmonic_gradient(
    h: *const PlHarmonic,
    x: *const f64,
    len: usize,
    grad: *mut f64,
    norm_sq: *mut f64,
) -> PlStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        let g = h.inner.gradient(slice(x, len)?)?;
        if grad.is_null() {
            return Err(null("grad"));
        }
        std::slice::from_raw_parts_mut(grad, len).copy_from_slice(&g.coords);
        put(norm_sq, g.riemannian_norm_sq)
    })
}

/// Mean curvature of the geodesic sphere of radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_mean_curvature(dim: usize, curvature: f64, r: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, SpaceForm::new(dim, curvature)?.mean_curvature(r)?))
}

/// Area of the geodesic sphere of radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_sphere_area(dim: usize, curvature: f64, r: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, SpaceForm::new(dim, curvature)?.sphere_area(r)?))
}

/// Volume of the geodesic ball of radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_ball_volume(dim: usize, curvature: f64, r: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, SpaceForm::new(dim, curvature)?.ball_volume(r)?))
}

/// Poincaré-ball radius of the geodesic sphere of radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_geodesic_to_ball_radius(dim: usize, curvature: f64, r: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, SpaceForm::new(dim, curvature)?.geodesic_to_ball_radius(r)?))
}

#[no_mangle]
pub extern "C" fn pl_mu_closed_form(degree: usize, dim: usize) -> f64 {
    mu_closed_form(degree, dim)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_hyp2f1_terminating(a: i64, b: f64, c: f64, z: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, hypergeom::hyp2f1_terminating(a, b, c, z)?))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_q_closed_form(dim: usize, r: f64, c1: f64, out: *mut f64) -> PlStatus {
    guard(|| put(out, hypergeom::q_closed_form(dim, r, c1)?))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_calibrate_c1(dim: usize, out: *mut f64) -> PlStatus {
    guard(|| put(out, hypergeom::calibrate_c1(dim)?))
}

/// Writes the `2 dim - 1` coefficients of the calibrated exponential-sum form
/// into `alpha`, which must hold `capacity >= 2 dim - 1` doubles.
///
/// # Safety
/// `alpha` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_q_coefficients(dim: usize, c1: f64, alpha: *mut f64, capacity: usize) -> PlStatus {
    guard(|| {
        let q = hypergeom::q_coefficients(dim, c1)?;
        if alpha.is_null() {
            return Err(null("alpha"));
        }
        if capacity < q.alpha.len() {
            return Err(Error::Domain(format!("need capacity {}", q.alpha.len())).into());
        }
        std::slice::from_raw_parts_mut(alpha, q.alpha.len()).copy_from_slice(&q.alpha);
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlSample {
    pub radius: f64,
    pub sphere_energy: f64,
    pub ball_energy: f64,
    pub dirichlet: f64,
    pub iterated: f64,
    pub mu: f64,
    pub almgren: f64,
}

impl From<&GrowthSample> for PlSample {
    fn from(s: &GrowthSample) -> Self {
        Self {
            radius: s.radius,
            sphere_energy: s.sphere_energy,
            ball_energy: s.ball_energy,
            dirichlet: s.dirichlet,
            iterated: s.iterated,
            mu: s.mu,
            almgren: s.almgren,
        }
    }
}

/// Opaque growth profile.
pub struct PlProfile {
    samples: Vec<PlSample>,
}

/// Growth profile on `len` increasing radii. A non-positive `target_rel_tol`
/// selects the default quadrature settings.
///
/// # Safety
/// `h` must be a live handle, `radii` must point to `len` doubles and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_growth_profile(
    h: *const PlHarmonic,
    radii: *const f64,
    len: usize,
    target_rel_tol: f64,
    out: *mut *mut PlProfile,
) -> PlStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        let mut spec = QuadratureSpec::default();
        if target_rel_tol > 0.0 {
            spec = spec.with_tol(target_rel_tol);
        }
        let prof = growth_profile(&h.inner, slice(radii, len)?, &spec)?;
        let p = PlProfile {
            samples: prof.iter().map(PlSample::from).collect(),
        };
        put(out, Box::into_raw(Box::new(p)))
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live profile.
#[no_mangle]
pub unsafe extern "C" fn pl_profile_len(p: *const PlProfile) -> usize {
    p.as_ref().map_or(0, |p| p.samples.len())
}

/// # Safety
/// `p` must be a live profile and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_profile_sample(p: *const PlProfile, index: usize, out: *mut PlSample) -> PlStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        let s = p
            .samples
            .get(index)
            .ok_or_else(|| Failure(PlStatus::Domain, format!("index {index} out of range")))?;
        put(out, *s)
    })
}

/// # Safety
/// `p` must come from `pl_growth_profile` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pl_profile_free(p: *mut PlProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
