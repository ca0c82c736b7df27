//! Growth of harmonic functions on constant-curvature spaces.
//!
//! The crate evaluates harmonic functions on Euclidean and hyperbolic space,
//! integrates their energies over geodesic spheres and balls, and derives the
//! `mu`-function, two-sided growth envelopes and the closed form of the
//! sphere energy of a single Poisson kernel.

pub mod cli;
pub mod config;
pub mod error;
pub mod harmonics;
pub mod hypergeom;
pub mod mu;
pub mod numeric;
pub mod price;
pub mod quadrature;
pub mod spaceform;

pub use error::{Error, Result};
pub use harmonics::{Basis, HarmonicFunction, PoissonAtom, Term, Variant};
pub use mu::{growth_profile, GrowthSample, PolynomialSpectrum};
pub use quadrature::{Estimate, QuadratureSpec};
pub use spaceform::SpaceForm;
