use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this space (e.g. ball coordinates in flat space).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Evaluation point coincides with a boundary pole of a Poisson atom.
    #[error("singular boundary point: {0}")]
    SingularBoundary(String),

    /// A quantity with a proven bound came out violating it.
    /// This always means an upstream numerical failure.
    #[error("numerical violation: {0}")]
    NumericalViolation(String),

    /// The refinement budget ran out before the tolerance was met.
    #[error("quadrature did not converge: best estimate {best} with error {err_est} (target relative {target})")]
    NonConvergence { best: f64, err_est: f64, target: f64 },

    /// A Pochhammer factor of the lower parameter vanished before the series terminated.
    #[error("hypergeometric parameter conflict: {0}")]
    ParameterConflict(String),

    /// A scenario precondition does not hold for the supplied function.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Dirichlet energy keeps growing over the tail of the grid.
    #[error("not finite Dirichlet energy: {0}")]
    NotFiniteEnergy(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::SingularBoundary(_) => "singular-boundary",
            Error::NumericalViolation(_) => "numerical-violation",
            Error::NonConvergence { .. } => "non-convergence",
            Error::ParameterConflict(_) => "parameter-conflict",
            Error::Precondition(_) => "precondition",
            Error::NotFiniteEnergy(_) => "not-finite-energy",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
