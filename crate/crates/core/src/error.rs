use thiserror::Error;

use crate::qstate::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix is not Hermitian (max violation {violation:.3e})")]
    NotHermitian { violation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(ValidationReport),

    #[error("invalid postselection basis: {0}")]
    InvalidBasis(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("postselection overlap |<b|psi>|^2 = {overlap:.3e} is below the cutoff")]
    ZeroOverlap { overlap: f64 },

    #[error("postselection probability <b|rho|b> = {prob:.3e} is below the cutoff")]
    ZeroProbability { prob: f64 },

    #[error("excluded probability mass {excluded_mass:.3e} exceeds the allowed {allowed:.3e}")]
    DegenerateEnsemble { excluded_mass: f64, allowed: f64 },

    #[error("loss has imaginary residue {imag:.3e}")]
    NonRealLoss { imag: f64 },

    #[error("pointer postselection probability {p_post:.3e} is below the cutoff")]
    ZeroPostselection { p_post: f64 },

    #[error("translated pointer leaks {leaked:.3e} probability off the grid")]
    GridOverflow { leaked: f64 },

    #[error("grid resolution guard: {0}")]
    ResolutionGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),
}
