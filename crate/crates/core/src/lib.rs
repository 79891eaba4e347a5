//! Weak values and Bayes estimators for observables on pre- and postselected
//! ensembles.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices, a Jacobi Hermitian eigensolver and
//!   the PSD square root.
//! * [`qstate`]: states, observables, postselection bases, validation and a
//!   seeded random-instance generator.
//! * [`weakvalue`]: pure and mixed weak values, the per-outcome profile
//!   `(p, α, μ, σ)` and the operators `μ̂`, `σ̂`, `α̂`.
//! * [`estimation`]: quadratic loss, the Bayes estimator, an independent
//!   grid-search oracle and the loss/Schwarz bound checks.
//! * [`weakmeas`]: a Gaussian-pointer von Neumann measurement simulated
//!   exactly on a grid, with Richardson extrapolation of the readout.
//! * [`eurdemo`]: the momentum-from-position specialisation on a periodic grid.

pub mod error;
pub mod estimation;
pub mod eurdemo;
pub mod linalg;
pub mod qstate;
pub mod sweep;
pub mod weakmeas;
pub mod weakvalue;

pub use error::{Error, Result};
pub use estimation::{
    bayes_estimator, bruteforce_bayes, exactness_certificate, loss, verify_bounds, Estimator,
    EstimatorChoice, GridSpec, LossReport,
};
pub use linalg::{eig_hermitian, is_hermitian, sqrt_psd, ComplexMatrix, EigenDecomposition};
pub use num_complex::Complex64;
pub use qstate::{
    density_from_pure, random_instance, validate, DensityMatrix, Observable, PostselectionBasis,
    PureState, Purity, ValidationReport,
};
pub use weakmeas::{extract_weak_value, simulate, PointerGrid, PointerStats};
pub use weakvalue::{
    alpha_mixed, estimator_operators, profile, weak_value_pure, ProfileEntry, WeakValueProfile,
};

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity.
    pub herm: f64,
    /// Allowed negative eigenvalue magnitude for PSD checks.
    pub psd: f64,
    /// Eigensolver reconstruction.
    pub eig: f64,
    /// State normalisation and unit trace.
    pub norm: f64,
    /// Postselection probability cutoff `ε_ps`.
    pub ps: f64,
    /// Loss identities and bounds.
    pub id: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: linalg::TOL_HERM,
            psd: linalg::TOL_PSD,
            eig: linalg::TOL_EIG,
            norm: 1e-10,
            ps: 1e-12,
            id: 1e-9,
        }
    }
}
