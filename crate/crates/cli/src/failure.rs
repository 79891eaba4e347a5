//! Structured failures: an exit code plus a JSON object for stderr.

use std::path::Path;
use std::process::ExitCode;

use serde_json::{json, Value};
use weakval::Error;

use crate::problem::FieldError;

pub const INVARIANT: u8 = 1;
pub const USAGE: u8 = 2;
pub const DEGENERATE: u8 = 3;
pub const NO_CONVERGENCE: u8 = 4;
pub const RESOLUTION: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub body: Value,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            body: json!({"error": "usage", "message": message.into()}),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: USAGE,
            body: json!({
                "error": "io",
                "path": path.display().to_string(),
                "message": err.to_string(),
            }),
        }
    }

    pub fn violation(body: Value) -> Self {
        Self {
            code: INVARIANT,
            body,
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.body);
        ExitCode::from(self.code)
    }
}

/// Exit code and machine-readable kind for a library error.
fn classify(err: &Error) -> (u8, &'static str) {
    match err {
        Error::ZeroOverlap { .. }
        | Error::ZeroProbability { .. }
        | Error::ZeroPostselection { .. } => (DEGENERATE, "zero_postselection"),
        Error::DegenerateEnsemble { .. } => (DEGENERATE, "degenerate_ensemble"),
        Error::NoConvergence(_) => (NO_CONVERGENCE, "no_convergence"),
        Error::ResolutionGuard(_) => (RESOLUTION, "resolution_guard"),
        Error::GridOverflow { .. } => (RESOLUTION, "grid_overflow"),
        Error::NonRealLoss { .. } => (INVARIANT, "non_real_loss"),
        Error::InvalidDensity(_) => (USAGE, "invalid_density"),
        Error::NotHermitian { .. } => (USAGE, "not_hermitian"),
        Error::NotPsd { .. } => (USAGE, "not_psd"),
        Error::NotNormalized { .. } => (USAGE, "not_normalized"),
        Error::InvalidBasis(_) => (USAGE, "invalid_basis"),
        Error::DimensionMismatch { .. } => (USAGE, "dimension_mismatch"),
        Error::UnknownLabel(_) => (USAGE, "unknown_label"),
        Error::Shape(_) | Error::NonFinite(_) | Error::InvalidArgument(_) => {
            (USAGE, "invalid_argument")
        }
    }
}

fn core_body(err: &Error) -> (u8, Value) {
    let (code, kind) = classify(err);
    let mut body = json!({"error": kind, "message": err.to_string()});
    if let Error::InvalidDensity(report) = err {
        body["violations"] = serde_json::to_value(&report.violations).unwrap_or(Value::Null);
    }
    (code, body)
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let (code, body) = core_body(&err);
        Self { code, body }
    }
}

impl From<FieldError> for Failure {
    fn from(err: FieldError) -> Self {
        let (code, mut body) = match &err.source {
            Some(e) => core_body(e),
            None => (
                USAGE,
                json!({"error": "invalid_input", "message": err.message}),
            ),
        };
        body["field"] = Value::String(err.field);
        Self { code, body }
    }
}
