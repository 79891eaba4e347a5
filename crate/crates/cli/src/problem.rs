//! Problem files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "psi": [[0.7071067811865476, 0], [0.7071067811865476, 0]],
//!   "observable": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
//!   "basis": {"vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], "labels": ["0", "1"]},
//!   "tolerances": {"id": 1e-9}
//! }
//! ```
//!
//! Complex scalars are `[re, im]`; a bare number is read as a real scalar.
//! Matrices are row-major. Use `"rho"` instead of `"psi"` for a mixed state.

use std::fmt;

use serde_json::Value;
use weakval::{
    density_from_pure, eig_hermitian, Complex64, ComplexMatrix, DensityMatrix, Error, Observable,
    PostselectionBasis, PureState, Tolerances,
};

pub const VERSION: u64 = 1;

/// A problem-file error tied to the JSON path that caused it.
#[derive(Debug)]
pub struct FieldError {
    pub field: String,
    pub message: String,
    pub source: Option<Error>,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            source: None,
        }
    }

    fn from_core(field: impl Into<String>, err: Error) -> Self {
        Self {
            field: field.into(),
            message: err.to_string(),
            source: Some(err),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub state: State,
    pub observable: Observable,
    pub basis: PostselectionBasis,
    pub tolerances: Tolerances,
}

impl Problem {
    pub fn density(&self) -> DensityMatrix {
        match &self.state {
            State::Pure(psi) => density_from_pure(psi),
            State::Mixed(rho) => rho.clone(),
        }
    }

    /// The state vector, recovered from `rho` when it has unit purity.
    pub fn pure_state(&self) -> Result<PureState, FieldError> {
        match &self.state {
            State::Pure(psi) => Ok(psi.clone()),
            State::Mixed(rho) => {
                if (rho.purity() - 1.0).abs() > self.tolerances.norm {
                    return Err(FieldError::new(
                        "rho",
                        format!("a pure state is required, purity is {}", rho.purity()),
                    ));
                }
                let eig =
                    eig_hermitian(rho.matrix()).map_err(|e| FieldError::from_core("rho", e))?;
                let top = eig.eigenvectors.last().cloned().unwrap_or_default();
                PureState::normalized(top).map_err(|e| FieldError::from_core("rho", e))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Problem, FieldError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        FieldError::new(
            "$",
            format!(
                "malformed JSON at line {} column {}: {e}",
                e.line(),
                e.column()
            ),
        )
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| FieldError::new("$", "problem must be a JSON object"))?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "version" | "psi" | "rho" | "observable" | "basis" | "tolerances"
        ) {
            return Err(FieldError::new(key.clone(), "unknown field"));
        }
    }

    match obj.get("version") {
        None => return Err(FieldError::new("version", "missing")),
        Some(v) if v.as_u64() == Some(VERSION) => {}
        Some(v) => {
            return Err(FieldError::new(
                "version",
                format!("unsupported version {v}, expected {VERSION}"),
            ))
        }
    }

    let tolerances = match obj.get("tolerances") {
        None => Tolerances::default(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| FieldError::new("tolerances", e.to_string()))?,
    };

    let state = match (obj.get("psi"), obj.get("rho")) {
        (Some(_), Some(_)) => {
            return Err(FieldError::new("psi", "give exactly one of psi and rho"))
        }
        (None, None) => return Err(FieldError::new("psi", "missing (or give rho)")),
        (Some(v), None) => {
            let amps = vector(v, "psi")?;
            State::Pure(
                PureState::new_with(amps, tolerances.norm)
                    .map_err(|e| FieldError::from_core("psi", e))?,
            )
        }
        (None, Some(v)) => {
            let m = matrix(v, "rho")?;
            State::Mixed(
                DensityMatrix::new_with(m, &tolerances)
                    .map_err(|e| FieldError::from_core("rho", e))?,
            )
        }
    };
    let dim = match &state {
        State::Pure(p) => p.dim(),
        State::Mixed(r) => r.dim(),
    };

    let a = obj
        .get("observable")
        .ok_or_else(|| FieldError::new("observable", "missing"))?;
    let a = matrix(a, "observable")?;
    if a.dim() != dim {
        return Err(FieldError::new(
            "observable",
            format!(
                "dimension {} does not match the state dimension {dim}",
                a.dim()
            ),
        ));
    }
    let observable = Observable::new_with(a, tolerances.herm)
        .map_err(|e| FieldError::from_core("observable", e))?;

    let basis = match obj.get("basis") {
        None | Some(Value::Null) => PostselectionBasis::standard(dim),
        Some(v) => basis(v, dim, tolerances.herm)?,
    };

    Ok(Problem {
        state,
        observable,
        basis,
        tolerances,
    })
}

fn basis(v: &Value, dim: usize, tol: f64) -> Result<PostselectionBasis, FieldError> {
    let obj = v
        .as_object()
        .ok_or_else(|| FieldError::new("basis", "expected an object with vectors and labels"))?;
    if let Some(k) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "vectors" | "labels"))
    {
        return Err(FieldError::new(format!("basis.{k}"), "unknown field"));
    }
    let vecs = array(
        obj.get("vectors")
            .ok_or_else(|| FieldError::new("basis.vectors", "missing"))?,
        "basis.vectors",
    )?;
    if vecs.len() != dim {
        return Err(FieldError::new(
            "basis.vectors",
            format!("{} vectors for dimension {dim}", vecs.len()),
        ));
    }
    let vectors = vecs
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let field = format!("basis.vectors[{k}]");
            let out = vector(v, &field)?;
            if out.len() != dim {
                return Err(FieldError::new(
                    field,
                    format!("length {} does not match dimension {dim}", out.len()),
                ));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = match obj.get("labels") {
        None => (0..dim).map(|k| k.to_string()).collect(),
        Some(v) => array(v, "basis.labels")?
            .iter()
            .enumerate()
            .map(|(k, l)| {
                l.as_str().map(str::to_owned).ok_or_else(|| {
                    FieldError::new(format!("basis.labels[{k}]"), "expected a string")
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    PostselectionBasis::new_with(vectors, labels, tol)
        .map_err(|e| FieldError::from_core("basis", e))
}

fn array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>, FieldError> {
    v.as_array()
        .ok_or_else(|| FieldError::new(field, "expected an array"))
}

fn scalar(v: &Value, field: &str) -> Result<Complex64, FieldError> {
    let number = |x: &Value, f: &str| {
        x.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| FieldError::new(f, "expected a finite number"))
    };
    match v {
        Value::Number(_) => Ok(Complex64::new(number(v, field)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
            number(&pair[0], &format!("{field}[0]"))?,
            number(&pair[1], &format!("{field}[1]"))?,
        )),
        _ => Err(FieldError::new(field, "expected a complex scalar [re, im]")),
    }
}

fn vector(v: &Value, field: &str) -> Result<Vec<Complex64>, FieldError> {
    let items = array(v, field)?;
    if items.is_empty() {
        return Err(FieldError::new(field, "empty vector"));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, x)| scalar(x, &format!("{field}[{i}]")))
        .collect()
}

fn matrix(v: &Value, field: &str) -> Result<ComplexMatrix, FieldError> {
    let rows = array(v, field)?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let f = format!("{field}[{i}]");
        let row = vector(row, &f)?;
        if row.len() != n {
            return Err(FieldError::new(
                f,
                format!("row has {} entries, matrix must be {n}x{n}", row.len()),
            ));
        }
        data.extend(row);
    }
    ComplexMatrix::new(n, data).map_err(|e| FieldError::from_core(field, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = r#"{
        "version": 1,
        "psi": [[0.7071067811865476, 0], [0.7071067811865476, 0]],
        "observable": [[1, 0], [0, -1]]
    }"#;

    #[test]
    fn parses_minimal_problem() {
        let p = parse(QUBIT).unwrap();
        assert!(matches!(p.state, State::Pure(_)));
        assert!(p.basis.is_standard());
        assert_eq!(p.tolerances, Tolerances::default());
    }

    #[test]
    fn names_offending_fields() {
        let cases = [
            (
                r#"{"version": 1, "psi": [[1, 0], [0, "x"]], "observable": [[1, 0], [0, 1]]}"#,
                "psi[1][1]",
            ),
            (
                r#"{"version": 1, "psi": [1, 0], "observable": [[1, 0]]}"#,
                "observable[0]",
            ),
            (
                r#"{"psi": [1, 0], "observable": [[1, 0], [0, 1]]}"#,
                "version",
            ),
            (r#"{"version": 1, "psi": [1, 0]}"#, "observable"),
            (
                r#"{"version": 1, "psi": [1, 0], "observable": [[1, 0], [0, 1]], "extra": 0}"#,
                "extra",
            ),
            (
                r#"{"version": 1, "psi": [1, 0], "observable": [[1, 0], [0, 1]], "tolerances": {"bogus": 1}}"#,
                "tolerances",
            ),
            ("{", "$"),
        ];
        for (text, field) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!(err.field, field, "{text}: {err}");
        }
    }

    #[test]
    fn rejects_bad_trace() {
        let text = r#"{"version": 1, "rho": [[0.6, 0], [0, 0.6]], "observable": [[1, 0], [0, 1]]}"#;
        let err = parse(text).unwrap_err();
        assert_eq!(err.field, "rho");
        assert!(matches!(err.source, Some(Error::InvalidDensity(_))));
    }

    #[test]
    fn recovers_pure_vector_from_rho() {
        let text =
            r#"{"version": 1, "rho": [[0.5, 0.5], [0.5, 0.5]], "observable": [[1, 0], [0, -1]]}"#;
        let p = parse(text).unwrap();
        let psi = p.pure_state().unwrap();
        let amps = psi.amplitudes();
        assert!((amps[0].norm() - amps[1].norm()).abs() < 1e-12);
    }
}
