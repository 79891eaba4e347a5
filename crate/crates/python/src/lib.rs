//! Python bindings. Matrices are nested lists of `complex`, vectors are lists
//! of `complex`; reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use weakval::eurdemo::{demo_report, GridWavefunction};
use weakval::sweep::{verify_sweep as run_sweep, SweepConfig};
use weakval::{self as core, Complex64, ComplexMatrix, EstimatorChoice, GridSpec};

create_exception!(weakval_py, WeakvalError, PyValueError);

fn err(e: core::Error) -> PyErr {
    WeakvalError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| WeakvalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(err)
}

fn purity(s: &str) -> PyResult<core::Purity> {
    s.parse().map_err(err)
}

#[pyclass(name = "DensityMatrix", module = "weakval_py", frozen)]
struct PyDensityMatrix(core::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self(core::DensityMatrix::new(matrix(rows)?).map_err(err)?))
    }

    /// `|ψ⟩⟨ψ|` for a normalised `psi`.
    #[staticmethod]
    fn from_pure(psi: Vec<Complex64>) -> PyResult<Self> {
        let psi = core::PureState::new(psi).map_err(err)?;
        Ok(Self(core::density_from_pure(&psi)))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.0.matrix().rows()
    }

    /// `⟨b|ρ|b⟩`
    fn prob(&self, b: Vec<Complex64>) -> f64 {
        self.0.prob(&b)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(dim={}, purity={:.6})",
            self.0.dim(),
            self.0.purity()
        )
    }
}

#[pyclass(name = "Observable", module = "weakval_py", frozen)]
struct PyObservable(core::Observable);

#[pymethods]
impl PyObservable {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self(core::Observable::new(matrix(rows)?).map_err(err)?))
    }

    #[staticmethod]
    fn from_diag(diag: Vec<f64>) -> Self {
        Self(core::Observable::from_diag(&diag))
    }

    #[staticmethod]
    fn pauli_x() -> Self {
        Self(core::Observable::pauli_x())
    }

    #[staticmethod]
    fn pauli_y() -> Self {
        Self(core::Observable::pauli_y())
    }

    #[staticmethod]
    fn pauli_z() -> Self {
        Self(core::Observable::pauli_z())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.0.matrix().rows()
    }

    fn __repr__(&self) -> String {
        format!("Observable(dim={})", self.0.dim())
    }
}

#[pyclass(name = "PostselectionBasis", module = "weakval_py", frozen)]
struct PyBasis(core::PostselectionBasis);

#[pymethods]
impl PyBasis {
    #[new]
    #[pyo3(signature = (vectors, labels = None))]
    fn new(vectors: Vec<Vec<Complex64>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let labels = labels.unwrap_or_else(|| (0..vectors.len()).map(|k| k.to_string()).collect());
        Ok(Self(
            core::PostselectionBasis::new(vectors, labels).map_err(err)?,
        ))
    }

    #[staticmethod]
    fn standard(dim: usize) -> Self {
        Self(core::PostselectionBasis::standard(dim))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn vectors(&self) -> Vec<Vec<Complex64>> {
        self.0.vectors().to_vec()
    }

    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("PostselectionBasis(labels={:?})", self.0.labels())
    }
}

fn basis_or_standard(basis: Option<&PyBasis>, dim: usize) -> core::PostselectionBasis {
    basis.map_or_else(|| core::PostselectionBasis::standard(dim), |b| b.0.clone())
}

/// `⟨b|â|ψ⟩/⟨b|ψ⟩`
#[pyfunction]
fn weak_value_pure(
    psi: Vec<Complex64>,
    a: &PyObservable,
    b: Vec<Complex64>,
) -> PyResult<Complex64> {
    let psi = core::PureState::new(psi).map_err(err)?;
    core::weak_value_pure(&psi, &a.0, &b).map_err(err)
}

/// `⟨b|âρ|b⟩/⟨b|ρ|b⟩`
#[pyfunction]
fn alpha_mixed(rho: &PyDensityMatrix, a: &PyObservable, b: Vec<Complex64>) -> PyResult<Complex64> {
    core::alpha_mixed(&rho.0, &a.0, &b).map_err(err)
}

/// Per-outcome `{label, prob, alpha, mu, sigma, excluded}`.
#[pyfunction]
#[pyo3(signature = (rho, a, basis = None))]
fn profile<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    a: &PyObservable,
    basis: Option<&PyBasis>,
) -> PyResult<Bound<'py, PyAny>> {
    let basis = basis_or_standard(basis, rho.0.dim());
    let p = core::profile(&rho.0, &a.0, &basis).map_err(err)?;
    to_py(py, &p.to_json())
}

/// `θ(b) = μ(b)` in basis order.
#[pyfunction]
#[pyo3(signature = (rho, a, basis = None))]
fn bayes_estimator(
    rho: &PyDensityMatrix,
    a: &PyObservable,
    basis: Option<&PyBasis>,
) -> PyResult<Vec<f64>> {
    let basis = basis_or_standard(basis, rho.0.dim());
    Ok(core::bayes_estimator(&rho.0, &a.0, &basis)
        .map_err(err)?
        .values()
        .to_vec())
}

/// Grid-search minimiser of the loss, computed without weak values.
#[pyfunction]
#[pyo3(signature = (rho, a, basis = None, step = 1e-3))]
fn bruteforce_bayes(
    rho: &PyDensityMatrix,
    a: &PyObservable,
    basis: Option<&PyBasis>,
    step: f64,
) -> PyResult<Vec<f64>> {
    let basis = basis_or_standard(basis, rho.0.dim());
    let spec = GridSpec {
        step,
        half_width: None,
    };
    Ok(core::bruteforce_bayes(&rho.0, &a.0, &basis, spec)
        .map_err(err)?
        .values()
        .to_vec())
}

/// Loss report for the Bayes estimator, or for `theta` when given.
#[pyfunction]
#[pyo3(signature = (rho, a, basis = None, theta = None))]
fn verify_bounds<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    a: &PyObservable,
    basis: Option<&PyBasis>,
    theta: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let basis = basis_or_standard(basis, rho.0.dim());
    let choice = match theta {
        None => EstimatorChoice::Bayes,
        Some(values) => {
            EstimatorChoice::Given(core::Estimator::new(basis.clone(), values).map_err(err)?)
        }
    };
    let report = core::verify_bounds(&rho.0, &a.0, &basis, choice).map_err(err)?;
    to_py(py, &report.to_json())
}

/// `(eigenvalues, eigenvectors)` with eigenvalues ascending.
#[pyfunction]
fn eig_hermitian(rows: Vec<Vec<Complex64>>) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let e = core::eig_hermitian(&matrix(rows)?).map_err(err)?;
    Ok((e.eigenvalues, e.eigenvectors))
}

#[pyfunction]
fn sqrt_psd(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(core::sqrt_psd(&matrix(rows)?).map_err(err)?.rows())
}

/// Seeded `(rho, observable, basis)`.
#[pyfunction]
#[pyo3(signature = (dim, purity = "mixed", seed = 0))]
fn random_instance(
    dim: usize,
    purity: &str,
    seed: u64,
) -> PyResult<(PyDensityMatrix, PyObservable, PyBasis)> {
    let (rho, a, basis) = core::random_instance(dim, self::purity(purity)?, seed).map_err(err)?;
    Ok((PyDensityMatrix(rho), PyObservable(a), PyBasis(basis)))
}

/// Pointer statistics after coupling strength `g` and postselection on `b`.
#[pyfunction]
#[pyo3(signature = (psi, a, b, g, width = 1.0, grid_n = 1024))]
fn simulate<'py>(
    py: Python<'py>,
    psi: Vec<Complex64>,
    a: &PyObservable,
    b: Vec<Complex64>,
    g: f64,
    width: f64,
    grid_n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let psi = core::PureState::new(psi).map_err(err)?;
    let grid = core::PointerGrid::for_pointer(grid_n, width).map_err(err)?;
    let st = core::simulate(&psi, &a.0, &b, g, width, &grid).map_err(err)?;
    to_py(py, &serde_json::to_value(st).expect("stats serialise"))
}

/// Weak value from simulated pointer readouts extrapolated to `g → 0`.
#[pyfunction]
#[pyo3(signature = (psi, a, b, gs, width = 1.0, grid_n = 1024, tol = 1e-4))]
#[allow(clippy::too_many_arguments)]
fn extract_weak_value<'py>(
    py: Python<'py>,
    psi: Vec<Complex64>,
    a: &PyObservable,
    b: Vec<Complex64>,
    gs: Vec<f64>,
    width: f64,
    grid_n: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let psi = core::PureState::new(psi).map_err(err)?;
    let grid = core::PointerGrid::for_pointer(grid_n, width).map_err(err)?;
    let est = core::extract_weak_value(&psi, &a.0, &b, width, &gs, &grid, tol).map_err(err)?;
    to_py(py, &serde_json::to_value(est).expect("estimate serialises"))
}

/// Loss of the position-conditioned momentum estimate for a grid wavefunction.
#[pyfunction]
#[pyo3(signature = (shape = "gaussian", n = 512, length = 40.0, width = 1.0, k0 = 0.0, mode = 0, separation = 6.0))]
#[allow(clippy::too_many_arguments)]
fn eur_report<'py>(
    py: Python<'py>,
    shape: &str,
    n: usize,
    length: f64,
    width: f64,
    k0: f64,
    mode: i64,
    separation: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let psi = match shape {
        "gaussian" => GridWavefunction::gaussian(n, length, width, k0),
        "plane" => GridWavefunction::plane_wave(n, length, mode),
        "double-gaussian" => GridWavefunction::double_gaussian(n, length, width, separation, k0),
        other => {
            return Err(WeakvalError::new_err(format!(
                "shape must be gaussian, plane or double-gaussian, got {other:?}"
            )))
        }
    }
    .map_err(err)?;
    let report = demo_report(&psi).map_err(err)?;
    let out = to_py(
        py,
        &serde_json::to_value(&report).expect("report serialises"),
    )?;
    out.cast::<PyDict>()?.set_item("passes", report.passes())?;
    Ok(out)
}

/// `(passed, csv)` for a randomised sweep.
#[pyfunction]
#[pyo3(signature = (dim, trials, seed = 1, purity = "mixed", tol = 1e-9))]
fn verify_sweep(
    dim: usize,
    trials: usize,
    seed: u64,
    purity: &str,
    tol: f64,
) -> PyResult<(bool, String)> {
    let cfg = SweepConfig {
        dim,
        trials,
        seed,
        purity: self::purity(purity)?,
        tol,
    };
    let out = run_sweep(&cfg).map_err(err)?;
    Ok((out.passed(), out.to_csv()))
}

#[pymodule]
fn weakval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WeakvalError", m.py().get_type::<WeakvalError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyObservable>()?;
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(weak_value_pure, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(bruteforce_bayes, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(eig_hermitian, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_psd, m)?)?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(extract_weak_value, m)?)?;
    m.add_function(wrap_pyfunction!(eur_report, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sweep, m)?)?;
    Ok(())
}
