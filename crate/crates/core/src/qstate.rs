//! States, observables and postselection bases.
//!
//! Random instances are drawn from a ChaCha20 stream (`rand_chacha`), seeded
//! with `ChaCha20Rng::seed_from_u64(seed)` and split per trial with
//! `set_stream(trial)`. Uniforms are the standard 53-bit `f64` draws and
//! normals come from the Box–Muller transform, so the same `(seed, stream)`
//! reproduces the same instance on any platform.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, gram_schmidt, inner, norm_sqr, ComplexMatrix};
use crate::Tolerances;

/// Normalised state vector `|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Fails with [`Error::NotNormalized`] unless `Σ|ψᵢ|² = 1` within `1e-10`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new_with(amplitudes, Tolerances::default().norm)
    }

    pub fn new_with(amplitudes: Vec<Complex64>, tol_norm: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Shape(
                "state must have at least one amplitude".into(),
            ));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > tol_norm {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized { norm_sqr: n * n });
        }
        for z in &mut amplitudes {
            *z /= n;
        }
        Self::new(amplitudes)
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut v = vec![c(0.0, 0.0); dim];
        v[k] = c(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// A prior state `ρ̂`: Hermitian, positive semidefinite, unit trace.
///
/// States built from a [`PureState`] remember the vector so that
/// expectations can be evaluated in `O(dim²)` instead of `O(dim³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    pure: Option<Vec<Complex64>>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::default())
    }

    /// Validates `matrix` and stores its Hermitian part.
    pub fn new_with(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let report = validate_with(&matrix, tol);
        if !report.is_empty() {
            return Err(Error::InvalidDensity(report));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            pure: None,
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(c(1.0 / dim as f64, 0.0)),
            pure: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The state vector, if this state was built from one.
    pub fn pure_vector(&self) -> Option<&[Complex64]> {
        self.pure.as_deref()
    }

    /// `Tr ρ̂²`
    pub fn purity(&self) -> f64 {
        if self.pure.is_some() {
            return 1.0;
        }
        let m = &self.matrix;
        // Tr ρ² = Σ_ij |ρ_ij|² for Hermitian ρ
        m.as_slice().iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// `⟨b|ρ̂|b⟩`
    pub fn prob(&self, b: &[Complex64]) -> f64 {
        match &self.pure {
            Some(psi) => inner(b, psi).norm_sqr(),
            None => self.matrix.sandwich(b, b).re,
        }
    }

    /// `Tr ρ̂ Ô`
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        match &self.pure {
            Some(psi) => op.sandwich(psi, psi),
            None => {
                let n = self.dim();
                let (r, o) = (self.matrix.as_slice(), op.as_slice());
                let mut acc = c(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += r[i * n + j] * o[j * n + i];
                    }
                }
                acc
            }
        }
    }

    /// `Tr ρ̂ M̂²`
    pub fn expectation_sq(&self, op: &ComplexMatrix) -> Complex64 {
        match &self.pure {
            Some(psi) => {
                let v = op.mul_vec(psi);
                // ⟨ψ|M²|ψ⟩ = ⟨M†ψ|Mψ⟩
                let w = op.adjoint().mul_vec(psi);
                inner(&w, &v)
            }
            None => self.expectation(&op.matmul(op)),
        }
    }
}

/// `ρ̂ = |ψ⟩⟨ψ|`
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let v = psi.amplitudes().to_vec();
    DensityMatrix {
        matrix: ComplexMatrix::outer(&v, &v),
        pure: Some(v),
    }
}

/// Hermitian operator `â`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, Tolerances::default().herm)
    }

    /// Stores the Hermitian part of `matrix` after checking the violation.
    pub fn new_with(matrix: ComplexMatrix, tol_herm: f64) -> Result<Self> {
        let violation = matrix.hermiticity_violation();
        if violation > tol_herm {
            return Err(Error::NotHermitian { violation });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_diag(diag),
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_rows([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]])
    }

    pub fn pauli_z() -> Self {
        Self::from_diag(&[1.0, -1.0])
    }

    fn from_rows(rows: [[(f64, f64); 2]; 2]) -> Self {
        let data = rows.iter().flatten().map(|&(re, im)| c(re, im)).collect();
        Self {
            matrix: ComplexMatrix::new(2, data).expect("2x2"),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Orthonormal, complete, labelled basis `{|b⟩}` of postselection outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionBasis {
    vectors: Vec<Vec<Complex64>>,
    labels: Vec<String>,
    standard: bool,
}

impl PostselectionBasis {
    pub fn new(vectors: Vec<Vec<Complex64>>, labels: Vec<String>) -> Result<Self> {
        Self::new_with(vectors, labels, Tolerances::default().herm)
    }

    pub fn new_with(vectors: Vec<Vec<Complex64>>, labels: Vec<String>, tol: f64) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(Error::InvalidBasis("basis is empty".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::InvalidBasis(format!(
                "basis has {dim} vectors of length {}; a complete nondegenerate basis needs \
                 exactly one rank-1 outcome per dimension",
                v.len()
            )));
        }
        if labels.len() != dim {
            return Err(Error::InvalidBasis(format!(
                "{} labels for {dim} vectors",
                labels.len()
            )));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidBasis(format!("duplicate label {:?}", w[0])));
        }
        for i in 0..dim {
            for j in i..dim {
                let g = inner(&vectors[i], &vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                let dev = (g - c(expect, 0.0)).norm();
                if dev > tol {
                    return Err(Error::InvalidBasis(format!(
                        "|<b{i}|b{j}> - delta| = {dev:.3e} exceeds {tol:.1e}"
                    )));
                }
            }
        }
        let completeness = ComplexMatrix::spectral_sum(&vec![1.0; dim], &vectors)
            .max_abs_diff(&ComplexMatrix::identity(dim));
        if completeness > tol {
            return Err(Error::InvalidBasis(format!(
                "completeness violated by {completeness:.3e}"
            )));
        }
        let standard = vectors.iter().enumerate().all(|(k, v)| {
            v.iter()
                .enumerate()
                .all(|(i, z)| *z == if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) })
        });
        Ok(Self {
            vectors,
            labels,
            standard,
        })
    }

    /// Computational basis labelled `"0"`, `"1"`, ...
    pub fn standard(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|k| PureState::basis(dim, k).amplitudes)
            .collect();
        Self {
            vectors,
            labels: (0..dim).map(|k| k.to_string()).collect(),
            standard: true,
        }
    }

    /// Basis whose vectors are the columns of `m`, labelled by column index.
    pub fn from_columns(m: &ComplexMatrix) -> Result<Self> {
        let vectors = (0..m.dim()).map(|k| m.column(k)).collect();
        Self::new(vectors, (0..m.dim()).map(|k| k.to_string()).collect())
    }

    /// Eigenbasis of `a` (ascending eigenvalues).
    pub fn eigenbasis(a: &Observable) -> Result<Self> {
        let eig = eig_hermitian(a.matrix())?;
        let labels = (0..a.dim()).map(|k| k.to_string()).collect();
        Self::new(eig.eigenvectors, labels)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    /// `Σ_b values[b] |b⟩⟨b|`
    pub fn diagonal_operator(&self, values: &[f64]) -> ComplexMatrix {
        assert_eq!(values.len(), self.dim());
        if self.standard {
            ComplexMatrix::from_diag(values)
        } else {
            ComplexMatrix::spectral_sum(values, &self.vectors)
        }
    }

    /// `θ̂|v⟩` for `θ̂ = Σ_b values[b] |b⟩⟨b|`, without forming the matrix.
    pub fn apply_diagonal(&self, values: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        if self.standard {
            return values.iter().zip(v).map(|(t, z)| z * t).collect();
        }
        let mut out = vec![c(0.0, 0.0); v.len()];
        for (b, &t) in self.vectors.iter().zip(values) {
            let amp = inner(b, v) * t;
            for (o, bi) in out.iter_mut().zip(b) {
                *o += amp * bi;
            }
        }
        out
    }

    /// `b̂ = Σ_k k |b_k⟩⟨b_k|`, the outcome operator with distinct eigenvalues.
    pub fn outcome_operator(&self) -> ComplexMatrix {
        let idx: Vec<f64> = (0..self.dim()).map(|k| k as f64).collect();
        self.diagonal_operator(&idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NotHermitian,
    NegativeEigenvalue,
    Trace,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Violated density-matrix invariants with their measured magnitudes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn magnitude(&self, kind: ViolationKind) -> Option<f64> {
        self.violations
            .iter()
            .find(|v| v.kind == kind)
            .map(|v| v.magnitude)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{:?} by {:.3e}", v.kind, v.magnitude))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

pub fn validate(m: &ComplexMatrix) -> ValidationReport {
    validate_with(m, &Tolerances::default())
}

/// Checks Hermiticity, positivity and unit trace. Never fails.
pub fn validate_with(m: &ComplexMatrix, tol: &Tolerances) -> ValidationReport {
    let mut violations = Vec::new();
    let herm = m.hermiticity_violation();
    if herm > tol.herm {
        violations.push(Violation {
            kind: ViolationKind::NotHermitian,
            magnitude: herm,
        });
    }
    // positivity is judged on the Hermitian part so a non-Hermitian input
    // still gets a meaningful spectrum check
    match eig_hermitian(&m.hermitian_part()) {
        Ok(eig) => {
            let min = eig.eigenvalues[0];
            if min < -tol.psd {
                violations.push(Violation {
                    kind: ViolationKind::NegativeEigenvalue,
                    magnitude: -min,
                });
            }
        }
        Err(_) => violations.push(Violation {
            kind: ViolationKind::NonFinite,
            magnitude: f64::INFINITY,
        }),
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > tol.norm {
        violations.push(Violation {
            kind: ViolationKind::Trace,
            magnitude: (tr - 1.0).abs(),
        });
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    Mixed,
}

impl FromStr for Purity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Purity::Pure),
            "mixed" => Ok(Purity::Mixed),
            other => Err(Error::InvalidArgument(format!(
                "purity must be 'pure' or 'mixed', got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Purity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Purity::Pure => "pure",
            Purity::Mixed => "mixed",
        })
    }
}

/// Seeded source of uniforms and Box–Muller normals.
pub struct Sampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re = self.gaussian();
        c(re, self.gaussian())
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.complex_gaussian()).collect()
    }

    pub fn gaussian_matrix(&mut self, n: usize) -> ComplexMatrix {
        let data = (0..n * n).map(|_| self.complex_gaussian()).collect();
        ComplexMatrix::new(n, data).expect("finite gaussian entries")
    }

    pub fn pure_state(&mut self, n: usize) -> PureState {
        PureState::normalized(self.gaussian_vector(n)).expect("nonzero gaussian vector")
    }

    /// `g†g / Tr(g†g)` with Gaussian `g`.
    pub fn mixed_state(&mut self, n: usize) -> DensityMatrix {
        let g = self.gaussian_matrix(n);
        let gg = g.adjoint().matmul(&g).hermitian_part();
        let tr = gg.trace().re;
        DensityMatrix {
            matrix: gg.scale(c(1.0 / tr, 0.0)),
            pure: None,
        }
    }

    /// `(h + h†)/2` with Gaussian `h`.
    pub fn observable(&mut self, n: usize) -> Observable {
        Observable {
            matrix: self.gaussian_matrix(n).hermitian_part(),
        }
    }

    /// Gram–Schmidt orthonormalisation of a Gaussian matrix's columns.
    pub fn basis(&mut self, n: usize) -> PostselectionBasis {
        let g = self.gaussian_matrix(n);
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|k| g.column(k)).collect();
        gram_schmidt(&mut cols);
        gram_schmidt(&mut cols);
        PostselectionBasis::new(cols, (0..n).map(|k| k.to_string()).collect())
            .expect("orthonormalised gaussian basis")
    }

    pub fn state(&mut self, n: usize, purity: Purity) -> DensityMatrix {
        match purity {
            Purity::Pure => density_from_pure(&self.pure_state(n)),
            Purity::Mixed => self.mixed_state(n),
        }
    }
}

/// `(ρ̂, â, {|b⟩})` drawn from stream 0 of `seed`.
pub fn random_instance(
    dim: usize,
    purity: Purity,
    seed: u64,
) -> Result<(DensityMatrix, Observable, PostselectionBasis)> {
    random_instance_stream(dim, purity, seed, 0)
}

/// Like [`random_instance`] but drawn from stream `stream`; sweeps use the
/// trial index as the stream.
pub fn random_instance_stream(
    dim: usize,
    purity: Purity,
    seed: u64,
    stream: u64,
) -> Result<(DensityMatrix, Observable, PostselectionBasis)> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "random instances need dim >= 2, got {dim}"
        )));
    }
    let mut s = Sampler::with_stream(seed, stream);
    let rho = s.state(dim, purity);
    let a = s.observable(dim);
    let basis = s.basis(dim);
    Ok((rho, a, basis))
}
