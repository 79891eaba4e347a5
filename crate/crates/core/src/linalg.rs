//! Dense complex linear algebra on small square matrices.
//!
//! Everything here works on [`ComplexMatrix`], a row-major `dim × dim` array
//! of `Complex64`. The Hermitian eigensolver is a cyclic Jacobi iteration with
//! a fixed sweep order, so results are bit-for-bit reproducible for a given
//! input.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default Hermiticity tolerance.
pub const TOL_HERM: f64 = 1e-10;
/// Default tolerance on negative eigenvalues of a PSD matrix.
pub const TOL_PSD: f64 = 1e-10;
/// Default eigensolver reconstruction tolerance.
pub const TOL_EIG: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Fails if the entry count is not
    /// a positive perfect square matching `dim`, or if any entry is not finite.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(format!(
                "entry ({}, {}) is not finite",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from a list of rows.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Shape(format!(
                "row {i} has {} entries, expected {dim}",
                r.len()
            )));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        m
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of mismatched vectors");
        let dim = u.len();
        let mut data = Vec::with_capacity(dim * dim);
        for ui in u {
            for vj in v {
                data.push(ui * vj.conj());
            }
        }
        Self { dim, data }
    }

    /// Builds `Σ_k w_k |v_k⟩⟨v_k|` from columns and real weights.
    pub fn spectral_sum(weights: &[f64], vectors: &[Vec<Complex64>]) -> Self {
        assert_eq!(weights.len(), vectors.len());
        let dim = vectors.first().map_or(1, Vec::len);
        let mut m = Self::zeros(dim);
        for (&w, v) in weights.iter().zip(vectors) {
            if w == 0.0 {
                continue;
            }
            for (i, vi) in v.iter().enumerate() {
                let wi = vi * w;
                for (j, vj) in v.iter().enumerate() {
                    m.data[i * dim + j] += wi * vj.conj();
                }
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(<[_]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul of mismatched dimensions");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, &aik) in row.iter().enumerate() {
                if aik == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (d, &bkj) in dst.iter_mut().zip(other_row) {
                    *d += aik * bkj;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "mul_vec of mismatched dimensions");
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |m[i][j] − conj(m[j][i])|`
    pub fn hermiticity_violation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(self, tol)
    }

    /// `(m + m†)/2`
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(c(0.5, 0.0))
    }

    /// `⟨u|self|v⟩`
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        inner(u, &self.mul_vec(v))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `⟨u|v⟩`, conjugate-linear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len(), "inner product of mismatched vectors");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum()
}

/// True iff `max |m[i][j] − conj(m[j][i])| ≤ tol`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.hermiticity_violation() <= tol
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the column for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    /// `Σ_k λ_k |v_k⟩⟨v_k|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        ComplexMatrix::spectral_sum(&self.eigenvalues, &self.eigenvectors)
    }

    /// Applies `f` to the spectrum: `Σ_k f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::spectral_sum(&w, &self.eigenvectors)
    }

    /// Largest eigenvalue modulus (the operator norm).
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// Eigenvector matrix with the eigenvectors as columns.
    pub fn vectors_matrix(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut v = ComplexMatrix::zeros(n);
        for (k, col) in self.eigenvectors.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                v[(i, k)] = z;
            }
        }
        v
    }
}

/// Hermitian eigendecomposition at the default tolerance.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_hermitian_with(m, TOL_HERM)
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation that annihilates
/// it. Sweeps visit pivots in row-major upper-triangle order.
pub fn eig_hermitian_with(m: &ComplexMatrix, tol_herm: f64) -> Result<EigenDecomposition> {
    let violation = m.hermiticity_violation();
    if violation > tol_herm {
        return Err(Error::NotHermitian { violation });
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a
        .as_slice()
        .iter()
        .map(Complex64::norm_sqr)
        .sum::<f64>()
        .sqrt();
    let threshold = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Jacobi eigensolver exceeded {MAX_SWEEPS} sweeps"
        )));
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            (a[(k, k)].re, col)
        })
        .collect();

    // Ties (within TOL_EIG) are ordered by the index of the dominant component.
    pairs.sort_by(|x, y| {
        if (x.0 - y.0).abs() <= TOL_EIG * (1.0 + x.0.abs().max(y.0.abs())) {
            dominant_index(&x.1).cmp(&dominant_index(&y.1))
        } else {
            x.0.total_cmp(&y.0)
        }
    });

    let (eigenvalues, mut eigenvectors): (Vec<f64>, Vec<Vec<Complex64>>) =
        pairs.into_iter().unzip();
    orthonormalize_clusters(&eigenvalues, &mut eigenvectors);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = a.dim();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Phase removal: with D = diag(1, e^{-iφ}) the pivot becomes |a_pq|.
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let u_pp = c(cs, 0.0);
    let u_pq = c(sn, 0.0);
    let u_qp = -phase.conj() * sn;
    let u_qq = phase.conj() * cs;

    // A <- A U (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // A <- U† A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

fn dominant_index(v: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison keeps the lowest index on exact ties
        if z.norm_sqr() > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = z.norm_sqr();
        }
    }
    best
}

/// Rotates the global phase so the dominant component is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let z = v[dominant_index(v)];
    let r = z.norm();
    if r > 0.0 {
        let ph = z.conj() / r;
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

fn orthonormalize_clusters(values: &[f64], vectors: &mut [Vec<Complex64>]) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (values[end] - values[start]).abs()
                <= TOL_EIG * (1.0 + values[start].abs().max(values[end].abs()))
        {
            end += 1;
        }
        gram_schmidt(&mut vectors[start..end]);
        start = end;
    }
}

/// Modified Gram–Schmidt in place. Columns that collapse to (numerically)
/// zero are left as they are.
pub fn gram_schmidt(vectors: &mut [Vec<Complex64>]) {
    for k in 0..vectors.len() {
        for j in 0..k {
            let (done, rest) = vectors.split_at_mut(k);
            let proj = inner(&done[j], &rest[0]);
            for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                *x -= proj * y;
            }
        }
        let nrm = norm_sqr(&vectors[k]).sqrt();
        if nrm > 1e-300 {
            for x in vectors[k].iter_mut() {
                *x /= nrm;
            }
        }
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_psd_with(m, TOL_PSD)
}

/// Eigenvalues in `[−tol_psd, 0)` are clipped to zero before the root.
pub fn sqrt_psd_with(m: &ComplexMatrix, tol_psd: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -tol_psd {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i() -> Complex64 {
        c(0.0, 1.0)
    }

    #[test]
    fn hermitian_checks() {
        assert!(is_hermitian(&ComplexMatrix::identity(3), 1e-10));
        let bad = ComplexMatrix::from_rows(vec![vec![ZERO, i()], vec![i(), ZERO]]).unwrap();
        assert!(!is_hermitian(&bad, 1e-10));
        let y = ComplexMatrix::from_rows(vec![vec![ZERO, i()], vec![-i(), ZERO]]).unwrap();
        assert!(is_hermitian(&y, 1e-10));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![ONE; 3]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::from_rows(vec![vec![ONE, ONE], vec![ONE]]).is_err());
    }

    #[test]
    fn diagonal_spectrum() {
        let e = eig_hermitian(&ComplexMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.eigenvectors[0], vec![ZERO, ONE, ZERO]);
        assert_eq!(e.eigenvectors[1], vec![ZERO, ZERO, ONE]);
        assert_eq!(e.eigenvectors[2], vec![ONE, ZERO, ZERO]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = &e.eigenvectors[0];
        let plus = &e.eigenvectors[1];
        assert!((minus[0] - c(h, 0.0)).norm() < 1e-14);
        assert!((minus[1] - c(-h, 0.0)).norm() < 1e-14);
        assert!((plus[0] - c(h, 0.0)).norm() < 1e-14);
        assert!((plus[1] - c(h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_is_orthonormal_and_ordered() {
        let e = eig_hermitian(&ComplexMatrix::identity(4)).unwrap();
        for (k, v) in e.eigenvectors.iter().enumerate() {
            assert_eq!(dominant_index(v), k);
        }
        assert!(e.vectors_matrix().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn square_roots() {
        let id = ComplexMatrix::identity(2);
        assert!(sqrt_psd(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let d = sqrt_psd(&ComplexMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(d.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![c(h, 0.0), c(h, 0.0)];
        let proj = ComplexMatrix::outer(&plus, &plus);
        assert!(sqrt_psd(&proj).unwrap().max_abs_diff(&proj) < 1e-12);
    }

    #[test]
    fn negative_spectrum_is_not_psd() {
        let m = ComplexMatrix::from_diag(&[1.0, -0.5]);
        assert!(matches!(sqrt_psd(&m), Err(Error::NotPsd { .. })));
        // tiny negative eigenvalues are clipped
        let m = ComplexMatrix::from_diag(&[1.0, -1e-12]);
        let r = sqrt_psd(&m).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
    }

    #[test]
    fn complex_pivot_is_diagonalized() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.3, -0.7), c(0.0, 0.2)],
            vec![c(0.3, 0.7), c(-2.0, 0.0), c(1.1, 0.4)],
            vec![c(0.0, -0.2), c(1.1, -0.4), c(0.5, 0.0)],
        ])
        .unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-13);
        let v = e.vectors_matrix();
        assert!(
            v.adjoint()
                .matmul(&v)
                .max_abs_diff(&ComplexMatrix::identity(3))
                < 1e-13
        );
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
