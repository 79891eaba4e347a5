//! Quadratic-loss estimation of `â` from the postselection outcome.
//!
//! An estimator is a real function `θ(b)` of the outcome, i.e. an operator
//! `θ̂ = Σ θ(b)|b⟩⟨b|` commuting with `b̂`. Its loss is `Tr ρ̂(θ̂ − â)²`.
//! Expanding with `θ̂` diagonal in the basis gives
//!
//! ```text
//! L(θ̂) = ⟨â²⟩ − ⟨μ̂²⟩ + ⟨(θ̂ − μ̂)²⟩
//! ```
//!
//! so the real part of the weak value, `μ̂`, is the unique minimiser on every
//! outcome with `p(b) > 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, inner, sqrt_psd_with, ComplexMatrix};
use crate::qstate::{DensityMatrix, Observable, PostselectionBasis};
use crate::weakvalue::{profile_with, WeakValueProfile};
use crate::Tolerances;

/// Imaginary residue above which a loss is reported as non-real.
pub const NON_REAL_LOSS_TOL: f64 = 1e-9;

/// `θ̂ = Σ_b θ(b) |b⟩⟨b|`
#[derive(Debug, Clone, PartialEq)]
pub struct Estimator {
    basis: PostselectionBasis,
    values: Vec<f64>,
}

impl Estimator {
    pub fn new(basis: PostselectionBasis, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("estimator value".into()));
        }
        Ok(Self { basis, values })
    }

    pub fn basis(&self) -> &PostselectionBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn operator(&self) -> ComplexMatrix {
        self.basis.diagonal_operator(&self.values)
    }

    /// `‖[θ̂, b̂]‖_max`
    pub fn commutator_norm(&self) -> f64 {
        self.operator()
            .commutator(&self.basis.outcome_operator())
            .max_abs()
    }

    /// Copy with `delta` added to outcome `k`.
    pub fn perturbed(&self, k: usize, delta: f64) -> Self {
        let mut values = self.values.clone();
        values[k] += delta;
        Self {
            basis: self.basis.clone(),
            values,
        }
    }
}

/// `Tr ρ̂(θ̂ − â)²`
pub fn loss(rho: &DensityMatrix, a: &Observable, theta: &Estimator) -> Result<f64> {
    let n = a.dim();
    for found in [rho.dim(), theta.basis().dim()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let value = match rho.pure_vector() {
        Some(psi) => {
            // ‖(θ̂ − â)ψ‖²
            let t = theta.basis().apply_diagonal(theta.values(), psi);
            let ap = a.matrix().mul_vec(psi);
            let v: Vec<Complex64> = t.iter().zip(&ap).map(|(x, y)| x - y).collect();
            c(inner(&v, &v).re, 0.0)
        }
        None => {
            let m = theta.operator().sub(a.matrix());
            rho.expectation_sq(&m)
        }
    };
    if value.im.abs() > NON_REAL_LOSS_TOL {
        return Err(Error::NonRealLoss { imag: value.im });
    }
    Ok(value.re)
}

/// `θ(b) = μ(b)`, with 0 on excluded outcomes.
pub fn bayes_estimator(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
) -> Result<Estimator> {
    bayes_estimator_with(rho, a, basis, &Tolerances::default())
}

pub fn bayes_estimator_with(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
    tol: &Tolerances,
) -> Result<Estimator> {
    let profile = profile_with(rho, a, basis, tol)?;
    Estimator::new(basis.clone(), profile.mu())
}

/// Scan grid for [`bruteforce_bayes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Grid step `h`.
    pub step: f64,
    /// Half-width of the initial window; defaults to the operator norm `‖â‖`.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            step: 1e-3,
            half_width: None,
        }
    }
}

/// Grid-search minimiser of the loss, independent of the weak-value code.
///
/// With `θ̂ = Σ θ_b P_b` and `P_b = |b⟩⟨b|`,
///
/// ```text
/// Tr ρ(θ̂ − â)² = Σ_b θ_b² Tr(ρ P_b) − Σ_b θ_b Tr(ρ (P_b â + â P_b)) + Tr(ρ â²)
///              = Σ_b [ p_b θ_b² − c_b θ_b ] + const,
/// p_b = ⟨b|ρ|b⟩,   c_b = ⟨b|ρâ|b⟩ + ⟨b|âρ|b⟩ = 2 Re ⟨b|ρâ|b⟩,
/// ```
///
/// using `P_b P_{b'} = δ_{bb'} P_b`. The loss separates over outcomes, so
/// each `θ_b` is found by scanning `f_b(t) = p_b t² − c_b t` on a grid of
/// step `h`, then moving to the vertex of the parabola through the best grid
/// point and its two neighbours. If the best point lies on the window edge the
/// window is shifted outward (weak values can lie outside the spectrum).
/// Outcomes with `p_b` below the postselection cutoff get `θ_b = 0`.
pub fn bruteforce_bayes(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
    grid: GridSpec,
) -> Result<Estimator> {
    let n = a.dim();
    if rho.dim() != n || basis.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if rho.dim() != n {
                rho.dim()
            } else {
                basis.dim()
            },
        });
    }
    if !(grid.step > 0.0 && grid.step.is_finite()) {
        return Err(Error::InvalidArgument("grid step must be positive".into()));
    }
    let eps_ps = Tolerances::default().ps;
    let half = match grid.half_width {
        Some(w) => w,
        None => eig_hermitian(a.matrix())?.spectral_radius(),
    }
    .max(grid.step * 4.0);

    // ρâ by explicit summation
    let r = rho.matrix();
    let am = a.matrix();
    let mut rho_a = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = c(0.0, 0.0);
            for k in 0..n {
                acc += r[(i, k)] * am[(k, j)];
            }
            rho_a[i * n + j] = acc;
        }
    }

    let values = basis
        .vectors()
        .iter()
        .map(|b| {
            let mut p = c(0.0, 0.0);
            let mut q = c(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let w = b[i].conj() * b[j];
                    p += w * r[(i, j)];
                    q += w * rho_a[i * n + j];
                }
            }
            let p = p.re;
            let cb = 2.0 * q.re;
            if p < eps_ps {
                return 0.0;
            }
            scan_quadratic(|t| p * t * t - cb * t, half, grid.step)
        })
        .collect();
    Estimator::new(basis.clone(), values)
}

fn scan_quadratic(f: impl Fn(f64) -> f64, half: f64, h: f64) -> f64 {
    let steps = (2.0 * half / h).ceil() as i64;
    let mut lo = -half;
    for _ in 0..100_000 {
        let (mut best_k, mut best_f) = (0i64, f64::INFINITY);
        for k in 0..=steps {
            let v = f(lo + k as f64 * h);
            if v < best_f {
                best_f = v;
                best_k = k;
            }
        }
        if best_k == 0 {
            lo -= (steps - 2) as f64 * h;
            continue;
        }
        if best_k == steps {
            lo += (steps - 2) as f64 * h;
            continue;
        }
        let t0 = lo + best_k as f64 * h;
        let (fm, f0, fp) = (f(t0 - h), best_f, f(t0 + h));
        let curvature = fp - 2.0 * f0 + fm;
        if curvature <= 0.0 {
            return t0;
        }
        return t0 - 0.5 * h * (fp - fm) / curvature;
    }
    lo
}

/// Which estimator [`verify_bounds`] evaluates.
#[derive(Debug, Clone)]
pub enum EstimatorChoice {
    Bayes,
    Given(Estimator),
}

/// Loss decomposition and bound checks for one `(ρ̂, â, basis, θ̂)`.
///
/// All expectations are `⟨Ô⟩ = Tr ρ̂ Ô`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    /// `L(θ̂) = ⟨(θ̂ − â)²⟩`, evaluated directly.
    pub loss: f64,
    pub a2: f64,
    pub theta2: f64,
    /// `⟨(θ̂ − μ̂)²⟩`
    pub gap: f64,
    pub sigma2: f64,
    pub mu2: f64,
    /// `⟨â²⟩ − ⟨μ̂²⟩ − ⟨σ̂²⟩`
    pub schwarz_slack: f64,
    /// `L − (⟨â²⟩ − ⟨μ̂²⟩ + ⟨(θ̂ − μ̂)²⟩)`
    pub identity_residual: f64,
    /// `L − (⟨â²⟩ − ⟨θ̂²⟩ + ⟨(θ̂ − μ̂)²⟩)`; vanishes only when `⟨θ̂²⟩ = ⟨μ̂²⟩`.
    pub theta2_identity_residual: f64,
    /// `⟨â⟩`
    pub mean_a: f64,
    /// `⟨μ̂⟩`
    pub mean_mu: f64,
    pub purity: f64,
    pub is_bayes: bool,
    pub eq9_ok: bool,
    pub eq10_ok: bool,
    pub eq11_ok: bool,
    pub eq12_ok: bool,
    pub unbiased_ok: bool,
    /// Only evaluated for pure states with the Bayes estimator.
    pub pure_saturation_ok: Option<bool>,
}

impl LossReport {
    pub fn all_ok(&self) -> bool {
        self.eq9_ok
            && self.eq10_ok
            && self.eq11_ok
            && self.eq12_ok
            && self.unbiased_ok
            && self.pure_saturation_ok.unwrap_or(true)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

pub fn verify_bounds(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
    theta: EstimatorChoice,
) -> Result<LossReport> {
    verify_bounds_with(rho, a, basis, theta, &Tolerances::default())
}

/// Evaluates the loss and every decomposition term, and flags each bound.
pub fn verify_bounds_with(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
    theta: EstimatorChoice,
    tol: &Tolerances,
) -> Result<LossReport> {
    let profile = profile_with(rho, a, basis, tol)?;
    let mu = profile.mu();
    let (theta, is_bayes) = match theta {
        EstimatorChoice::Bayes => (Estimator::new(basis.clone(), mu.clone())?, true),
        EstimatorChoice::Given(t) => {
            if t.basis() != basis {
                return Err(Error::InvalidArgument(
                    "estimator is defined on a different basis".into(),
                ));
            }
            (t, false)
        }
    };
    let l = loss(rho, a, &theta)?;
    report_from_parts(rho, a, &profile, &theta, l, is_bayes, tol)
}

fn report_from_parts(
    rho: &DensityMatrix,
    a: &Observable,
    profile: &WeakValueProfile,
    theta: &Estimator,
    loss: f64,
    is_bayes: bool,
    tol: &Tolerances,
) -> Result<LossReport> {
    let mu = profile.mu();
    let sigma = profile.sigma();
    let th = theta.values();
    let sq = |xs: &[f64]| xs.iter().map(|x| x * x).collect::<Vec<_>>();

    let a2c = rho.expectation_sq(a.matrix());
    if a2c.im.abs() > NON_REAL_LOSS_TOL {
        return Err(Error::NonRealLoss { imag: a2c.im });
    }
    let a2 = a2c.re;
    let theta2 = profile.weighted_sum(&sq(th));
    let mu2 = profile.weighted_sum(&sq(&mu));
    let sigma2 = profile.weighted_sum(&sq(&sigma));
    let diff: Vec<f64> = th.iter().zip(&mu).map(|(t, m)| t - m).collect();
    let gap = profile.weighted_sum(&sq(&diff));
    let schwarz_slack = a2 - mu2 - sigma2;
    let identity_residual = loss - (a2 - mu2 + gap);
    let theta2_identity_residual = loss - (a2 - theta2 + gap);
    let mean_a = rho.expectation(a.matrix()).re;
    let mean_mu = profile.weighted_sum(&mu);
    let purity = rho.purity();

    let id = tol.id;
    let pure_saturation_ok = (is_bayes && (purity - 1.0).abs() <= tol.norm)
        .then(|| (loss - sigma2).abs() <= id && schwarz_slack.abs() <= id);
    // Excluded outcomes carry at most ε_ps·dim of probability.
    let unbias_tol = 1e-10 + profile.excluded_mass() * a.matrix().max_abs() * a.dim() as f64;

    Ok(LossReport {
        loss,
        a2,
        theta2,
        gap,
        sigma2,
        mu2,
        schwarz_slack,
        identity_residual,
        theta2_identity_residual,
        mean_a,
        mean_mu,
        purity,
        is_bayes,
        eq9_ok: identity_residual.abs() <= id && gap >= -id,
        eq10_ok: schwarz_slack >= -id && sigma2 >= -id,
        eq11_ok: loss >= a2 - mu2 - id,
        eq12_ok: loss >= sigma2 - id,
        unbiased_ok: (mean_mu - mean_a).abs() <= unbias_tol,
        pure_saturation_ok,
    })
}

/// True iff every retained outcome has `|σ(b)| ≤ tol`, i.e. an exact
/// estimate of `â` from the outcome exists.
pub fn exactness_certificate(profile: &WeakValueProfile, tol: f64) -> bool {
    profile
        .entries
        .iter()
        .filter(|e| !e.excluded)
        .all(|e| e.sigma.is_some_and(|s| s.abs() <= tol))
}

/// The vectors `|μ⟩ = ρ̂^{1/2} â|b⟩` and `|ν⟩ = ρ̂^{1/2}|b⟩` behind the Schwarz
/// bound `|⟨μ|ν⟩|² ≤ ⟨μ|μ⟩⟨ν|ν⟩`.
#[derive(Debug, Clone)]
pub struct SchwarzVectors {
    pub mu: Vec<Complex64>,
    pub nu: Vec<Complex64>,
}

impl SchwarzVectors {
    pub fn new(rho: &DensityMatrix, a: &Observable, b: &[Complex64]) -> Result<Self> {
        let root = sqrt_psd_with(rho.matrix(), Tolerances::default().psd)?;
        Ok(Self::with_root(&root, a, b))
    }

    pub fn with_root(root: &ComplexMatrix, a: &Observable, b: &[Complex64]) -> Self {
        Self {
            mu: root.mul_vec(&a.matrix().mul_vec(b)),
            nu: root.mul_vec(b),
        }
    }

    /// `⟨μ|ν⟩ = ⟨b|âρ̂|b⟩`
    pub fn overlap(&self) -> Complex64 {
        inner(&self.mu, &self.nu)
    }

    /// `⟨μ|μ⟩⟨ν|ν⟩ − |⟨μ|ν⟩|² ≥ 0`
    pub fn slack(&self) -> f64 {
        inner(&self.mu, &self.mu).re * inner(&self.nu, &self.nu).re - self.overlap().norm_sqr()
    }
}
