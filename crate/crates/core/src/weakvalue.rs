//! Weak values and the per-outcome estimator profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, inner, ComplexMatrix};
use crate::qstate::{DensityMatrix, Observable, PostselectionBasis, PureState};
use crate::Tolerances;

/// `⟨b|â|ψ⟩ / ⟨b|ψ⟩`
pub fn weak_value_pure(psi: &PureState, a: &Observable, b: &[Complex64]) -> Result<Complex64> {
    weak_value_pure_with(psi, a, b, Tolerances::default().ps)
}

pub fn weak_value_pure_with(
    psi: &PureState,
    a: &Observable,
    b: &[Complex64],
    eps_ps: f64,
) -> Result<Complex64> {
    check_dims(a.dim(), psi.dim())?;
    check_dims(a.dim(), b.len())?;
    let overlap = inner(b, psi.amplitudes());
    if overlap.norm_sqr() < eps_ps {
        return Err(Error::ZeroOverlap {
            overlap: overlap.norm_sqr(),
        });
    }
    Ok(a.matrix().sandwich(b, psi.amplitudes()) / overlap)
}

/// `α(b) = ⟨b|â ρ̂|b⟩ / ⟨b|ρ̂|b⟩`
pub fn alpha_mixed(rho: &DensityMatrix, a: &Observable, b: &[Complex64]) -> Result<Complex64> {
    alpha_mixed_with(rho, a, b, Tolerances::default().ps)
}

pub fn alpha_mixed_with(
    rho: &DensityMatrix,
    a: &Observable,
    b: &[Complex64],
    eps_ps: f64,
) -> Result<Complex64> {
    check_dims(a.dim(), rho.dim())?;
    check_dims(a.dim(), b.len())?;
    let prob = rho.prob(b);
    if prob < eps_ps {
        return Err(Error::ZeroProbability { prob });
    }
    Ok(numerator(rho, a, b) / prob)
}

/// `⟨b|â ρ̂|b⟩ = ⟨âb|ρ̂b⟩` for Hermitian `â`.
fn numerator(rho: &DensityMatrix, a: &Observable, b: &[Complex64]) -> Complex64 {
    let ab = a.matrix().mul_vec(b);
    match rho.pure_vector() {
        Some(psi) => inner(&ab, psi) * inner(psi, b),
        None => inner(&ab, &rho.matrix().mul_vec(b)),
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// One postselection outcome. `alpha`, `mu` and `sigma` are `None` when the
/// outcome is excluded for having probability below the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub label: String,
    pub prob: f64,
    pub alpha: Option<Complex64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub excluded: bool,
}

/// Per-outcome `(p(b), α(b), μ(b), σ(b))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeakValueProfile {
    pub entries: Vec<ProfileEntry>,
}

impl WeakValueProfile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.prob).collect()
    }

    /// `μ(b)`, with 0 on excluded outcomes.
    pub fn mu(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu.unwrap_or(0.0)).collect()
    }

    /// `σ(b)`, with 0 on excluded outcomes.
    pub fn sigma(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.sigma.unwrap_or(0.0))
            .collect()
    }

    pub fn alpha(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|e| e.alpha.unwrap_or(c(0.0, 0.0)))
            .collect()
    }

    pub fn excluded_mass(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.excluded)
            .map(|e| e.prob)
            .sum()
    }

    pub fn has_exclusions(&self) -> bool {
        self.entries.iter().any(|e| e.excluded)
    }

    /// `Σ_b p(b) f(b)` over all outcomes.
    pub fn weighted_sum(&self, values: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(values)
            .map(|(e, v)| e.prob * v)
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("profile serialises")
    }
}

pub fn profile(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
) -> Result<WeakValueProfile> {
    profile_with(rho, a, basis, &Tolerances::default())
}

/// Weak-value profile over every basis outcome.
///
/// Outcomes with `p(b) < tol.ps` are marked excluded. If their total mass
/// exceeds `tol.ps · dim` the ensemble is rejected as degenerate.
pub fn profile_with(
    rho: &DensityMatrix,
    a: &Observable,
    basis: &PostselectionBasis,
    tol: &Tolerances,
) -> Result<WeakValueProfile> {
    check_dims(a.dim(), rho.dim())?;
    check_dims(a.dim(), basis.dim())?;
    let a_psi = rho.pure_vector().map(|psi| a.matrix().mul_vec(psi));

    let entries: Vec<ProfileEntry> = basis
        .vectors()
        .iter()
        .zip(basis.labels())
        .map(|(b, label)| {
            let (prob, num) = match (rho.pure_vector(), &a_psi) {
                (Some(psi), Some(apsi)) => {
                    let ov = inner(b, psi);
                    (ov.norm_sqr(), inner(b, apsi) * ov.conj())
                }
                _ => (rho.prob(b), numerator(rho, a, b)),
            };
            if prob < tol.ps {
                ProfileEntry {
                    label: label.clone(),
                    prob,
                    alpha: None,
                    mu: None,
                    sigma: None,
                    excluded: true,
                }
            } else {
                let alpha = num / prob;
                ProfileEntry {
                    label: label.clone(),
                    prob,
                    alpha: Some(alpha),
                    mu: Some(alpha.re),
                    sigma: Some(alpha.im),
                    excluded: false,
                }
            }
        })
        .collect();

    let profile = WeakValueProfile { entries };
    let allowed = tol.ps * basis.dim() as f64;
    let excluded_mass = profile.excluded_mass();
    if excluded_mass > allowed {
        return Err(Error::DegenerateEnsemble {
            excluded_mass,
            allowed,
        });
    }
    Ok(profile)
}

/// `(μ̂, σ̂) = (Σ μ(b)|b⟩⟨b|, Σ σ(b)|b⟩⟨b|)`. Excluded outcomes contribute 0.
pub fn estimator_operators(
    profile: &WeakValueProfile,
    basis: &PostselectionBasis,
) -> (ComplexMatrix, ComplexMatrix) {
    assert_eq!(profile.len(), basis.dim(), "profile/basis size mismatch");
    (
        basis.diagonal_operator(&profile.mu()),
        basis.diagonal_operator(&profile.sigma()),
    )
}

/// `α̂ = μ̂ + iσ̂`
pub fn alpha_operator(profile: &WeakValueProfile, basis: &PostselectionBasis) -> ComplexMatrix {
    let (mu, sigma) = estimator_operators(profile, basis);
    mu.add(&sigma.scale(c(0.0, 1.0)))
}
