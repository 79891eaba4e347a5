//! Estimating momentum from a position measurement on a periodic grid.
//!
//! Positions are `q_j = −L/2 + j·dx` with `dx = L/n`. The momentum operator is
//! Fourier-diagonal, `p̂ = F† diag(k_m) F` with `k_m = 2π m/L` for signed
//! `m ∈ [−n/2, n/2)`, so it is exactly Hermitian on the grid. Units have
//! `ħ = 1`. A sample `ψ(q_j)` corresponds to the unit vector component
//! `ψ(q_j)·√dx`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{verify_bounds_with, EstimatorChoice, LossReport};
use crate::linalg::{c, ComplexMatrix};
use crate::qstate::{density_from_pure, Observable, PostselectionBasis, PureState};
use crate::weakvalue::{ProfileEntry, WeakValueProfile};
use crate::Tolerances;

/// Tolerance on the pure-state equality `L = ⟨σ̂²⟩` on the grid.
pub const TOL_GRID: f64 = 1e-8;
/// Minimum `s·n/L` accepted for Gaussian inputs.
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

/// Samples `ψ(q_j)` with `Σ|ψ|² dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    n: usize,
    length: f64,
    samples: Vec<Complex64>,
}

fn check_grid(n: usize, length: f64) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "grid size must be a power of two, got {n}"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid length must be positive, got {length}"
        )));
    }
    Ok(())
}

impl GridWavefunction {
    pub fn new(n: usize, length: f64, samples: Vec<Complex64>) -> Result<Self> {
        check_grid(n, length)?;
        if samples.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: samples.len(),
            });
        }
        let norm = samples.iter().map(Complex64::norm_sqr).sum::<f64>() * length / n as f64;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sqr: norm });
        }
        Ok(Self { n, length, samples })
    }

    /// Samples `f` on the grid and normalises.
    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid(n, length)?;
        let dx = length / n as f64;
        let mut samples: Vec<Complex64> =
            (0..n).map(|j| f(-length / 2.0 + j as f64 * dx)).collect();
        let norm = (samples.iter().map(Complex64::norm_sqr).sum::<f64>() * dx).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        for z in &mut samples {
            *z /= norm;
        }
        Self::new(n, length, samples)
    }

    /// `exp(−q²/4s² + i k₀ q)`; position variance `s²`.
    pub fn gaussian(n: usize, length: f64, s: f64, k0: f64) -> Result<Self> {
        resolution_guard(s, n, length)?;
        Self::from_fn(n, length, |q| {
            Complex64::from_polar((-q * q / (4.0 * s * s)).exp(), k0 * q)
        })
    }

    /// `exp(i k q)` with `k = 2π·mode/L`, an exact eigenvector of `p̂`.
    pub fn plane_wave(n: usize, length: f64, mode: i64) -> Result<Self> {
        check_grid(n, length)?;
        let half = (n / 2) as i64;
        if mode < -half || mode >= half {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} is outside [-{half}, {half})"
            )));
        }
        let k = TAU * mode as f64 / length;
        Self::from_fn(n, length, |q| Complex64::from_polar(1.0, k * q))
    }

    /// Equal superposition of two width-`s` Gaussians centred at `±d/2`,
    /// the right one carrying momentum `k0`.
    pub fn double_gaussian(n: usize, length: f64, s: f64, d: f64, k0: f64) -> Result<Self> {
        resolution_guard(s, n, length)?;
        Self::from_fn(n, length, |q| {
            let l = q + d / 2.0;
            let r = q - d / 2.0;
            c((-l * l / (4.0 * s * s)).exp(), 0.0)
                + Complex64::from_polar((-r * r / (4.0 * s * s)).exp(), k0 * q)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn q(&self, j: usize) -> f64 {
        -self.length / 2.0 + j as f64 * self.dx()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Unit state vector `ψ(q_j)·√dx`.
    pub fn state(&self) -> PureState {
        let w = self.dx().sqrt();
        let v = self.samples.iter().map(|z| z * w).collect();
        PureState::new_with(v, 1e-9).expect("normalised on construction")
    }
}

/// Rejects Gaussian widths resolved by fewer than 8 grid points.
pub fn resolution_guard(s: f64, n: usize, length: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    let per = s * n as f64 / length;
    if per < MIN_POINTS_PER_WIDTH {
        return Err(Error::ResolutionGuard(format!(
            "s·n/L = {per:.3} is below {MIN_POINTS_PER_WIDTH}"
        )));
    }
    Ok(())
}

fn wavenumber(m: usize, n: usize, length: f64) -> f64 {
    let signed = if m < n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    };
    TAU * signed / length
}

/// Dense `p̂ = F† diag(k) F` on an `n`-point periodic grid of length `L`.
pub fn momentum_observable(n: usize, length: f64) -> Result<Observable> {
    check_grid(n, length)?;
    // p̂ is circulant: p_{jl} = c[(j − l) mod n], c[d] = (1/n) Σ_m k_m e^{2πi m d/n}
    let col: Vec<Complex64> = (0..n)
        .map(|d| {
            (0..n)
                .map(|m| {
                    let phase = TAU * ((m * d) % n) as f64 / n as f64;
                    Complex64::from_polar(wavenumber(m, n, length), phase)
                })
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        for l in 0..n {
            data.push(col[(j + n - l) % n]);
        }
    }
    Observable::new(ComplexMatrix::new(n, data)?)
}

/// `p̂ψ` via FFT.
pub fn apply_momentum(samples: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (m, z) in buf.iter_mut().enumerate() {
        *z *= wavenumber(m, n, length) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `(⟨p̂⟩, Var p̂)` from the Fourier-diagonal representation.
pub fn momentum_moments(psi: &GridWavefunction) -> (f64, f64) {
    let n = psi.n();
    let mut buf = psi.samples().to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let w: Vec<f64> = buf.iter().map(Complex64::norm_sqr).collect();
    let total: f64 = w.iter().sum();
    let k = |m| wavenumber(m, n, psi.length());
    let mean = w.iter().enumerate().map(|(m, x)| x * k(m)).sum::<f64>() / total;
    let second = w
        .iter()
        .enumerate()
        .map(|(m, x)| x * k(m).powi(2))
        .sum::<f64>()
        / total;
    (mean, second - mean * mean)
}

/// Weak values of `p̂` postselected on each grid point:
/// `p(q) = |ψ(q)|² dx`, `α(q) = (p̂ψ)(q)/ψ(q)`.
pub fn position_profile(psi: &GridWavefunction) -> Result<WeakValueProfile> {
    let tol = Tolerances::default();
    let p_psi = apply_momentum(psi.samples(), psi.length());
    let dx = psi.dx();
    let entries: Vec<ProfileEntry> = psi
        .samples()
        .iter()
        .zip(&p_psi)
        .enumerate()
        .map(|(j, (z, pz))| {
            let prob = z.norm_sqr() * dx;
            if prob < tol.ps {
                ProfileEntry {
                    label: j.to_string(),
                    prob,
                    alpha: None,
                    mu: None,
                    sigma: None,
                    excluded: true,
                }
            } else {
                let alpha = pz / z;
                ProfileEntry {
                    label: j.to_string(),
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
    let allowed = tol.ps * psi.n() as f64;
    let excluded_mass = profile.excluded_mass();
    if excluded_mass > allowed {
        return Err(Error::DegenerateEnsemble {
            excluded_mass,
            allowed,
        });
    }
    Ok(profile)
}

/// Bayes-estimator loss report for `â = p̂` postselected on position.
pub fn exact_uncertainty_check(psi: &GridWavefunction) -> Result<LossReport> {
    let p = momentum_observable(psi.n(), psi.length())?;
    let rho = density_from_pure(&psi.state());
    let basis = PostselectionBasis::standard(psi.n());
    let tol = Tolerances {
        id: TOL_GRID,
        norm: 1e-9,
        ..Tolerances::default()
    };
    verify_bounds_with(&rho, &p, &basis, EstimatorChoice::Bayes, &tol)
}

/// Summary written by the demo command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EurReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub loss: f64,
    pub sigma2: f64,
    /// `|L − ⟨σ̂²⟩|`
    pub equality_gap: f64,
    pub schwarz_slack: f64,
    pub mean_p: f64,
    pub var_p: f64,
}

impl EurReport {
    pub fn passes(&self) -> bool {
        self.equality_gap <= TOL_GRID
    }
}

pub fn demo_report(psi: &GridWavefunction) -> Result<EurReport> {
    let r = exact_uncertainty_check(psi)?;
    let (mean_p, var_p) = momentum_moments(psi);
    Ok(EurReport {
        n: psi.n(),
        length: psi.length(),
        loss: r.loss,
        sigma2: r.sigma2,
        equality_gap: (r.loss - r.sigma2).abs(),
        schwarz_slack: r.schwarz_slack,
        mean_p,
        var_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;
    use std::f64::consts::PI;

    #[test]
    fn small_momentum_spectrum() {
        let p = momentum_observable(4, TAU).unwrap();
        assert!(p.matrix().hermiticity_violation() < 1e-15);
        let e = eig_hermitian(p.matrix()).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([-2.0, -1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn plane_waves_are_eigenvectors() {
        let (n, l) = (32, 10.0);
        let p = momentum_observable(n, l).unwrap();
        for mode in [-16, -3, 0, 5, 15] {
            let psi = GridWavefunction::plane_wave(n, l, mode).unwrap();
            let v = psi.state();
            let pv = p.matrix().mul_vec(v.amplitudes());
            let k = TAU * mode as f64 / l;
            for (x, y) in pv.iter().zip(v.amplitudes()) {
                assert!((x - y * k).norm() < 1e-12);
            }
            let fast = apply_momentum(psi.samples(), l);
            for (x, y) in fast.iter().zip(psi.samples()) {
                assert!((x - y * k).norm() < 1e-12);
            }
        }
        assert!(GridWavefunction::plane_wave(n, l, 16).is_err());
    }

    #[test]
    fn real_gaussian_has_zero_bayes_estimate() {
        let psi = GridWavefunction::gaussian(512, 40.0, 1.0, 0.0).unwrap();
        let prof = position_profile(&psi).unwrap();
        assert!(prof.mu().iter().all(|m| m.abs() < 1e-9));
    }

    #[test]
    fn plane_wave_profile_is_exact() {
        let psi = GridWavefunction::plane_wave(64, 2.0 * PI, 3).unwrap();
        let prof = position_profile(&psi).unwrap();
        assert!(prof.mu().iter().all(|m| (m - 3.0).abs() < 1e-10));
        assert!(prof.sigma().iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn under_resolved_gaussian_trips_guard() {
        let e = GridWavefunction::gaussian(128, 40.0, 0.01, 0.0);
        assert!(matches!(e, Err(Error::ResolutionGuard(_))));
    }

    #[test]
    fn dense_and_fft_momentum_agree() {
        let psi = GridWavefunction::double_gaussian(64, 8.0, 1.0, 3.0, 0.7).unwrap();
        let p = momentum_observable(64, 8.0).unwrap();
        let dense = p.matrix().mul_vec(psi.samples());
        let fast = apply_momentum(psi.samples(), 8.0);
        for (x, y) in dense.iter().zip(&fast) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(momentum_observable(6, 1.0).is_err());
        assert!(momentum_observable(8, 0.0).is_err());
        assert!(GridWavefunction::new(4, 1.0, vec![c(2.0, 0.0); 4]).is_err());
        assert!(GridWavefunction::new(4, 1.0, vec![c(1.0, 0.0); 3]).is_err());
    }
}
