//! Von Neumann measurement with a Gaussian pointer.
//!
//! The system is coupled to a one-dimensional pointer by the impulsive
//! interaction `exp(−i g â ⊗ k̂)`, which translates the pointer by `g·a_j` in
//! each eigenbranch `a_j` of `â`. The evolution is applied exactly: `â` is
//! diagonalised and each branch's Gaussian is evaluated at its shifted
//! centre. After projecting the system on `|b⟩`, the pointer's position and
//! momentum distributions are computed on the grid (momentum by unitary DFT).
//!
//! For small `g`, `⟨x⟩/g → Re a_w` and `⟨k⟩/(2 g s_k²) → Im a_w`, where
//! `s_k² = 1/(4s²)` is the initial momentum variance of a pointer with
//! position width `s`. Both ratios are even in `g`, so their errors are
//! `O(g²)` and Richardson extrapolation in `g²` removes them.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, inner};
use crate::qstate::{Observable, PureState};
use crate::Tolerances;

/// Mass of the initial pointer allowed outside the grid window.
pub const CONTAINMENT_TOL: f64 = 1e-12;
/// Mass of a translated branch allowed outside the grid window.
pub const OVERFLOW_TOL: f64 = 1e-9;
/// Required grid points per standard deviation, in both domains.
pub const POINTS_PER_SIGMA: f64 = 8.0;

/// Uniform periodic pointer grid `x_j = x_min + j·dx`, `dx = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerGrid {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl PointerGrid {
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "pointer grid size must be a power of two >= 64, got {n}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidArgument(format!(
                "pointer grid window [{x_min}, {x_max}) is empty"
            )));
        }
        Ok(Self { n, x_min, x_max })
    }

    /// Symmetric window that balances position and momentum resolution for a
    /// pointer of width `s`: `dx/s = 2 s·dk = √(4π/n)`.
    pub fn for_pointer(n: usize, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(
                "pointer width must be positive".into(),
            ));
        }
        let len = s * (4.0 * PI * n as f64).sqrt();
        Self::new(n, -len / 2.0, len / 2.0)
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        TAU / self.length()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    /// Momentum of DFT bin `m`, signed index in `[−n/2, n/2)`.
    pub fn k(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        signed * self.dk()
    }

    /// Probability of `N(center, s²)` outside `[x_min, x_max]`.
    pub fn leaked_mass(&self, center: f64, s: f64) -> f64 {
        0.5 * erfc((self.x_max - center) / (s * SQRT_2))
            + 0.5 * erfc((center - self.x_min) / (s * SQRT_2))
    }

    /// Checks that a width-`s` pointer is contained and resolved in both
    /// position and momentum.
    pub fn check_pointer(&self, s: f64) -> Result<()> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(
                "pointer width must be positive".into(),
            ));
        }
        let leak = self.leaked_mass(0.0, s);
        if leak > CONTAINMENT_TOL {
            return Err(Error::ResolutionGuard(format!(
                "initial pointer leaks {leak:.3e} outside the window"
            )));
        }
        let per_x = s / self.dx();
        let per_k = (0.5 / s) / self.dk();
        if per_x < POINTS_PER_SIGMA || per_k < POINTS_PER_SIGMA {
            return Err(Error::ResolutionGuard(format!(
                "pointer resolved by {per_x:.2} points per sigma in x and {per_k:.2} in k; \
                 need {POINTS_PER_SIGMA}"
            )));
        }
        Ok(())
    }
}

/// Postselected pointer statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerStats {
    pub p_post: f64,
    pub mean_x: f64,
    pub mean_k: f64,
    pub var_x: f64,
    pub var_k: f64,
    /// `Σ|amplitude|² dx` of the joint state before postselection.
    pub joint_norm: f64,
}

fn gaussian(x: f64, s: f64) -> f64 {
    (TAU * s * s).powf(-0.25) * (-x * x / (4.0 * s * s)).exp()
}

/// Mean and variance of the momentum distribution of pointer amplitudes.
fn momentum_moments(grid: &PointerGrid, amps: &[Complex64]) -> (f64, f64) {
    let mut buf = amps.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(grid.n).process(&mut buf);
    let weights: Vec<f64> = buf.iter().map(Complex64::norm_sqr).collect();
    let total: f64 = weights.iter().sum();
    let mean = weights
        .iter()
        .enumerate()
        .map(|(m, w)| w * grid.k(m))
        .sum::<f64>()
        / total;
    let var = weights
        .iter()
        .enumerate()
        .map(|(m, w)| w * (grid.k(m) - mean).powi(2))
        .sum::<f64>()
        / total;
    (mean, var)
}

/// Momentum variance of the unshifted width-`s` pointer on `grid`.
pub fn initial_momentum_variance(grid: &PointerGrid, s: f64) -> f64 {
    let amps: Vec<Complex64> = (0..grid.n)
        .map(|j| c(gaussian(grid.x(j), s), 0.0))
        .collect();
    momentum_moments(grid, &amps).1
}

/// Couples `|ψ⟩ ⊗ φ_s` with strength `g`, postselects `|b⟩` and returns the
/// pointer statistics.
pub fn simulate(
    psi: &PureState,
    a: &Observable,
    b: &[Complex64],
    g: f64,
    s: f64,
    grid: &PointerGrid,
) -> Result<PointerStats> {
    let dim = a.dim();
    for found in [psi.dim(), b.len()] {
        if found != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    if !g.is_finite() {
        return Err(Error::InvalidArgument("coupling must be finite".into()));
    }
    grid.check_pointer(s)?;

    let eig = eig_hermitian(a.matrix())?;
    let mut joint_norm = 0.0;
    let mut branches = Vec::with_capacity(dim);
    for (lambda, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let amp = inner(v, psi.amplitudes());
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let center = g * lambda;
        let leaked = grid.leaked_mass(center, s);
        if leaked > OVERFLOW_TOL {
            return Err(Error::GridOverflow { leaked });
        }
        let branch_norm: f64 = (0..grid.n)
            .map(|j| gaussian(grid.x(j) - center, s).powi(2))
            .sum::<f64>()
            * grid.dx();
        joint_norm += amp.norm_sqr() * branch_norm;
        branches.push((center, inner(b, v) * amp));
    }

    let chi: Vec<Complex64> = (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            branches
                .iter()
                .map(|(center, w)| w * gaussian(x - center, s))
                .sum()
        })
        .collect();

    let dx = grid.dx();
    let weights: Vec<f64> = chi.iter().map(Complex64::norm_sqr).collect();
    let p_post: f64 = weights.iter().sum::<f64>() * dx;
    if p_post < Tolerances::default().ps {
        return Err(Error::ZeroPostselection { p_post });
    }
    let total: f64 = weights.iter().sum();
    let mean_x = weights
        .iter()
        .enumerate()
        .map(|(j, w)| w * grid.x(j))
        .sum::<f64>()
        / total;
    let var_x = weights
        .iter()
        .enumerate()
        .map(|(j, w)| w * (grid.x(j) - mean_x).powi(2))
        .sum::<f64>()
        / total;
    let (mean_k, var_k) = momentum_moments(grid, &chi);

    Ok(PointerStats {
        p_post,
        mean_x,
        mean_k,
        var_x,
        var_k,
        joint_norm,
    })
}

/// One coupling strength of an extraction sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: f64,
    pub p_post: f64,
    pub mean_x: f64,
    pub mean_k: f64,
    /// `⟨x⟩/g`
    pub mean_x_over_g: f64,
    pub implied_re: f64,
    pub implied_im: f64,
}

/// Extrapolated pointer readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueEstimate {
    pub value: Complex64,
    /// `|R_{m,m} − R_{m,m−1}|` for the real part.
    pub re_error: f64,
    pub im_error: f64,
    /// Initial pointer momentum variance used for the imaginary readout.
    pub momentum_variance: f64,
    pub sweep: Vec<SweepRow>,
}

/// Richardson table for `f(g) = f₀ + c₁g² + c₂g⁴ + …` sampled at decreasing
/// `g`. Returns the final diagonal entry and its distance to the entry left
/// of it.
pub fn richardson_even(gs: &[f64], values: &[f64]) -> (f64, f64) {
    assert_eq!(gs.len(), values.len());
    assert!(!gs.is_empty());
    let mut prev: Vec<f64> = values.to_vec();
    let mut last_err = f64::INFINITY;
    for level in 1..gs.len() {
        let mut next = Vec::with_capacity(prev.len() - 1);
        for i in level..gs.len() {
            let ratio = (gs[i - level] / gs[i]).powi(2);
            let hi = prev[i - level + 1];
            let lo = prev[i - level];
            next.push(hi + (hi - lo) / (ratio - 1.0));
        }
        last_err = (next[next.len() - 1] - prev[prev.len() - 1]).abs();
        prev = next;
    }
    (prev[prev.len() - 1], last_err)
}

/// Runs [`simulate`] over `g_sequence` and extrapolates `g → 0`.
///
/// Fails with [`Error::NoConvergence`] if either component's last
/// extrapolation step moved by more than `tol`.
pub fn extract_weak_value(
    psi: &PureState,
    a: &Observable,
    b: &[Complex64],
    s: f64,
    g_sequence: &[f64],
    grid: &PointerGrid,
    tol: f64,
) -> Result<WeakValueEstimate> {
    if g_sequence.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 coupling strengths, got {}",
            g_sequence.len()
        )));
    }
    if g_sequence.iter().any(|g| !(g.is_finite() && *g > 0.0))
        || g_sequence.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "coupling strengths must be positive and strictly decreasing".into(),
        ));
    }
    grid.check_pointer(s)?;
    let sk2 = initial_momentum_variance(grid, s);

    let sweep = g_sequence
        .iter()
        .map(|&g| {
            let st = simulate(psi, a, b, g, s, grid)?;
            Ok(SweepRow {
                g,
                p_post: st.p_post,
                mean_x: st.mean_x,
                mean_k: st.mean_k,
                mean_x_over_g: st.mean_x / g,
                implied_re: st.mean_x / g,
                implied_im: st.mean_k / (2.0 * g * sk2),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let re: Vec<f64> = sweep.iter().map(|r| r.implied_re).collect();
    let im: Vec<f64> = sweep.iter().map(|r| r.implied_im).collect();
    let (re_value, re_error) = richardson_even(g_sequence, &re);
    let (im_value, im_error) = richardson_even(g_sequence, &im);
    if re_error > tol || im_error > tol {
        return Err(Error::NoConvergence(format!(
            "Richardson steps moved by {re_error:.3e} (re) and {im_error:.3e} (im), \
             tolerance {tol:.1e}"
        )));
    }
    Ok(WeakValueEstimate {
        value: c(re_value, im_value),
        re_error,
        im_error,
        momentum_variance: sk2,
        sweep,
    })
}

/// `g, g/2, g/4, …` with `levels` entries.
pub fn halving_sequence(g0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| g0 / f64::powi(2.0, k as i32)).collect()
}
