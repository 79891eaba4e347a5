//! Frozen reference values and plain-loop cross-checks.

mod common;

use common::*;
use weakval::qstate::Sampler;
use weakval::{
    alpha_mixed, bayes_estimator, bruteforce_bayes, eig_hermitian, profile, random_instance,
    verify_bounds, Complex64, ComplexMatrix, DensityMatrix, EstimatorChoice, GridSpec, Observable,
    PostselectionBasis, PureState, Purity,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn eig_reconstructs_seeded_8x8() {
    let mut s = Sampler::new(42);
    let m = s.observable(8);
    let e = eig_hermitian(m.matrix()).unwrap();
    let n = 8;
    let a = mat(m.matrix());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = (0.0, 0.0);
            for k in 0..n {
                let v = &e.eigenvectors[k];
                let t = mul(to_cx(v[i]), conj(to_cx(v[j])));
                acc = add(acc, (e.eigenvalues[k] * t.0, e.eigenvalues[k] * t.1));
            }
            worst = worst.max(((acc.0 - a[i][j].0).powi(2) + (acc.1 - a[i][j].1).powi(2)).sqrt());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
    assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    // orthonormal columns
    for k in 0..n {
        for l in 0..n {
            let v = vecx(&e.eigenvectors[k]);
            let w = vecx(&e.eigenvectors[l]);
            let ip = (0..n).fold((0.0, 0.0), |acc, i| add(acc, mul(conj(v[i]), w[i])));
            let want = if k == l { 1.0 } else { 0.0 };
            assert!((ip.0 - want).abs() < 1e-10 && ip.1.abs() < 1e-10);
        }
    }
}

#[test]
fn hand_arithmetic_mixed_alpha() {
    // ρ = diag(0.7, 0.3), â = σ_x, |b⟩ = |+⟩:
    // ⟨+|σ_x ρ|+⟩ = ⟨+|ρ|+⟩ = 0.5, so α = 1.
    let rho = DensityMatrix::new(ComplexMatrix::from_diag(&[0.7, 0.3])).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let b = [c(h, 0.0), c(h, 0.0)];
    let al = alpha_mixed(&rho, &Observable::pauli_x(), &b).unwrap();
    assert!((al - c(1.0, 0.0)).norm() < 1e-14);
    // ⟨0|σ_y ρ|0⟩ vanishes; with |b⟩ = (|0⟩ + i|1⟩)/√2:
    // σ_y ρ = [[0, -0.3i], [0.7i, 0]], ⟨b|σ_y ρ|b⟩ = (0.3 + 0.7)/2 = 0.5
    let b = [c(h, 0.0), c(0.0, h)];
    let al = alpha_mixed(&rho, &Observable::pauli_y(), &b).unwrap();
    assert!((al - c(1.0, 0.0)).norm() < 1e-14, "{al}");
}

#[test]
fn alpha_matches_plain_loops() {
    for seed in 0..40 {
        let purity = if seed % 2 == 0 {
            Purity::Mixed
        } else {
            Purity::Pure
        };
        let (rho, a, basis) = random_instance(2 + seed as usize % 5, purity, seed).unwrap();
        let (r, am) = (mat(rho.matrix()), mat(a.matrix()));
        for b in basis.vectors() {
            let (want, p) = alpha(&r, &am, &vecx(b));
            let got = alpha_mixed(&rho, &a, b).unwrap();
            assert!((got.re - want.0).abs() < 1e-10 * (1.0 + want.0.abs()));
            assert!((got.im - want.1).abs() < 1e-10 * (1.0 + want.1.abs()));
            assert!((rho.prob(b) - p).abs() < 1e-13);
        }
    }
}

#[test]
fn unbiasedness_by_plain_trace() {
    let (rho, a, basis) = random_instance(4, Purity::Mixed, 11).unwrap();
    let pr = profile(&rho, &a, &basis).unwrap();
    let tr = trace(&matmul(&mat(rho.matrix()), &mat(a.matrix())));
    assert!(tr.1.abs() < 1e-13);
    assert!((pr.weighted_sum(&pr.mu()) - tr.0).abs() <= 1e-12);
}

#[test]
fn pure_loss_equals_plain_sigma2() {
    let (rho, a, basis) = random_instance(5, Purity::Pure, 3).unwrap();
    let rep = verify_bounds(&rho, &a, &basis, EstimatorChoice::Bayes).unwrap();
    let pr = profile(&rho, &a, &basis).unwrap();
    let bs: Vec<Vec<Cx>> = basis.vectors().iter().map(|v| vecx(v)).collect();
    let s2: Vec<f64> = pr.sigma().iter().map(|s| s * s).collect();
    let sig2_op = diag_in_basis(&s2, &bs);
    let tr = trace(&matmul(&mat(rho.matrix()), &sig2_op));
    assert!((rep.loss - tr.0).abs() <= 1e-10, "{} vs {}", rep.loss, tr.0);
    // direct loss from (θ̂ − â)²
    let d = sub(&diag_in_basis(&pr.mu(), &bs), &mat(a.matrix()));
    let direct = trace(&matmul(&mat(rho.matrix()), &matmul(&d, &d)));
    assert!((rep.loss - direct.0).abs() <= 1e-10);
}

#[test]
fn closed_form_matches_grid_search() {
    let (rho, a, basis) = random_instance(3, Purity::Mixed, 9).unwrap();
    let closed = bayes_estimator(&rho, &a, &basis).unwrap();
    let grid = bruteforce_bayes(&rho, &a, &basis, GridSpec::default()).unwrap();
    for (x, y) in closed.values().iter().zip(grid.values()) {
        assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
    }
    let (rho, a, basis) = random_instance(4, Purity::Pure, 21).unwrap();
    let closed = bayes_estimator(&rho, &a, &basis).unwrap();
    let grid = bruteforce_bayes(&rho, &a, &basis, GridSpec::default()).unwrap();
    for (x, y) in closed.values().iter().zip(grid.values()) {
        assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
}

#[test]
fn qubit_closed_form() {
    // |ψ⟩ = cos t|0⟩ + sin t|1⟩, â = σ_x, standard basis:
    // μ(0) = tan t, μ(1) = cot t, σ = 0, loss = 0.
    let t: f64 = 0.3;
    let psi = PureState::new(vec![c(t.cos(), 0.0), c(t.sin(), 0.0)]).unwrap();
    let rho = weakval::density_from_pure(&psi);
    let basis = PostselectionBasis::standard(2);
    let pr = profile(&rho, &Observable::pauli_x(), &basis).unwrap();
    let mu = pr.mu();
    assert!((mu[0] - t.tan()).abs() < 1e-14);
    assert!((mu[1] - 1.0 / t.tan()).abs() < 1e-14);
    assert!(pr.sigma().iter().all(|s| s.abs() < 1e-15));
    let rep = verify_bounds(&rho, &Observable::pauli_x(), &basis, EstimatorChoice::Bayes).unwrap();
    assert!(rep.loss.abs() < 1e-14 && rep.all_ok());
}
