use weakval::eurdemo::{
    demo_report, exact_uncertainty_check, momentum_moments, position_profile, resolution_guard,
    GridWavefunction,
};
use weakval::{Complex64, Error};

/// Eighth-order central difference of `f` at `q`.
fn derivative(f: impl Fn(f64) -> Complex64, q: f64, h: f64) -> Complex64 {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    W.iter()
        .enumerate()
        .map(|(i, w)| {
            let k = (i + 1) as f64;
            (f(q + k * h) - f(q - k * h)) * *w
        })
        .sum::<Complex64>()
        / h
}

#[test]
fn gaussian_ground_state_value() {
    let psi = GridWavefunction::gaussian(512, 40.0, 1.0, 0.0).unwrap();
    let rep = exact_uncertainty_check(&psi).unwrap();
    assert!((rep.loss - 0.25).abs() <= 1e-6, "{}", rep.loss);
    assert!((rep.loss - rep.sigma2).abs() <= 1e-8);
    assert!(rep.all_ok());
    let (_, var) = momentum_moments(&psi);
    assert!((var - 0.25).abs() <= 1e-6);
}

#[test]
fn width_scaling() {
    for s in [0.75, 1.0, 2.0] {
        let psi = GridWavefunction::gaussian(512, 40.0, s, 0.7).unwrap();
        let r = demo_report(&psi).unwrap();
        let want = 1.0 / (4.0 * s * s);
        assert!((r.loss - want).abs() <= 1e-6, "s={s}: {}", r.loss);
        assert!((r.mean_p - 0.7).abs() <= 1e-9);
        assert!(r.passes());
    }
}

#[test]
fn chirped_gaussian_matches_finite_differences() {
    let (k0, beta) = (1.0, 0.2);
    let f = |q: f64| Complex64::from_polar((-q * q / 4.0).exp(), k0 * q + beta * q * q);
    let psi = GridWavefunction::from_fn(512, 40.0, f).unwrap();
    let pr = position_profile(&psi).unwrap();
    let alpha = pr.alpha();
    let mut checked = 0;
    for (j, e) in pr.entries.iter().enumerate() {
        if e.prob < 1e-8 {
            continue;
        }
        let q = psi.q(j);
        let want = Complex64::new(0.0, -1.0) * derivative(f, q, 1e-3) / f(q);
        assert!(
            (alpha[j] - want).norm() <= 1e-6,
            "q={q}: {} vs {want}",
            alpha[j]
        );
        // closed form: μ = k0 + 2βq, σ = q/2
        assert!((want.re - (k0 + 2.0 * beta * q)).abs() <= 1e-8);
        assert!((want.im - q / 2.0).abs() <= 1e-8);
        checked += 1;
    }
    assert!(checked > 50);
    let rep = exact_uncertainty_check(&psi).unwrap();
    assert!((rep.loss - 0.25).abs() <= 1e-6);
    assert!((rep.loss - rep.sigma2).abs() <= 1e-8);
}

#[test]
fn double_gaussian_equality() {
    let psi = GridWavefunction::double_gaussian(512, 40.0, 1.0, 6.0, 2.0).unwrap();
    let rep = exact_uncertainty_check(&psi).unwrap();
    assert!((rep.loss - rep.sigma2).abs() <= 1e-8);
    assert!(rep.schwarz_slack.abs() <= 1e-8);
    // the loss is below the momentum variance: position carries information
    let (_, var) = momentum_moments(&psi);
    assert!(rep.loss < var);
    assert!(rep.all_ok());
}

#[test]
fn grid_refinement_converges() {
    let coarse = GridWavefunction::double_gaussian(256, 20.0, 1.0, 4.0, 1.5).unwrap();
    let fine = GridWavefunction::double_gaussian(512, 20.0, 1.0, 4.0, 1.5).unwrap();
    let a = exact_uncertainty_check(&coarse).unwrap();
    let b = exact_uncertainty_check(&fine).unwrap();
    assert!(
        (a.sigma2 - b.sigma2).abs() <= 1e-8,
        "{} vs {}",
        a.sigma2,
        b.sigma2
    );
}

#[test]
fn bayes_estimate_is_unbiased() {
    let psi = GridWavefunction::double_gaussian(512, 40.0, 1.2, 5.0, -1.3).unwrap();
    let pr = position_profile(&psi).unwrap();
    let (mean, _) = momentum_moments(&psi);
    assert!((pr.weighted_sum(&pr.mu()) - mean).abs() <= 1e-9);
}

#[test]
fn plane_wave_is_estimated_exactly() {
    let psi = GridWavefunction::plane_wave(256, 10.0, 3).unwrap();
    let rep = exact_uncertainty_check(&psi).unwrap();
    assert!(rep.loss.abs() <= 1e-9, "{}", rep.loss);
    assert!(rep.sigma2.abs() <= 1e-9);
    let k = std::f64::consts::TAU * 3.0 / 10.0;
    assert!((rep.mean_mu - k).abs() <= 1e-9);
}

#[test]
fn under_resolved_widths_are_rejected() {
    assert!(matches!(
        resolution_guard(0.5, 64, 40.0),
        Err(Error::ResolutionGuard(_))
    ));
    assert!(GridWavefunction::gaussian(64, 40.0, 0.5, 0.0).is_err());
    assert!(resolution_guard(1.0, 512, 40.0).is_ok());
}
