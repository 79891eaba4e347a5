use weakval::linalg::inner;
use weakval::qstate::Sampler;
use weakval::weakmeas::{extract_weak_value, halving_sequence, simulate, PointerGrid};
use weakval::{weak_value_pure, Complex64, Observable, PureState};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> PointerGrid {
    PointerGrid::for_pointer(1024, 1.0).unwrap()
}

fn plus() -> PureState {
    PureState::new(vec![c(H, 0.0), c(H, 0.0)]).unwrap()
}

fn ket0() -> Vec<Complex64> {
    vec![c(1.0, 0.0), c(0.0, 0.0)]
}

struct Case {
    psi: PureState,
    a: Observable,
    b: Vec<Complex64>,
    aw: Complex64,
}

/// Random qubit/qutrit instances with overlap ≥ 0.05 and |a_w| ≤ 10.
fn random_cases(count: usize) -> Vec<Case> {
    let mut s = Sampler::new(2024);
    let mut out = Vec::new();
    while out.len() < count {
        let dim = 2 + out.len() % 2;
        let psi = s.pure_state(dim);
        let a = s.observable(dim);
        let b = s.pure_state(dim).amplitudes().to_vec();
        if inner(&b, psi.amplitudes()).norm_sqr() < 0.05 {
            continue;
        }
        let aw = weak_value_pure(&psi, &a, &b).unwrap();
        if aw.norm() > 10.0 {
            continue;
        }
        out.push(Case { psi, a, b, aw });
    }
    out
}

#[test]
fn zero_coupling_reproduces_overlap() {
    let gr = grid();
    let b = vec![c(0.6, 0.0), c(0.0, 0.8)];
    let st = simulate(&plus(), &Observable::pauli_x(), &b, 0.0, 1.0, &gr).unwrap();
    let overlap = inner(&b, plus().amplitudes()).norm_sqr();
    assert!((st.p_post - overlap).abs() < 1e-12);
    assert!(st.mean_x.abs() < 1e-12 && st.mean_k.abs() < 1e-12);
}

#[test]
fn position_readout_is_second_order() {
    let gr = grid();
    for (i, case) in random_cases(20).iter().enumerate() {
        let g = 0.02 / case.aw.norm().max(1.0);
        let err = |g: f64| {
            let st = simulate(&case.psi, &case.a, &case.b, g, 1.0, &gr).unwrap();
            (st.mean_x / g - case.aw.re).abs()
        };
        let (e1, e2) = (err(g), err(g / 2.0));
        let ratio = e1 / e2;
        assert!(
            (3.0..=5.0).contains(&ratio),
            "case {i}: a_w = {}, errors {e1:.3e} -> {e2:.3e}, ratio {ratio}",
            case.aw
        );
    }
}

#[test]
fn postselection_probability_converges_linearly() {
    let gr = grid();
    for case in random_cases(10) {
        let p0 = inner(&case.b, case.psi.amplitudes()).norm_sqr();
        for g in [0.04, 0.02, 0.01] {
            let st = simulate(&case.psi, &case.a, &case.b, g, 1.0, &gr).unwrap();
            assert!(
                (st.p_post - p0).abs() <= 10.0 * g,
                "g={g}: {} vs {p0}",
                st.p_post
            );
        }
    }
}

#[test]
fn joint_norm_is_conserved() {
    let gr = grid();
    for case in random_cases(10) {
        for g in halving_sequence(0.08, 4) {
            let st = simulate(&case.psi, &case.a, &case.b, g, 1.0, &gr).unwrap();
            assert!((st.joint_norm - 1.0).abs() < 1e-9);
            assert!(st.p_post <= 1.0 + 1e-9 && st.var_x >= -1e-9 && st.var_k >= -1e-9);
        }
    }
}

#[test]
fn extraction_matches_closed_form() {
    let gr = grid();
    let z = extract_weak_value(
        &plus(),
        &Observable::pauli_z(),
        &ket0(),
        1.0,
        &[0.04, 0.02, 0.01],
        &gr,
        1e-4,
    )
    .unwrap();
    assert!((z.value - c(1.0, 0.0)).norm() < 1e-4, "{}", z.value);
    let y = extract_weak_value(
        &plus(),
        &Observable::pauli_y(),
        &ket0(),
        1.0,
        &[0.04, 0.02, 0.01],
        &gr,
        1e-4,
    )
    .unwrap();
    assert!((y.value - c(0.0, -1.0)).norm() < 1e-4, "{}", y.value);
    assert_eq!(y.sweep.len(), 3);
}

#[test]
fn extraction_of_eigenstate_is_exact() {
    let gr = grid();
    let a = Observable::from_diag(&[0.3, -1.7]);
    let psi = PureState::basis(2, 1);
    let b = vec![c(H, 0.0), c(0.0, H)];
    let est = extract_weak_value(&psi, &a, &b, 1.0, &[0.1, 0.05, 0.025], &gr, 1e-6).unwrap();
    assert!((est.value - c(-1.7, 0.0)).norm() < 1e-6, "{}", est.value);
}

#[test]
fn extraction_agrees_with_weak_value_on_random_instances() {
    let gr = grid();
    for (i, case) in random_cases(20).iter().enumerate() {
        let g0 = 0.04 / case.aw.norm().max(1.0);
        let est = extract_weak_value(
            &case.psi,
            &case.a,
            &case.b,
            1.0,
            &halving_sequence(g0, 3),
            &gr,
            1e-4,
        )
        .unwrap();
        assert!(
            (est.value - case.aw).norm() < 1e-4,
            "case {i}: {} vs {}",
            est.value,
            case.aw
        );
    }
}
