use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use weakval::estimation::{bayes_estimator_with, verify_bounds_with};
use weakval::eurdemo::{demo_report, position_profile, GridWavefunction, TOL_GRID};
use weakval::sweep::{verify_sweep, SweepConfig};
use weakval::weakvalue::{profile_with, weak_value_pure_with};
use weakval::{exactness_certificate, extract_weak_value, EstimatorChoice, PointerGrid};

use crate::failure::Failure;
use crate::problem;
use crate::Shape;

/// Dense `p̂` assembly limit for the demo.
pub const MAX_DEMO_N: usize = 2048;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(path: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    text.push('\n');
    emit(path, &text)
}

fn load(path: &Path) -> Result<problem::Problem, Failure> {
    Ok(problem::parse(&read(path)?)?)
}

pub fn compute(input: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let p = load(input)?;
    let rho = p.density();
    let profile = profile_with(&rho, &p.observable, &p.basis, &p.tolerances)?;
    let bayes = bayes_estimator_with(&rho, &p.observable, &p.basis, &p.tolerances)?;
    let report = verify_bounds_with(
        &rho,
        &p.observable,
        &p.basis,
        EstimatorChoice::Bayes,
        &p.tolerances,
    )?;
    let out = json!({
        "profile": profile.to_json(),
        "estimator": {
            "labels": p.basis.labels(),
            "values": bayes.values(),
        },
        "exact": exactness_certificate(&profile, p.tolerances.id),
        "report": report.to_json(),
    });
    emit_json(output, &out)?;
    if !report.all_ok() {
        return Err(Failure::violation(json!({
            "error": "invariant_violation",
            "report": report.to_json(),
        })));
    }
    Ok(())
}

pub fn verify(cfg: &SweepConfig, output: Option<&Path>) -> Result<(), Failure> {
    let outcome = verify_sweep(cfg)?;
    emit(output, &outcome.to_csv())?;
    if let Some((row, report)) = outcome.first_failure {
        return Err(Failure::violation(json!({
            "error": "invariant_violation",
            "trial": row.trial,
            "seed": row.seed,
            "row": serde_json::to_value(&row).unwrap_or(Value::Null),
            "report": report.to_json(),
        })));
    }
    Ok(())
}

pub struct SimulateArgs<'a> {
    pub input: &'a Path,
    pub postselect: &'a str,
    pub g: &'a [f64],
    pub width: f64,
    pub grid_n: usize,
    pub tol: f64,
    pub output: Option<&'a Path>,
    pub csv: Option<&'a Path>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    if args.g.len() < 3 {
        return Err(Failure::usage(format!(
            "--g needs at least 3 coupling strengths, got {}",
            args.g.len()
        )));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Failure::usage("--tol must be positive"));
    }
    let p = load(args.input)?;
    let psi = p.pure_state()?;
    let k = p.basis.index_of(args.postselect)?;
    let b = p.basis.vector(k);
    let analytic = weak_value_pure_with(&psi, &p.observable, b, p.tolerances.ps)?;
    let grid = PointerGrid::for_pointer(args.grid_n, args.width)?;
    let est = extract_weak_value(&psi, &p.observable, b, args.width, args.g, &grid, args.tol)?;

    if let Some(path) = args.csv {
        let mut csv = String::from("g,p_post,mean_x,mean_k,mean_x_over_g,implied_re,implied_im\n");
        for r in &est.sweep {
            let _ = writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.g, r.p_post, r.mean_x, r.mean_k, r.mean_x_over_g, r.implied_re, r.implied_im
            );
        }
        emit(Some(path), &csv)?;
    }

    let deviation = (est.value - analytic).norm();
    let out = json!({
        "postselect": args.postselect,
        "width": args.width,
        "grid": grid,
        "weak_value": est.value,
        "analytic": analytic,
        "deviation": deviation,
        "re_error": est.re_error,
        "im_error": est.im_error,
        "momentum_variance": est.momentum_variance,
        "sweep": est.sweep,
        "tol": args.tol,
    });
    emit_json(args.output, &out)?;
    if deviation > args.tol {
        return Err(Failure::violation(json!({
            "error": "weak_value_mismatch",
            "deviation": deviation,
            "tol": args.tol,
        })));
    }
    Ok(())
}

pub struct EurdemoArgs<'a> {
    pub shape: Shape,
    pub width: f64,
    pub k0: f64,
    pub mode: Option<i64>,
    pub separation: f64,
    pub n: usize,
    pub length: f64,
    pub output: Option<&'a Path>,
    pub csv: Option<&'a Path>,
}

fn plane_mode(args: &EurdemoArgs) -> Result<i64, Failure> {
    if let Some(m) = args.mode {
        return Ok(m);
    }
    let m = args.k0 * args.length / std::f64::consts::TAU;
    if (m - m.round()).abs() > 1e-9 {
        return Err(Failure::usage(format!(
            "k0 = {} is not a grid wavenumber: k0·L/2π = {m} must be an integer",
            args.k0
        )));
    }
    Ok(m.round() as i64)
}

pub fn eurdemo(args: &EurdemoArgs) -> Result<(), Failure> {
    if args.n > MAX_DEMO_N {
        return Err(Failure::usage(format!(
            "--grid-n is capped at {MAX_DEMO_N}, got {}",
            args.n
        )));
    }
    let psi = match args.shape {
        Shape::Gaussian => GridWavefunction::gaussian(args.n, args.length, args.width, args.k0)?,
        Shape::Plane => GridWavefunction::plane_wave(args.n, args.length, plane_mode(args)?)?,
        Shape::DoubleGaussian => GridWavefunction::double_gaussian(
            args.n,
            args.length,
            args.width,
            args.separation,
            args.k0,
        )?,
    };
    let report = demo_report(&psi)?;

    if let Some(path) = args.csv {
        let profile = position_profile(&psi)?;
        let mut csv = String::from("q,p,mu,sigma\n");
        let fmt = |x: Option<f64>| x.map_or("na".to_string(), |v| format!("{v:e}"));
        for (j, e) in profile.entries.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{:e},{:e},{},{}",
                psi.q(j),
                e.prob,
                fmt(e.mu),
                fmt(e.sigma)
            );
        }
        emit(Some(path), &csv)?;
    }

    emit_json(
        args.output,
        &serde_json::to_value(&report).expect("report serialises"),
    )?;
    if !report.passes() {
        return Err(Failure::violation(json!({
            "error": "equality_gap",
            "equality_gap": report.equality_gap,
            "tol": TOL_GRID,
        })));
    }
    Ok(())
}
