//! `weakval`: weak values, Bayes estimators and their bounds from the command line.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 input or usage error,
//! 3 degenerate ensemble or zero postselection, 4 non-convergence,
//! 5 resolution guard.

mod commands;
mod failure;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use weakval::Purity;

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "weakval", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weak-value profile, Bayes estimator and loss report for a problem file.
    Compute {
        #[arg(long)]
        input: PathBuf,
        /// Report path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Randomised check of the loss identities and bounds.
    Verify {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PurityArg::Mixed)]
        purity: PurityArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulated Gaussian-pointer measurement with extrapolation to g = 0.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// Label of the postselected basis vector.
        #[arg(long)]
        postselect: String,
        /// Coupling strengths, strictly decreasing (repeatable).
        #[arg(long = "g", num_args = 1.., default_values_t = [0.04, 0.02, 0.01])]
        g: Vec<f64>,
        /// Pointer position spread.
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1024)]
        grid_n: usize,
        /// Convergence and agreement tolerance.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// JSON summary path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Optional sweep CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Momentum estimated from position for a grid wavefunction.
    Eurdemo {
        #[arg(long, value_enum, default_value_t = Shape::Gaussian)]
        shape: Shape,
        /// Gaussian spread `s`.
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Carrier wavenumber; for `plane` it must be a grid mode.
        #[arg(long, default_value_t = 0.0)]
        k0: f64,
        /// Plane-wave mode index (overrides --k0).
        #[arg(long, allow_hyphen_values = true)]
        mode: Option<i64>,
        /// Distance between the two packets of `double-gaussian`.
        #[arg(long, default_value_t = 6.0)]
        separation: f64,
        #[arg(long, default_value_t = 512)]
        grid_n: usize,
        #[arg(long, default_value_t = 40.0)]
        length: f64,
        /// JSON report path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Optional CSV of `q, p(q), mu(q), sigma(q)`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PurityArg {
    Pure,
    Mixed,
}

impl From<PurityArg> for Purity {
    fn from(p: PurityArg) -> Self {
        match p {
            PurityArg::Pure => Purity::Pure,
            PurityArg::Mixed => Purity::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Gaussian,
    Plane,
    DoubleGaussian,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute { input, output } => commands::compute(&input, output.as_deref()),
        Command::Verify {
            dim,
            trials,
            seed,
            purity,
            tol,
            output,
        } => commands::verify(
            &weakval::sweep::SweepConfig {
                dim,
                trials,
                seed,
                purity: purity.into(),
                tol,
            },
            output.as_deref(),
        ),
        Command::Simulate {
            input,
            postselect,
            g,
            width,
            grid_n,
            tol,
            output,
            csv,
        } => commands::simulate(&commands::SimulateArgs {
            input: &input,
            postselect: &postselect,
            g: &g,
            width,
            grid_n,
            tol,
            output: output.as_deref(),
            csv: csv.as_deref(),
        }),
        Command::Eurdemo {
            shape,
            width,
            k0,
            mode,
            separation,
            grid_n,
            length,
            output,
            csv,
        } => commands::eurdemo(&commands::EurdemoArgs {
            shape,
            width,
            k0,
            mode,
            separation,
            n: grid_n,
            length,
            output: output.as_deref(),
            csv: csv.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                // --help and --version
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return Failure::usage(e.to_string().trim_end()).report();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
