//! `nfpdf`: batch front end for the identity suites, the density solvers and
//! the Monte Carlo oracle. Every run writes its artifacts to
//! `<out>/<scenario>-<timestamp>-<seed>/`.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfpdf_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "nfpdf",
    version,
    about = "Response densities of linear and nonlinear RDEs driven by coloured Gaussian noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random trials of the extended correlation split and the averaged shift expectation.
    VerifyNf(RunArgs),
    /// Random trials of the operator lemmata.
    VerifyLemmata(RunArgs),
    /// Solve the exact linear density equation.
    SolveLinear(RunArgs),
    /// Solve the closed density equation of order `solver.order`.
    SolveGenfpk(RunArgs),
    /// Monte Carlo ensemble statistics and density estimates.
    Mc(RunArgs),
    /// L1 distance between the closed density solution and Monte Carlo.
    Compare(RunArgs),
    /// Finite-difference check of the response derivatives.
    VariationalCheck(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Seed; overrides `mc.seed` of the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory under which the run directory is created.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Number of random trials or probes.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest total degree of the random polynomials.
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Number of Monte Carlo paths; overrides `mc.n_paths`.
    #[arg(long)]
    pub n_paths: Option<usize>,
}

/// Process exit status by outcome class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Pass = 0,
    CheckFailed = 1,
    Usage = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Io = 6,
    Internal = 7,
}

fn classify(err: &anyhow::Error) -> Status {
    if err.downcast_ref::<std::io::Error>().is_some() {
        return Status::Io;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => Status::Parse,
        Some(
            Error::Validation(_) | Error::InvalidInput { .. } | Error::DegreeCapExceeded { .. },
        ) => Status::Validation,
        Some(
            Error::NonPositiveSemidefinite { .. }
            | Error::Instability { .. }
            | Error::DegenerateVariance { .. }
            | Error::Blowup { .. },
        ) => Status::Numerical,
        Some(Error::Io(_)) => Status::Io,
        _ => Status::Internal,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::Usage as u8
            } else {
                0
            });
        }
    };
    let result = match &cli.command {
        Command::VerifyNf(a) => commands::verify_nf(a),
        Command::VerifyLemmata(a) => commands::verify_lemmata(a),
        Command::SolveLinear(a) => commands::solve_linear(a),
        Command::SolveGenfpk(a) => commands::solve_genfpk(a),
        Command::Mc(a) => commands::mc(a),
        Command::Compare(a) => commands::compare(a),
        Command::VariationalCheck(a) => commands::variational_check(a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err) as u8)
        }
    }
}
