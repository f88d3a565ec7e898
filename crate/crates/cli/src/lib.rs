//! Command-line front end for `transs-core`.
//!
//! Every sub-command writes its outputs into `--out` (default `.`) and a
//! short summary to standard output. Exit codes: 0 when the command
//! performs no check or every requested verdict holds, 1 when a verdict
//! or certification fails, 2 on usage, input or numerical errors.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] transs_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trajectory left the chart domain at t = {0}; partial output written")]
    LeftDomain(f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot serialize output: {0}")]
    Output(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "transs", version, about = "Numerical laboratory for trans-S-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify a model and write its structure report.
    Validate(ValidateArgs),
    /// Integrate a Lorentz trajectory and write samples and diagnostics.
    Integrate(IntegrateArgs),
    /// Extract the Frenet apparatus of a trajectory CSV.
    Frenet(FrenetArgs),
    /// Integrate a Legendre trajectory and run theorem checks on it.
    Check(CheckArgs),
    /// Summarize Legendre trajectories over a list of strengths.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for random sample points and initial directions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    q: f64,
    #[arg(long = "t-end", default_value_t = transs_core::trajectory::DEFAULT_T_END)]
    t_end: f64,
    #[arg(long, default_value_t = transs_core::trajectory::DEFAULT_STEP)]
    h: f64,
    /// Initial point, comma separated (default: origin).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    /// Initial direction, comma separated; rescaled to unit speed
    /// (default: seeded random direction).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    v0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Catalog name (standard:N:S, cspace:N:S, kenmotsu:N:SIGMA) or model file.
    model: String,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    model: String,
    #[command(flatten)]
    run: RunArgs,
    /// Project the initial direction onto the Legendre distribution.
    #[arg(long)]
    legendre: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct FrenetArgs {
    /// Trajectory CSV with columns t, x1..xd, v1..vd.
    trajectory: PathBuf,
    /// Model the trajectory lives on.
    #[arg(long)]
    model: String,
    /// Strength for the Lorentz residual and the default rank tolerance.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long = "rank-tol")]
    rank_tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    Classification,
    #[value(name = "cparallel-t")]
    CParallelT,
    #[value(name = "cparallel-n")]
    CParallelN,
    #[value(name = "cproper-t")]
    CProperT,
    #[value(name = "cproper-n")]
    CProperN,
    All,
}

#[derive(Debug, Args)]
struct CheckArgs {
    model: String,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value = "all")]
    theorem: TheoremArg,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long = "rank-tol")]
    rank_tol: Option<f64>,
    /// Include per-sample series in the report.
    #[arg(long)]
    series: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    model: String,
    #[arg(long = "q-list", required = true, allow_hyphen_values = true, value_delimiter = ',')]
    q_list: Vec<f64>,
    #[arg(long = "t-end", default_value_t = 5.0)]
    t_end: f64,
    #[arg(long, default_value_t = transs_core::trajectory::DEFAULT_STEP)]
    h: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_command<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            output::print(if code == EXIT_OK { stdout } else { stderr }, &text);
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a, stdout, stderr),
        Command::Integrate(a) => commands::integrate(&a, stdout),
        Command::Frenet(a) => commands::frenet(&a, stdout),
        Command::Check(a) => commands::check(&a, stdout),
        Command::Sweep(a) => commands::sweep(&a, stdout),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            output::print(stderr, &format!("error: {e}\n"));
            EXIT_ERROR
        }
    }
}
