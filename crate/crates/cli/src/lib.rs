//! The `kcurve` command line.
//!
//! Exit codes: 0 on success or pass, 1 when a checker fails (a JSON witness is
//! written to stdout), 2 on usage, domain and input errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod config;
pub mod format;
pub mod inputs;
pub mod sweep;

pub use config::SweepConfig;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "KCURVE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input { path: String, source: kcurve_core::Error },
    #[error(transparent)]
    Core(#[from] kcurve_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl CliError {
    pub(crate) fn input(path: &Path, source: kcurve_core::Error) -> Self {
        match source {
            kcurve_core::Error::Io { path, message } => CliError::Io { path, message },
            source => CliError::Input {
                path: path.display().to_string(),
                source,
            },
        }
    }
}

/// Result of a successful invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kcurve", version, about = "Variable-curvature distortion coefficients and curvature-dimension checks")]
pub struct Cli {
    /// Emit JSON instead of plain text or CSV.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized sine and cosine of a curvature field.
    Sin(SinArgs),
    /// Distortion coefficient σ_κ^(t)(θ).
    Sigma(SigmaArgs),
    /// Certify (κ, N)-convexity of a tabulated function.
    Certify(CertifyArgs),
    /// Simulate a gradient flow and report EVI, dissipation or contraction terms.
    Flow(FlowArgs),
    /// Entropic curvature-dimension check along a Wasserstein geodesic.
    Cde(CdeArgs),
    /// Bishop–Gromov volume and area ratios.
    Bg(BgArgs),
    /// Run a checker over a parameter grid described by a config file.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SinArgs {
    #[arg(long)]
    pub kappa: String,
    /// Length of the solution interval, starting at the field start.
    #[arg(long = "L")]
    pub length: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[arg(long)]
    pub kappa: String,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long = "S")]
    pub s: String,
    #[arg(long)]
    pub kappa: String,
    /// Dimension, a number ≥ 1 or `inf`.
    #[arg(long = "N")]
    pub n: String,
    #[arg(long, default_value = "iii")]
    pub criterion: String,
    /// Endpoints per side of the segment sample.
    #[arg(long, default_value_t = 17)]
    pub points: usize,
    #[arg(long = "t-points", default_value_t = 9)]
    pub t_points: usize,
    #[arg(long, default_value_t = kcurve_core::convexity::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Evi,
    Dissipation,
    Contraction,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub kappa: String,
    #[arg(long = "N")]
    pub n: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_enum)]
    pub report: Report,
    /// Comparison point of the EVI.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z: f64,
    /// Start of the second flow for the contraction report (default −x0).
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Time rescaling of the dimensional contraction bound.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Fail (exit 1) when a margin falls below −tol.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CdeArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub kappa: String,
    #[arg(long = "N")]
    pub n: String,
    #[arg(long)]
    pub mu0: String,
    #[arg(long)]
    pub mu1: String,
    #[arg(long = "t-points", default_value_t = 11)]
    pub t_points: usize,
    #[arg(long, default_value_t = kcurve_core::wasserstein::CD_TOL)]
    pub tol: f64,
    /// Check the pointwise density inequality instead of the entropic one.
    #[arg(long)]
    pub density: bool,
}

#[derive(Debug, Args)]
pub struct BgArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long = "R")]
    pub big_r: f64,
    #[arg(long = "kappa-lower", allow_hyphen_values = true)]
    pub kappa_lower: f64,
    #[arg(long = "N")]
    pub n: f64,
    #[arg(long, default_value_t = kcurve_core::wasserstein::CD_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Config file in `key = value` format.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process-wide context of one invocation.
pub struct Context {
    pub json: bool,
    pub base: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Standard output and error are written to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return 2;
        }
    };
    let ctx = Context {
        json: cli.json,
        base: PathBuf::from("."),
    };
    let mut buffer = String::new();
    let result = pool.install(|| commands::dispatch(&ctx, &cli.command, &mut buffer));
    let _ = out.write_all(buffer.as_bytes());
    match result {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// `KCURVE_THREADS`, or 0 (rayon's default) when unset or empty.
fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a non-negative integer, found `{v}`"))),
    }
}
