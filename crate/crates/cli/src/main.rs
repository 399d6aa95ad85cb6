//! `foldcrest` — normal-form coefficients, asymptotic Poincaré maps and
//! period-doubling prediction/verification for slow-fast systems with an
//! equilibrium near a fold of the slow manifold.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use output::Format;

/// Exit codes: 0 success, 1 usage/IO, 2 math precondition, 3 numerical
/// failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Math(String),
    Numerical(String),
    /// Output already emitted; carry only the exit code.
    Reported(u8),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Math(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Reported(code) => *code,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Math(m) | CliError::Numerical(m) => {
                Some(m)
            }
            CliError::Reported(_) => None,
        }
    }
}

impl From<foldcrest_core::Error> for CliError {
    fn from(e: foldcrest_core::Error) -> Self {
        use foldcrest_core::Error::*;
        match e {
            JetFile(_) => CliError::Io(e.to_string()),
            NonFiniteEvaluation { .. }
            | StabilityViolation { .. }
            | DegenerateFold { .. }
            | DegenerateCoefficients { .. }
            | NegativeDiscriminant { .. }
            | ConditionsFailed { .. }
            | OutOfRange { .. } => CliError::Math(e.to_string()),
            NoConvergence { .. }
            | StepUnderflow { .. }
            | MaxTimeExceeded { .. }
            | NoReturn { .. }
            | TangentialCrossing { .. }
            | ComplexPair { .. }
            | NoOrbit { .. }
            | BracketInvalid { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "foldcrest",
    version,
    about = "Normal-form coefficients and period-doubling prediction for slow-fast systems near a fold"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in system name (currently: fhn).
    #[arg(long, default_value = "fhn")]
    system: String,
    /// Path to a flat JSON jet file instead of a built-in system.
    #[arg(long)]
    jet: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format for stdout (and --out).
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Also write the output to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(format!("unknown format '{other}' (expected json or csv)")),
    }
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bracket endpoint '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bracket endpoint '{hi}'"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err("bracket must satisfy lo < hi".into())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Pipeline coefficients, staged intermediates and the condition report.
    Coeffs {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form first period-doubling prediction at a given eps.
    Predict {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        eps: f64,
        /// Override a coefficient, e.g. --set alpha2=-0.5 (repeatable).
        #[arg(long = "set")]
        sets: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Locate the first period doubling numerically and compare.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        eps: f64,
        /// Bisection bracket lo:hi on the parameter a (default: auto).
        #[arg(long, value_parser = parse_bracket)]
        bracket: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1e-8)]
        param_tol: f64,
        /// Integrator relative tolerance (default 1e-11 for verification).
        #[arg(long)]
        rel_tol: Option<f64>,
        /// Override the eps >= 1e-4 numerical feasibility gate.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the reference eps -> a_asym comparison table.
    Table1 {
        /// Also locate a_num numerically for eps >= 1e-2.
        #[arg(long)]
        numeric: bool,
        /// Extra epsilon rows, comma-separated.
        #[arg(long = "eps-list", value_delimiter = ',')]
        eps_list: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep an epsilon grid: asymptotic predictions plus optional numerics.
    Sweep {
        /// Epsilon grid, comma-separated.
        #[arg(long = "eps-list", value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        /// Run the numerical locator for eps at or above this value.
        #[arg(long, default_value_t = f64::INFINITY)]
        numeric_upto: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the normal form across one return and compare the measured
    /// half-map increments with the asymptotic expansion.
    #[command(name = "simulate-nf")]
    SimulateNf {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        zeta0: f64,
        #[arg(long, default_value_t = 1e-3)]
        j0: f64,
        /// Override a coefficient, e.g. --set alpha2=-0.5 (repeatable).
        #[arg(long = "set")]
        sets: Vec<String>,
        /// Write the dense trajectory CSV here.
        #[arg(long)]
        traj_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn configure_threads() {
    if let Ok(value) = std::env::var("FOLDCREST_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Coeffs { source, output } => {
            let src = commands::resolve_source(&source.system, source.jet.as_ref())?;
            let passes = src.report.passes();
            let out = commands::cmd_coeffs(&src)?;
            out.emit(output.format.unwrap_or(Format::Json), output.out.as_deref())?;
            if passes {
                Ok(())
            } else {
                // Report printed; condition failure is a math precondition.
                Err(CliError::Reported(2))
            }
        }
        Command::Predict { source, eps, sets, output } => {
            let src = commands::resolve_source(&source.system, source.jet.as_ref())?;
            let out = commands::cmd_predict(&src, eps, &sets)?;
            out.emit(output.format.unwrap_or(Format::Json), output.out.as_deref())
        }
        Command::Verify { source, eps, bracket, param_tol, rel_tol, force, output } => {
            let src = commands::resolve_source(&source.system, source.jet.as_ref())?;
            let out = commands::cmd_verify(&src, eps, bracket, param_tol, rel_tol, force)?;
            out.emit(output.format.unwrap_or(Format::Json), output.out.as_deref())
        }
        Command::Table1 { numeric, eps_list, output } => {
            let out = commands::cmd_table1(numeric, &eps_list)?;
            out.emit(output.format.unwrap_or(Format::Csv), output.out.as_deref())
        }
        Command::Sweep { eps_list, numeric_upto, output } => {
            let out = commands::cmd_sweep(&eps_list, numeric_upto)?;
            out.emit(output.format.unwrap_or(Format::Csv), output.out.as_deref())
        }
        Command::SimulateNf { source, mu, sigma, zeta0, j0, sets, traj_out, output } => {
            let src = commands::resolve_source(&source.system, source.jet.as_ref())?;
            let out =
                commands::cmd_simulate_nf(&src, mu, sigma, zeta0, j0, &sets, traj_out.as_ref())?;
            out.emit(output.format.unwrap_or(Format::Json), output.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(msg) = e.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.code())
        }
    }
}
