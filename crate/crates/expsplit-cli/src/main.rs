//! Command line front end for the splitting analysis library.
//!
//! Exit codes: 0 for a completed run, including negative verdicts such
//! as refutations and infeasible fits; 2 for configuration errors; 3
//! for numerical failures, including a skew construction that a
//! subcommand required but the system lacks.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use expsplit::NormKind;

mod report;
mod run;

use run::{OutputFormat, RunError, RunOptions, RunOutput};

#[derive(Parser)]
#[command(
    name = "expsplit",
    version,
    about = "Exponential splitting analysis for nonautonomous linear difference systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Largest time index scanned; defaults to the target's own window.
    #[arg(long, global = true)]
    window: Option<i64>,

    /// Norm for all gains: sup, one, or two. Defaults to the target's.
    #[arg(long, global = true)]
    norm: Option<String>,

    /// Cap on the fitted envelope constant, in linear scale.
    #[arg(long, global = true)]
    ncap: Option<f64>,

    /// Relative tolerance for residual and inequality checks.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Stream selector for randomized targets and couplings.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format: json, or csv for the analyze and identities tables.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in system catalog.
    List,
    /// Show one catalog entry and the certificates it ships with.
    Show { name: String },
    /// Run the full pipeline: validation, invariance, gains, verdicts.
    Analyze { target: String },
    /// Check a certificate file against the measured gain table.
    Verify { target: String, certificate: PathBuf },
    /// Fit the smallest certificate for one concept, if any exists.
    Fit { target: String, concept: String },
    /// Search the gain table for a pair witnessing certificate failure.
    Refute { target: String, certificate: PathBuf },
    /// Measure the cocycle, shared-range, and skew identity residuals.
    Identities { target: String },
}

fn main() {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    let code = match execute(cli) {
        Ok(output) => {
            if let Some(note) = &output.note {
                eprintln!("{note}");
            }
            match write_report(&output, out_path.as_deref()) {
                Ok(()) => output.exit_code,
                Err(err) => {
                    eprintln!("error: {err}");
                    err.exit_code()
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}

fn execute(cli: Cli) -> Result<RunOutput, RunError> {
    let opts = resolve_options(&cli)?;
    match &cli.command {
        Command::List => run::run_list(&opts),
        Command::Show { name } => run::run_show(name, &opts),
        Command::Analyze { target } => run::run_analyze(target, &opts),
        Command::Verify { target, certificate } => run::run_verify(target, certificate, &opts),
        Command::Fit { target, concept } => run::run_fit(target, concept, &opts),
        Command::Refute { target, certificate } => run::run_refute(target, certificate, &opts),
        Command::Identities { target } => run::run_identities(target, &opts),
    }
}

fn resolve_options(cli: &Cli) -> Result<RunOptions, RunError> {
    if let Some(w) = cli.window {
        if w < 0 {
            return Err(RunError::Config(format!("--window must be nonnegative, got {w}")));
        }
    }
    let norm = match &cli.norm {
        Some(s) => Some(NormKind::from_str(s).map_err(RunError::Config)?),
        None => None,
    };
    let ncap = cli.ncap.unwrap_or(expsplit::DEFAULT_N_CAP);
    if !ncap.is_finite() || ncap < 1.0 {
        return Err(RunError::Config(format!("--ncap must be a finite value >= 1, got {ncap}")));
    }
    let tol = cli.tol.unwrap_or(expsplit::DEFAULT_LOG_TOL);
    if !tol.is_finite() || tol <= 0.0 || tol >= 1.0 {
        return Err(RunError::Config(format!("--tol must lie strictly between 0 and 1, got {tol}")));
    }
    let format = match cli.format.as_deref() {
        None | Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        Some(other) => {
            return Err(RunError::Config(format!(
                "unknown format {other:?}; expected json or csv"
            )))
        }
    };
    Ok(RunOptions { window: cli.window, norm, ncap, tol, seed: cli.seed.unwrap_or(0), format })
}

fn write_report(output: &RunOutput, out: Option<&std::path::Path>) -> Result<(), RunError> {
    match out {
        Some(path) => fs::write(path, &output.text).map_err(|e| {
            RunError::Config(format!("writing report to {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| RunError::Config(format!("writing report to stdout: {e}")))
        }
    }
}
