use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mec_cli::{extremes, kappa_command, solve, verify, CliError, Overrides, ProblemFile};

#[derive(Parser)]
#[command(
    name = "mec",
    version,
    about = "Exact minimum-entropy couplings by extreme-point enumeration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate extreme points and report every entropy minimizer.
    Solve(ProblemArgs),
    /// List every extreme point with its entropy.
    Extremes(ProblemArgs),
    /// Check a coupling (or every minimizer of a solve result).
    Verify(VerifyArgs),
    /// Structure constant of a two-marginal problem, with a witness.
    Kappa(ProblemArgs),
}

#[derive(Args)]
struct ProblemArgs {
    file: PathBuf,
    /// shannon, renyi or tsallis
    #[arg(long)]
    entropy: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Logarithm base for Shannon and Rényi (default 2)
    #[arg(long)]
    base: Option<f64>,
    /// Values within this distance of the minimum count as minimizers (default 1e-9)
    #[arg(long)]
    tie_tol: Option<f64>,
    #[arg(long)]
    no_prefilter: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Maximum number of candidate subsets to scan
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the solve result
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &ProblemArgs) -> Result<mec_cli::Problem, CliError> {
    let overrides = Overrides {
        entropy: args.entropy.clone(),
        alpha: args.alpha,
        base: args.base,
        tie_tol: args.tie_tol,
        no_prefilter: args.no_prefilter,
        threads: args.threads,
        budget: args.budget,
    };
    ProblemFile::from_json(&read(&args.file)?)?.resolve(&overrides)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve(args) => {
            emit(&solve(&load(&args)?, args.timings)?, args.out.as_deref()).map(|_| true)
        }
        Command::Extremes(args) => {
            emit(&extremes(&load(&args)?)?, args.out.as_deref()).map(|_| true)
        }
        Command::Kappa(args) => {
            emit(&kappa_command(&load(&args)?)?, args.out.as_deref()).map(|_| true)
        }
        Command::Verify(args) => {
            let report = verify(&read(&args.file)?)?;
            emit(&report, args.out.as_deref())?;
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
