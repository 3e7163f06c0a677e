//! `ksd` command-line tool.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod experiments;
mod io;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ksd::Error),
}

impl CliError {
    /// 1 for bad input, 2 for numerical or resource failures.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_argument_error() => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ksd",
    version,
    about = "Kernel Stein discrepancies for sample quality measurement"
)]
struct Cli {
    /// Worker threads [default: all cores]. Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel Stein discrepancy of a sample (JSON report).
    Ksd(commands::KsdArgs),
    /// Stein Gram matrix k0(x_i, x_j) as CSV.
    Gram(commands::GramArgs),
    /// Wild-bootstrap goodness-of-fit test (JSON result).
    Test(commands::TestArgs),
    /// KSD-minimizing weights on the sample points (JSON result).
    Reweight(commands::ReweightArgs),
    /// Generate a sample as CSV.
    Generate(commands::GenerateArgs),
    /// Wasserstein distance between a 1-d sample and a target (JSON).
    Wass(commands::WassArgs),
    /// Run a bundled experiment and write CSV tables plus a manifest.
    #[command(subcommand)]
    Experiment(experiments::Experiment),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Ksd(a) => commands::ksd(a),
        Command::Gram(a) => commands::gram(a),
        Command::Test(a) => commands::test(a),
        Command::Reweight(a) => commands::reweight(a),
        Command::Generate(a) => commands::generate(a),
        Command::Wass(a) => commands::wass(a),
        Command::Experiment(e) => experiments::run(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
