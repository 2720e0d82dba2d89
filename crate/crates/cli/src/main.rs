//! `svcal`: ingest price data, simulate datasets and estimate the
//! stochastic volatility model from a TOML run configuration.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Overrides;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "svcal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Independent chains run in parallel with seeds seed, seed+1, ….
    #[arg(long, global = true, default_value_t = 1)]
    chains: usize,

    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the design matrix, returns and descriptive statistics.
    Ingest,
    /// Run the sampler and write draws, summaries and volatility paths.
    Estimate,
    /// Write a simulated dataset.
    Simulate,
}

fn run(cli: &Cli) -> Result<(), error::CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| error::CliError::Config("--config <path> is required".into()))?;
    let config = RunConfig::load(path)?;
    let overrides = Overrides {
        seed: cli.seed,
        chains: cli.chains,
        out: cli.out.clone(),
    };
    if cli.chains == 0 {
        return Err(error::CliError::Config("--chains must be at least 1".into()));
    }
    match cli.command {
        Command::Ingest => commands::ingest(&config, &overrides).map(drop),
        Command::Estimate => commands::estimate(&config, &overrides).map(drop),
        Command::Simulate => commands::simulate(&config, &overrides).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("svcal: {e}");
            e.exit_code()
        }
    }
}
