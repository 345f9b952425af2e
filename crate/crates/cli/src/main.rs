//! `regimes`: a command-line driver for the regime detection pipeline.
//!
//! Each subcommand runs one pipeline stage against a run directory named by
//! a digest of the effective configuration; `run` chains every stage. All
//! outputs are deterministic in the configured seed, whatever `--threads`
//! says.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Workspace;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "regimes", version, about = "Market regime detection pipeline")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use the built-in reference configuration instead of a file.
    #[arg(long, global = true)]
    paper_defaults: bool,

    /// Override the configured seed (pipeline and synthetic generator).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the feature panel, impute gaps forward, and split train/test.
    Ingest,
    /// Standardize with training statistics and fit principal components.
    Pca,
    /// Pick the cluster count by silhouette and label the training days.
    Cluster,
    /// Cross-validate and fit the regime classifiers.
    Train,
    /// Simulate the strategies out of sample and run the correlation study.
    Backtest,
    /// Run every stage in order.
    Run,
    /// Generate a synthetic market with planted regimes.
    Synth,
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }

    let cfg = config::effective(
        cli.config.as_deref(),
        cli.paper_defaults,
        cli.seed,
        cli.out.as_deref(),
    )?;
    let ws = Workspace::prepare(cfg)?;

    let summary = match cli.command {
        Command::Ingest => commands::ingest(&ws)?,
        Command::Pca => commands::pca(&ws)?,
        Command::Cluster => commands::cluster(&ws)?,
        Command::Train => commands::train(&ws)?,
        Command::Backtest => commands::backtest(&ws)?,
        Command::Run => commands::run(&ws)?,
        Command::Synth => commands::synth(&ws)?,
    };
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            // Exit codes: 2 config, 3 data, 4 numerical.
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
