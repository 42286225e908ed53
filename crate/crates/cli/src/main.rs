//! Command-line harness for pool-based active-learning experiments.
//!
//! Exit codes: 0 on success, 1 for configuration and validation errors,
//! 2 for runtime failures (i/o and the like).

mod bench;
mod config;
mod generate;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use alpool::Error;

use crate::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "alpool", version, about = "Pool-based active learning for multi-label classification")]
struct Cli {
    /// Experiment configuration file (TOML); built-in defaults when absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory; overrides the configured one.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Global seed; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (feature files + manifest) to the output directory.
    Generate,
    /// Execute the configured experiment; writes config.snapshot, runs.jsonl, curves.csv.
    Run,
    /// Summarize a completed run directory.
    Report {
        /// Run directory (defaults to the configured output directory).
        dir: Option<PathBuf>,
    },
    /// Time one selection pass per strategy and report the AG overhead.
    Bench,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // Every variant folds its source into Display, so one line tells all.
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn dispatch(cli: Cli) -> alpool::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    }
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    config.apply_overrides(cli.out, cli.seed);
    match cli.command {
        Command::Generate => generate::cmd_generate(&config),
        Command::Run => run::cmd_run(&config),
        Command::Report { dir } => {
            report::cmd_report(&dir.unwrap_or_else(|| config.output_dir.clone()))
        }
        Command::Bench => bench::cmd_bench(&config),
    }
}

/// 1 for anything the user can fix in the config or invocation, 2 for
/// failures of the environment.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Usage(_)
        | Error::UnsupportedMetric(_)
        | Error::BadTensorFile { .. }
        | Error::ManifestMissingFile { .. }
        | Error::ManifestShape { .. }
        | Error::ManifestDuplicateId { .. }
        | Error::ManifestLabel { .. }
        | Error::ManifestRow { .. } => 1,
        Error::Io { .. } => 2,
    }
}
