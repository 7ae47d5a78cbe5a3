//! `drr-anatomy`: project CT studies to radiographs, measure anatomy,
//! and score segmentations.

mod config;
mod error;
mod evaluate;
mod manifest;
mod measure;
mod output;
mod project;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "drr-anatomy", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Global {
    /// Seed for every randomized step (bootstrap resampling).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file with `projection`, `measure`, `metrics` and `bootstrap` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project study volumes and labels to PA/LL images and masks.
    Project(project::ProjectArgs),
    /// Measure CTR, SCD and Cobb angle from projected masks.
    Measure(measure::MeasureArgs),
    /// Score predicted masks against references.
    Evaluate(evaluate::EvaluateArgs),
    /// Significance tests and grade agreement over score tables.
    Stats {
        #[command(subcommand)]
        mode: stats::StatsMode,
    },
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.global.jobs {
        if j == 0 {
            return Err(error::validation("--jobs must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Project(a) => project::run(a, &cli.global),
        Command::Measure(a) => measure::run(a, &cli.global),
        Command::Evaluate(a) => evaluate::run(a, &cli.global),
        Command::Stats { mode } => stats::run(mode),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
