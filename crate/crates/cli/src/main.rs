#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analyze;
mod config;
mod error;
mod files;
mod manifest;
mod report;
mod results;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use analyze::{Analysis, Overrides};
use error::CliError;

/// Simulation and analysis of two-source HOM interference experiments.
#[derive(Parser)]
#[command(name = "homlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a run and write one tag file per detector plus a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `duration_s`.
        #[arg(long)]
        duration: Option<f64>,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one estimator on a simulated run.
    Analyze {
        #[arg(value_enum)]
        analysis: Analysis,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        window_ns: Option<f64>,
        #[arg(long)]
        bin_ns: Option<f64>,
        #[arg(long)]
        range_ns: Option<f64>,
    },
    /// Collate all results into report.txt and plot data.
    Report {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("HOMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("HOMLAB_THREADS: expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out, duration, seed } => simulate::run(&config, &out, duration, seed),
        Command::Analyze { analysis, manifest, window_ns, bin_ns, range_ns } => {
            analyze::run(analysis, &manifest, Overrides { window_ns, bin_ns, range_ns })
        }
        Command::Report { manifest } => report::run(&manifest),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
