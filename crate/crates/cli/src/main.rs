//! `flarebench` command-line front end.
//!
//! Exit codes: 0 success, 2 config/validation, 3 IO, 4 analysis, 5 backend.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "flarebench",
    version,
    about = "Emergency-light flare simulation and detector confidence analysis"
)]
pub struct Cli {
    /// Seed for every random stage; overrides seeds inside config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "flarebench-out")]
    pub out: PathBuf,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a flasher video sequence with ground truth.
    Simulate {
        /// Simulation config (scene, pattern, camera, duration_s).
        #[arg(long)]
        config: PathBuf,
    },
    /// Split a folder of PPM images into day/night and add flares to night images.
    Augment {
        #[arg(long)]
        input: PathBuf,
        /// Augmentation config; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a detector over a sequence and measure the target's confidence signal.
    Analyze {
        /// Sequence directory, or a directory of sequence directories.
        #[arg(long)]
        video: PathBuf,
        /// Detector backend config, e.g. {"kind": "reference"}.
        #[arg(long)]
        backend: PathBuf,
        /// Initial target region as x0,y0,x1,y1.
        #[arg(long)]
        roi: Option<String>,
        #[arg(long, default_value = "car")]
        class: String,
    },
    /// Compare the metrics of two analysis reports.
    Compare { baseline: PathBuf, candidate: PathBuf },
    /// Measure pipeline latency per stage against the raw detector alone.
    Bench {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long)]
        video: PathBuf,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
    },
    /// Run the dual-path pipeline over a sequence and write its detections.
    PipelineRun {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long)]
        video: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flarebench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
