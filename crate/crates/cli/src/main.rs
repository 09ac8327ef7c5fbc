//! `quakelr`: synthetic data, event-wise splits, feature extraction, ensemble
//! selection, training, evaluation and ratio sweeps.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "quakelr", version, about = "White-box earthquake detection pipeline")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `master_seed` from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic waveform corpus (waveforms.jsonl, or pool.jsonl with --pool).
    Synth {
        /// Generate the noise-only sweep pool from `[pool]` instead.
        #[arg(long)]
        pool: bool,
    },
    /// Partition a waveform file by event (split.jsonl).
    Split {
        #[arg(long)]
        input: PathBuf,
    },
    /// Preprocess and extract features (features.csv).
    Extract(ExtractArgs),
    /// Run the ensemble selection workflow (selection.json, weights.csv).
    Select {
        #[arg(long)]
        features: PathBuf,
    },
    /// Train one elastic-net model on the training partition (model.json).
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Restrict inputs to a selection report's selected features.
        #[arg(long)]
        selection: Option<PathBuf>,
    },
    /// Score models or prediction files on one partition (eval.json).
    Eval(EvalArgs),
    /// Evaluate fixed predictors across noise ratios (sweep.json, sweep.csv, sweep.txt).
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Extract the features a selection report selected.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Output file name inside --out-dir.
    #[arg(long, default_value = "features.csv")]
    pub output: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[arg(long = "predictions")]
    pub predictions: Vec<PathBuf>,
    /// Partition to score; defaults to `[eval] partition`.
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Feature table whose test partition supplies positives and noise.
    #[arg(long)]
    pub features: PathBuf,
    /// Extra noise-only feature tables added to the pool.
    #[arg(long = "noise-pool")]
    pub noise_pool: Vec<PathBuf>,
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[arg(long = "predictions")]
    pub predictions: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
