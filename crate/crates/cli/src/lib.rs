//! Experiment runner for the margin-rates library: each subcommand samples
//! from a synthetic law, fits classifiers, evaluates excess risk against the
//! known regression function and writes CSV plus a summary JSON.

pub mod config;
mod experiments;
pub mod output;

use std::path::PathBuf;

use serde_json::Value;

pub use config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl From<margin_rates::Error> for CliError {
    fn from(e: margin_rates::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub svg: Option<String>,
    /// Record per-row wall time; otherwise the column is 0 so reruns are
    /// byte-identical.
    pub wall_time: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            3
        }
    }
}

/// Runs one experiment and writes its artifacts under `opts.out`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| experiments::dispatch(cfg, opts))
}
