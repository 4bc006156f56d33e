//! Experiment harness and command-line front end for `bgi-core`.
//!
//! [`run_sweep`] runs every (grid point, algorithm, replication) of an
//! [`ExperimentConfig`] on a rayon pool; each replication owns its RNG
//! stream, so results do not depend on the pool size. [`write_outputs`]
//! persists records as CSV, a per-(grid point, algorithm) summary as JSON,
//! and every instance used.

// `!(x > 0.0)` is how argument checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::{paper_weights, Algorithm, ExperimentConfig, Grid, Preset, Sampler, PRESET_NAMES};
pub use runner::{judge, run_algorithm, Answer, RunOutcome, RunParams};
pub use sweep::{
    read_records, rejudge, run_sweep, stream_index, summarize, write_outputs, ExperimentRecord, SummaryRow, SweepOutput,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] bgi_core::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: std::io::Error },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            err,
        }
    }

    /// Short identifier for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.kind(),
            HarnessError::Config(_) => "invalid_config",
            HarnessError::Usage(_) => "usage",
            HarnessError::Io { .. } => "io",
            HarnessError::Csv(_) => "csv",
            HarnessError::Json(_) => "json",
        }
    }
}
