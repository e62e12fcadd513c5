//! Run configuration, the per-sentence pipeline, omission baselines and
//! seeded sweeps with JSONL records and CSV aggregates.

mod config;
mod pipeline;
mod stats;
mod sweep;

pub use config::{EmbedSource, Experiment, RunConfig};
pub use pipeline::{
    omit_characters, omit_words, Arm, Pipeline, PipelineParams, Status, TransmissionPoint, TrialResult,
};
pub use stats::{mean_stderr, paired_t_test, PairedTest};
pub use sweep::{
    aggregate, grid, run_sweep, sweep, trial_seed, write_aggregates, Aggregate, GridPoint, SweepSummary, TrialRecord,
    SCHEMA_VERSION,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunnerError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("setup: {0}")]
    Setup(String),
    #[error("io: {0}")]
    Io(String),
}
