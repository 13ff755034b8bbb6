//! Experiment driver: wires ingest, preprocessing, attack, correction,
//! encoding, training, and evaluation into one reproducible run.

pub mod config;
pub mod run;

use thiserror::Error;

pub use config::{derive_seed, ExperimentConfig};
pub use run::{
    compare_models, emit_curves, run_experiment, ComparisonRow, ComparisonTable, RunReport,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    ConfigInvalid(String),
    #[error("configs passed to compare differ outside the model section")]
    IncompatibleConfigs,
    #[error("run has no training curve to emit")]
    MissingCurve,
    #[error("corpus stage: {0}")]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error("attack stage: {0}")]
    Attack(#[from] crate::adversary::AttackError),
    #[error("correction stage: {0}")]
    Correct(#[from] crate::corrector::CorrectError),
    #[error("model stage: {0}")]
    Neural(#[from] crate::neural::NeuralError),
    #[error("metrics stage: {0}")]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("checkpoint stage: {0}")]
    Checkpoint(#[from] crate::neural::checkpoint::CheckpointError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// CLI exit code: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigInvalid(_) | HarnessError::IncompatibleConfigs => 2,
            HarnessError::Corpus(_)
            | HarnessError::Attack(_)
            | HarnessError::Correct(_)
            | HarnessError::Checkpoint(_)
            | HarnessError::MissingCurve
            | HarnessError::Io(_) => 3,
            HarnessError::Neural(_) | HarnessError::Metrics(_) => 4,
        }
    }
}
