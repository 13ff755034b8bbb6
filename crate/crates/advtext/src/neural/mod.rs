//! From-scratch neural core: embedding layer, LSTM/GRU/1D-CNN
//! classifiers, softmax cross-entropy with exact analytic gradients, and
//! an adaptive-moment optimizer. Double precision throughout training;
//! all randomness (initialization, shuffling) flows through seeded
//! ChaCha generators so a fixed seed reproduces final weights bitwise.

pub mod checkpoint;
pub mod cnn;
pub mod gru;
pub mod linalg;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use cnn::{conv1d_forward, Conv1dParams};
pub use gru::{gru_step, GruParams};
pub use linalg::{softmax, Mat};
pub use lstm::{lstm_step, lstm_step_with_gates, LstmGates, LstmParams, LstmState};
pub use model::{CellParams, Gradients, Model, GRAD_CLIP_NORM};
pub use train::{train, EpochStats, TrainOutcome};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("sequence of length {len} is shorter than kernel width {kernel}")]
    SequenceTooShort { len: usize, kernel: usize },
    #[error("token id {id} out of vocabulary (size {vocab})")]
    IndexOutOfVocab { id: usize, vocab: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty {0} split")]
    EmptySplit(&'static str),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Lstm,
    Gru,
    Cnn1d,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Lstm => "LSTM",
            Arch::Gru => "GRU",
            Arch::Cnn1d => "1D-CNN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub arch: Arch,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    /// CNN-only: filter count and kernel width.
    pub filters: usize,
    pub kernel: usize,
    pub seq_len: usize,
    pub classes: usize,
    pub embedding_trainable: bool,
    /// Use the h = tanh(s) ⊙ g output rule instead of h = o ⊙ tanh(s).
    pub candidate_gated_output: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            arch: Arch::Lstm,
            vocab_size: 0,
            embed_dim: 50,
            hidden: 64,
            filters: 64,
            kernel: 3,
            seq_len: 64,
            classes: 3,
            embedding_trainable: false,
            candidate_gated_output: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        for (name, v) in [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("seq_len", self.seq_len),
        ] {
            if v < 1 {
                return Err(NeuralError::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        match self.arch {
            Arch::Lstm | Arch::Gru => {
                if self.hidden < 1 {
                    return Err(NeuralError::InvalidConfig("hidden must be >= 1".into()));
                }
            }
            Arch::Cnn1d => {
                if self.filters < 1 || self.kernel < 1 {
                    return Err(NeuralError::InvalidConfig(
                        "filters and kernel must be >= 1".into(),
                    ));
                }
                if self.seq_len < self.kernel {
                    return Err(NeuralError::InvalidConfig(format!(
                        "seq_len {} shorter than kernel {}",
                        self.seq_len, self.kernel
                    )));
                }
            }
        }
        if self.classes != 3 {
            return Err(NeuralError::InvalidConfig(format!(
                "this task is 3-class; got classes={}",
                self.classes
            )));
        }
        Ok(())
    }

    /// Width of the vector entering the dense layer.
    pub fn dense_in(&self) -> usize {
        match self.arch {
            Arch::Lstm | Arch::Gru => self.hidden,
            Arch::Cnn1d => self.filters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.epochs < 1 {
            return Err(NeuralError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(NeuralError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(NeuralError::InvalidConfig(
                "learning_rate must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One encoded example: fixed-length id sequence, true length, class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub ids: Vec<usize>,
    pub len: usize,
    pub label: usize,
}
