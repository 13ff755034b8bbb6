//! Adversarial robustness toolkit for hate-speech classification.
//!
//! The pipeline mirrors the moderation setting it studies: tweets are
//! loaded from a Davidson-style annotated CSV, preprocessed, optionally
//! perturbed by seeded character/word/sentence-level attacks, repaired by
//! a dictionary-based correction stage, and classified by from-scratch
//! LSTM/GRU/1D-CNN models trained with exact backpropagation through
//! time. A metric suite (accuracy, weighted precision/recall/F1,
//! one-vs-rest ROC-AUC) and a reproducible experiment harness tie the
//! stages together.
//!
//! Every stochastic stage is seeded and replayable; experiment configs
//! are content-hashed so any reported number can be traced to the exact
//! configuration that produced it.

pub mod adversary;
pub mod corpus;
pub mod corrector;
pub mod fixtures;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod textprep;

pub use corpus::{CorpusSplit, Label, LabeledTweet, SplitSpec};
pub use harness::{ExperimentConfig, RunReport};
pub use neural::{Model, ModelConfig, Sample, TrainConfig};
