//! Seeded training loop: shuffle, batch, clip, update; one curve row
//! per epoch and a best-validation-accuracy snapshot.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::optim::Adam;
use super::{NeuralError, Sample, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights after the final epoch.
    pub model: Model,
    /// Snapshot with the highest validation accuracy (earliest epoch on
    /// ties).
    pub best: Model,
    pub best_epoch: usize,
    pub curve: Vec<EpochStats>,
}

/// Train a model. Deterministic for a fixed config seed: shuffling,
/// batching, and updates are all sequential and seeded. Train metrics
/// are running averages over the epoch's batches (measured before each
/// update); validation is evaluated after the epoch.
pub fn train(
    mut model: Model,
    train_split: &[Sample],
    val_split: &[Sample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, NeuralError> {
    cfg.validate()?;
    if train_split.is_empty() {
        return Err(NeuralError::EmptySplit("train"));
    }
    if val_split.is_empty() {
        return Err(NeuralError::EmptySplit("validation"));
    }

    let shapes: Vec<usize> = model.trainable_slices().iter().map(|s| s.len()).collect();
    let mut adam = Adam::new(
        &shapes,
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(Model, usize, f64)> = None;

    let mut order: Vec<usize> = (0..train_split.len()).collect();
    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }

        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Sample> = chunk.iter().map(|&i| train_split[i].clone()).collect();
            let (loss, grads, correct) = model.loss_grads_counting(&batch)?;
            let norm = grads.global_norm();
            let mut grads = grads;
            if norm > super::model::GRAD_CLIP_NORM {
                grads.scale(super::model::GRAD_CLIP_NORM / norm);
            }
            epoch_loss += loss * batch.len() as f64;
            epoch_correct += correct;

            let grad_slices = grads.trainable_slices();
            let mut param_slices = model.trainable_slices_mut();
            adam.step(&mut param_slices, &grad_slices);
        }

        let val = model.evaluate(val_split)?;
        let stats = EpochStats {
            epoch,
            train_loss: epoch_loss / train_split.len() as f64,
            train_acc: epoch_correct as f64 / train_split.len() as f64,
            val_loss: val.loss,
            val_acc: val.accuracy,
        };
        let improved = match &best {
            None => true,
            Some((_, _, acc)) => stats.val_acc > *acc,
        };
        if improved {
            best = Some((model.clone(), epoch, stats.val_acc));
        }
        curve.push(stats);
    }

    let (best_model, best_epoch, _) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        best: best_model,
        best_epoch,
        curve,
    })
}

/// The exact CSV the harness emits: header plus one row per epoch.
pub fn curve_to_csv(curve: &[EpochStats]) -> String {
    let mut out = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
    for row in curve {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.epoch, row.train_loss, row.train_acc, row.val_loss, row.val_acc
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Arch, ModelConfig};

    fn toy_config() -> ModelConfig {
        ModelConfig {
            arch: Arch::Lstm,
            vocab_size: 8,
            embed_dim: 4,
            hidden: 4,
            seq_len: 4,
            ..ModelConfig::default()
        }
    }

    fn toy_data(n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| {
                let class = i % 3;
                Sample {
                    ids: vec![2 + class, 2 + class, 0, 0],
                    len: 2,
                    label: class,
                }
            })
            .collect()
    }

    #[test]
    fn one_epoch_one_batch_takes_one_step() {
        let model = Model::new(toy_config(), 0).unwrap();
        let data = toy_data(6);
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let before = model.trainable_slices()[0].to_vec();
        let out = train(model, &data, &data, &cfg).unwrap();
        assert_eq!(out.curve.len(), 1);
        assert_ne!(out.model.trainable_slices()[0], before.as_slice());
    }

    #[test]
    fn same_seed_gives_bitwise_identical_weights() {
        let data = toy_data(12);
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 4,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train(Model::new(toy_config(), 7).unwrap(), &data, &data, &cfg).unwrap();
        let b = train(Model::new(toy_config(), 7).unwrap(), &data, &data, &cfg).unwrap();
        for (x, y) in a
            .model
            .trainable_slices()
            .iter()
            .zip(b.model.trainable_slices().iter())
        {
            assert_eq!(x, y);
        }
        assert_eq!(a.curve, b.curve);
    }

    #[test]
    fn empty_split_is_an_error() {
        let model = Model::new(toy_config(), 0).unwrap();
        let data = toy_data(4);
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(model.clone(), &[], &data, &cfg),
            Err(NeuralError::EmptySplit("train"))
        ));
        assert!(matches!(
            train(model, &data, &[], &cfg),
            Err(NeuralError::EmptySplit("validation"))
        ));
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let curve = vec![EpochStats {
            epoch: 1,
            train_loss: 1.0,
            train_acc: 0.5,
            val_loss: 1.1,
            val_acc: 0.4,
        }];
        let csv = curve_to_csv(&curve);
        assert!(csv.starts_with("epoch,train_loss,train_acc,val_loss,val_acc\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
