//! Self-describing JSON checkpoints: version, config, vocabulary hash,
//! and every parameter array with its shape.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{CellParams, Model};
use super::{Arch, ModelConfig, NeuralError};
use crate::neural::cnn::Conv1dParams;
use crate::neural::gru::GruParams;
use crate::neural::linalg::Mat;
use crate::neural::lstm::LstmParams;

pub const CHECKPOINT_VERSION: &str = "1";

#[derive(Debug, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub arrays: Vec<NamedArray>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("unsupported checkpoint version `{0}`")]
    Version(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

pub fn save_checkpoint(
    model: &Model,
    vocab_hash: &str,
    path: &Path,
) -> Result<(), CheckpointError> {
    let arrays = model
        .named_arrays()
        .into_iter()
        .map(|(name, shape, data)| NamedArray { name, shape, data })
        .collect();
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION.to_string(),
        config: model.cfg.clone(),
        vocab_hash: vocab_hash.to_string(),
        arrays,
    };
    let json =
        serde_json::to_string(&ckpt).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

fn take_array(
    ckpt: &Checkpoint,
    name: &str,
    expect: &[usize],
) -> Result<Vec<f64>, CheckpointError> {
    let arr = ckpt
        .arrays
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| CheckpointError::Malformed(format!("missing array `{name}`")))?;
    if arr.shape != expect {
        return Err(CheckpointError::Malformed(format!(
            "array `{name}` has shape {:?}, expected {:?}",
            arr.shape, expect
        )));
    }
    let len: usize = expect.iter().product();
    if arr.data.len() != len {
        return Err(CheckpointError::Malformed(format!(
            "array `{name}` has {} values, expected {len}",
            arr.data.len()
        )));
    }
    Ok(arr.data.clone())
}

fn mat(ckpt: &Checkpoint, name: &str, rows: usize, cols: usize) -> Result<Mat, CheckpointError> {
    Ok(Mat::from_vec(
        rows,
        cols,
        take_array(ckpt, name, &[rows, cols])?,
    ))
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, String), CheckpointError> {
    let json = std::fs::read_to_string(path)?;
    let ckpt: Checkpoint =
        serde_json::from_str(&json).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(ckpt.version));
    }
    let cfg = ckpt.config.clone();
    cfg.validate()?;
    let (v, e, h) = (cfg.vocab_size, cfg.embed_dim, cfg.hidden);

    let embedding = mat(&ckpt, "embedding", v, e)?;
    let cell = match cfg.arch {
        Arch::Lstm => CellParams::Lstm(LstmParams {
            w_xi: mat(&ckpt, "lstm.w_xi", e, h)?,
            w_xg: mat(&ckpt, "lstm.w_xg", e, h)?,
            w_xf: mat(&ckpt, "lstm.w_xf", e, h)?,
            w_xo: mat(&ckpt, "lstm.w_xo", e, h)?,
            u_hi: mat(&ckpt, "lstm.u_hi", h, h)?,
            u_hg: mat(&ckpt, "lstm.u_hg", h, h)?,
            u_hf: mat(&ckpt, "lstm.u_hf", h, h)?,
            u_ho: mat(&ckpt, "lstm.u_ho", h, h)?,
            b_i: take_array(&ckpt, "lstm.b_i", &[h])?,
            b_g: take_array(&ckpt, "lstm.b_g", &[h])?,
            b_f: take_array(&ckpt, "lstm.b_f", &[h])?,
            b_o: take_array(&ckpt, "lstm.b_o", &[h])?,
        }),
        Arch::Gru => CellParams::Gru(GruParams {
            w_xz: mat(&ckpt, "gru.w_xz", e, h)?,
            w_xr: mat(&ckpt, "gru.w_xr", e, h)?,
            w_xn: mat(&ckpt, "gru.w_xn", e, h)?,
            u_hz: mat(&ckpt, "gru.u_hz", h, h)?,
            u_hr: mat(&ckpt, "gru.u_hr", h, h)?,
            u_hn: mat(&ckpt, "gru.u_hn", h, h)?,
            b_z: take_array(&ckpt, "gru.b_z", &[h])?,
            b_r: take_array(&ckpt, "gru.b_r", &[h])?,
            b_n: take_array(&ckpt, "gru.b_n", &[h])?,
        }),
        Arch::Cnn1d => {
            let (f, k) = (cfg.filters, cfg.kernel);
            CellParams::Cnn(Conv1dParams {
                w: Mat::from_vec(f, k * e, take_array(&ckpt, "cnn.w", &[f, k, e])?),
                b: take_array(&ckpt, "cnn.b", &[f])?,
                kernel: k,
                embed_dim: e,
            })
        }
    };
    let dense_w = mat(&ckpt, "dense.w", cfg.dense_in(), cfg.classes)?;
    let dense_b = take_array(&ckpt, "dense.b", &[cfg.classes])?;

    Ok((
        Model {
            cfg,
            embedding,
            cell,
            dense_w,
            dense_b,
        },
        ckpt.vocab_hash,
    ))
}
