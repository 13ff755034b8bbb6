//! 1-D convolution over the embedded sequence with rectifier activation
//! and global max pooling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{dot, Mat};
use super::NeuralError;

/// F filters of width k over E-dimensional embeddings. Each filter is a
/// row of `w`, laid out time-major: [t0·e0.., t1·e0.., ...].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1dParams {
    pub w: Mat,
    pub b: Vec<f64>,
    pub kernel: usize,
    pub embed_dim: usize,
}

impl Conv1dParams {
    pub fn zeros(filters: usize, kernel: usize, embed_dim: usize) -> Conv1dParams {
        Conv1dParams {
            w: Mat::zeros(filters, kernel * embed_dim),
            b: vec![0.0; filters],
            kernel,
            embed_dim,
        }
    }

    pub fn init(
        filters: usize,
        kernel: usize,
        embed_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Conv1dParams {
        let fan_in = kernel * embed_dim;
        let r = 1.0 / (fan_in as f64).sqrt();
        let data = (0..filters * fan_in)
            .map(|_| rng.gen_range(-r..r))
            .collect();
        Conv1dParams {
            w: Mat::from_vec(filters, fan_in, data),
            b: vec![0.0; filters],
            kernel,
            embed_dim,
        }
    }

    pub fn filters(&self) -> usize {
        self.w.rows()
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }

    pub fn named_arrays(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        vec![
            (
                "cnn.w",
                vec![self.filters(), self.kernel, self.embed_dim],
                self.w.as_slice(),
            ),
            ("cnn.b", vec![self.filters()], &self.b),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ConvCache {
    /// Rectified feature map, (L - k + 1) x F.
    pub activations: Mat,
    /// Winning time index per filter (first maximum on ties).
    pub argmax: Vec<usize>,
}

/// Valid (no-padding) convolution, rectifier, then a global max over
/// time per filter. Returns the feature map and the pooled F-vector.
pub fn conv1d_forward(
    sequence: &Mat,
    params: &Conv1dParams,
) -> Result<(Mat, Vec<f64>), NeuralError> {
    let (pooled, cache) = conv1d_forward_cached(sequence, params)?;
    Ok((cache.activations, pooled))
}

pub(crate) fn conv1d_forward_cached(
    sequence: &Mat,
    params: &Conv1dParams,
) -> Result<(Vec<f64>, ConvCache), NeuralError> {
    let len = sequence.rows();
    let k = params.kernel;
    if sequence.cols() != params.embed_dim {
        return Err(NeuralError::ShapeMismatch(format!(
            "conv1d: sequence width {} vs embed_dim {}",
            sequence.cols(),
            params.embed_dim
        )));
    }
    if len < k {
        return Err(NeuralError::SequenceTooShort { len, kernel: k });
    }

    let f = params.filters();
    let t_out = len - k + 1;
    let mut activations = Mat::zeros(t_out, f);
    for t in 0..t_out {
        // Window rows t..t+k are contiguous in the row-major sequence.
        let window = &sequence.as_slice()[t * params.embed_dim..(t + k) * params.embed_dim];
        let row = activations.row_mut(t);
        for (fi, out) in row.iter_mut().enumerate() {
            let v = dot(params.w.row(fi), window) + params.b[fi];
            *out = v.max(0.0);
        }
    }

    let mut pooled = vec![0.0; f];
    let mut argmax = vec![0usize; f];
    for fi in 0..f {
        let mut best = activations.row(0)[fi];
        let mut best_t = 0;
        for t in 1..t_out {
            let v = activations.row(t)[fi];
            if v > best {
                best = v;
                best_t = t;
            }
        }
        pooled[fi] = best;
        argmax[fi] = best_t;
    }

    Ok((
        pooled,
        ConvCache {
            activations,
            argmax,
        },
    ))
}

/// Backward from the pooled vector: gradient flows only through each
/// filter's winning window, and only where the rectifier was active.
pub(crate) fn conv1d_backward(
    sequence: &Mat,
    params: &Conv1dParams,
    cache: &ConvCache,
    d_pooled: &[f64],
    grads: &mut Conv1dParams,
    d_sequence: Option<&mut Mat>,
) {
    let k = params.kernel;
    let e = params.embed_dim;
    let mut d_seq = d_sequence;
    for fi in 0..params.filters() {
        let t = cache.argmax[fi];
        if cache.activations.row(t)[fi] <= 0.0 {
            continue;
        }
        let g = d_pooled[fi];
        if g == 0.0 {
            continue;
        }
        let window = &sequence.as_slice()[t * e..(t + k) * e];
        let w_row = grads.w.row_mut(fi);
        for (wr, &x) in w_row.iter_mut().zip(window) {
            *wr += g * x;
        }
        grads.b[fi] += g;
        if let Some(ds) = d_seq.as_deref_mut() {
            let ds_window = &mut ds.as_mut_slice()[t * e..(t + k) * e];
            for (d, &w) in ds_window.iter_mut().zip(params.w.row(fi)) {
                *d += g * w;
            }
        }
    }
}
