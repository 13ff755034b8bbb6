//! Minimal dense linear algebra for the from-scratch networks: a
//! row-major f64 matrix and the handful of vector kernels the cells
//! need. Row-vector convention throughout: activations are row vectors,
//! weights are (in_dim x out_dim), and y = x W.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Mat {
        assert_eq!(data.len(), rows * cols, "data length must match shape");
        Mat { rows, cols, data }
    }

    /// Uniform(-r, r) with r = 1/sqrt(fan_in); fan_in is the row count
    /// under the row-vector convention.
    pub fn uniform_init(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::uniform_radius(rows, cols, 1.0 / (rows as f64).sqrt(), rng)
    }

    pub fn uniform_radius(rows: usize, cols: usize, radius: f64, rng: &mut ChaCha8Rng) -> Mat {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-radius..radius))
            .collect();
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// out += x W  (x: rows-length, out: cols-length).
pub fn vec_mat_acc(x: &[f64], w: &Mat, out: &mut [f64]) {
    debug_assert_eq!(x.len(), w.rows);
    debug_assert_eq!(out.len(), w.cols);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = w.row(i);
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
}

/// `out[i] += dot(w.row(i), v)`: the transpose product W v used to push
/// gradients back through a layer.
pub fn mat_vec_t_acc(w: &Mat, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(v.len(), w.cols);
    debug_assert_eq!(out.len(), w.rows);
    for (i, o) in out.iter_mut().enumerate() {
        *o += dot(w.row(i), v);
    }
}

/// dW += outer(x, dy).
pub fn outer_acc(dw: &mut Mat, x: &[f64], dy: &[f64]) {
    debug_assert_eq!(x.len(), dw.rows);
    debug_assert_eq!(dy.len(), dw.cols);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = dw.row_mut(i);
        for (r, &d) in row.iter_mut().zip(dy) {
            *r += xi * d;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add_acc(out: &mut [f64], x: &[f64]) {
    debug_assert_eq!(out.len(), x.len());
    for (o, &v) in out.iter_mut().zip(x) {
        *o += v;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn global_norm<'a, I: Iterator<Item = &'a [f64]>>(slices: I) -> f64 {
    let mut sq = 0.0;
    for s in slices {
        for &v in s {
            sq += v * v;
        }
    }
    sq.sqrt()
}

pub fn all_finite<'a, I: Iterator<Item = &'a [f64]>>(slices: I) -> bool {
    slices.flat_map(|s| s.iter()).all(|v| v.is_finite())
}
