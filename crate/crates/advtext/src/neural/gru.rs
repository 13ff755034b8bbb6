//! GRU cell (update/reset-gate formulation) with exact backpropagation.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{add_acc, mat_vec_t_acc, outer_acc, sigmoid, vec_mat_acc, Mat};
use super::NeuralError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub w_xz: Mat,
    pub w_xr: Mat,
    pub w_xn: Mat,
    pub u_hz: Mat,
    pub u_hr: Mat,
    pub u_hn: Mat,
    pub b_z: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_n: Vec<f64>,
}

impl GruParams {
    pub fn zeros(embed_dim: usize, hidden: usize) -> GruParams {
        GruParams {
            w_xz: Mat::zeros(embed_dim, hidden),
            w_xr: Mat::zeros(embed_dim, hidden),
            w_xn: Mat::zeros(embed_dim, hidden),
            u_hz: Mat::zeros(hidden, hidden),
            u_hr: Mat::zeros(hidden, hidden),
            u_hn: Mat::zeros(hidden, hidden),
            b_z: vec![0.0; hidden],
            b_r: vec![0.0; hidden],
            b_n: vec![0.0; hidden],
        }
    }

    pub fn init(embed_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> GruParams {
        GruParams {
            w_xz: Mat::uniform_init(embed_dim, hidden, rng),
            w_xr: Mat::uniform_init(embed_dim, hidden, rng),
            w_xn: Mat::uniform_init(embed_dim, hidden, rng),
            u_hz: Mat::uniform_init(hidden, hidden, rng),
            u_hr: Mat::uniform_init(hidden, hidden, rng),
            u_hn: Mat::uniform_init(hidden, hidden, rng),
            b_z: vec![0.0; hidden],
            b_r: vec![0.0; hidden],
            b_n: vec![0.0; hidden],
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.w_xz.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w_xz.cols()
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_xz.as_slice(),
            self.w_xr.as_slice(),
            self.w_xn.as_slice(),
            self.u_hz.as_slice(),
            self.u_hr.as_slice(),
            self.u_hn.as_slice(),
            &self.b_z,
            &self.b_r,
            &self.b_n,
        ]
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_xz.as_mut_slice(),
            self.w_xr.as_mut_slice(),
            self.w_xn.as_mut_slice(),
            self.u_hz.as_mut_slice(),
            self.u_hr.as_mut_slice(),
            self.u_hn.as_mut_slice(),
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_n,
        ]
    }

    pub fn named_arrays(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let (e, h) = (self.embed_dim(), self.hidden());
        vec![
            ("gru.w_xz", vec![e, h], self.w_xz.as_slice()),
            ("gru.w_xr", vec![e, h], self.w_xr.as_slice()),
            ("gru.w_xn", vec![e, h], self.w_xn.as_slice()),
            ("gru.u_hz", vec![h, h], self.u_hz.as_slice()),
            ("gru.u_hr", vec![h, h], self.u_hr.as_slice()),
            ("gru.u_hn", vec![h, h], self.u_hn.as_slice()),
            ("gru.b_z", vec![h], &self.b_z),
            ("gru.b_r", vec![h], &self.b_r),
            ("gru.b_n", vec![h], &self.b_n),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub n: Vec<f64>,
    pub rh: Vec<f64>,
}

fn gate_preact(x: &[f64], h: &[f64], w: &Mat, u: &Mat, b: &[f64]) -> Vec<f64> {
    let mut a = b.to_vec();
    vec_mat_acc(x, w, &mut a);
    vec_mat_acc(h, u, &mut a);
    a
}

pub(crate) fn gru_step_cached(
    x: &[f64],
    h_prev: &[f64],
    p: &GruParams,
) -> (Vec<f64>, GruStepCache) {
    let z: Vec<f64> = gate_preact(x, h_prev, &p.w_xz, &p.u_hz, &p.b_z)
        .into_iter()
        .map(sigmoid)
        .collect();
    let r: Vec<f64> = gate_preact(x, h_prev, &p.w_xr, &p.u_hr, &p.b_r)
        .into_iter()
        .map(sigmoid)
        .collect();
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(&ri, &hi)| ri * hi).collect();

    let mut a_n = p.b_n.to_vec();
    vec_mat_acc(x, &p.w_xn, &mut a_n);
    vec_mat_acc(&rh, &p.u_hn, &mut a_n);
    let n: Vec<f64> = a_n.into_iter().map(f64::tanh).collect();

    // h' = (1 - z) ⊙ n + z ⊙ h.
    let h: Vec<f64> = (0..z.len())
        .map(|j| (1.0 - z[j]) * n[j] + z[j] * h_prev[j])
        .collect();

    let cache = GruStepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        n,
        rh,
    };
    (h, cache)
}

/// One GRU step: update gate z, reset gate r, candidate n, and the
/// convex-combination output.
pub fn gru_step(x: &[f64], h_prev: &[f64], p: &GruParams) -> Result<Vec<f64>, NeuralError> {
    if x.len() != p.embed_dim() || h_prev.len() != p.hidden() {
        return Err(NeuralError::ShapeMismatch(format!(
            "gru_step: x={} h_prev={} vs E={} H={}",
            x.len(),
            h_prev.len(),
            p.embed_dim(),
            p.hidden()
        )));
    }
    if !x.iter().chain(h_prev).all(|v| v.is_finite()) {
        return Err(NeuralError::NonFinite("gru_step input".into()));
    }
    Ok(gru_step_cached(x, h_prev, p).0)
}

/// Backward through one step; `dh` carries dL/dh_t in and dL/dh_{t-1}
/// out.
pub(crate) fn gru_step_backward(
    cache: &GruStepCache,
    p: &GruParams,
    grads: &mut GruParams,
    dh: &mut Vec<f64>,
    want_dx: bool,
) -> Option<Vec<f64>> {
    let hsz = p.hidden();

    let mut da_z = vec![0.0; hsz];
    let mut da_n = vec![0.0; hsz];
    let mut dh_prev = vec![0.0; hsz];
    for j in 0..hsz {
        let dz = dh[j] * (cache.h_prev[j] - cache.n[j]);
        let dn = dh[j] * (1.0 - cache.z[j]);
        dh_prev[j] = dh[j] * cache.z[j];
        da_z[j] = dz * cache.z[j] * (1.0 - cache.z[j]);
        da_n[j] = dn * (1.0 - cache.n[j] * cache.n[j]);
    }

    // Candidate path: n = tanh(x W_n + (r ⊙ h) U_n + b_n).
    let mut d_rh = vec![0.0; hsz];
    mat_vec_t_acc(&p.u_hn, &da_n, &mut d_rh);
    let mut da_r = vec![0.0; hsz];
    for j in 0..hsz {
        let dr = d_rh[j] * cache.h_prev[j];
        dh_prev[j] += d_rh[j] * cache.r[j];
        da_r[j] = dr * cache.r[j] * (1.0 - cache.r[j]);
    }

    outer_acc(&mut grads.w_xz, &cache.x, &da_z);
    outer_acc(&mut grads.w_xr, &cache.x, &da_r);
    outer_acc(&mut grads.w_xn, &cache.x, &da_n);
    outer_acc(&mut grads.u_hz, &cache.h_prev, &da_z);
    outer_acc(&mut grads.u_hr, &cache.h_prev, &da_r);
    outer_acc(&mut grads.u_hn, &cache.rh, &da_n);
    add_acc(&mut grads.b_z, &da_z);
    add_acc(&mut grads.b_r, &da_r);
    add_acc(&mut grads.b_n, &da_n);

    mat_vec_t_acc(&p.u_hz, &da_z, &mut dh_prev);
    mat_vec_t_acc(&p.u_hr, &da_r, &mut dh_prev);
    *dh = dh_prev;

    if want_dx {
        let mut dx = vec![0.0; p.embed_dim()];
        mat_vec_t_acc(&p.w_xz, &da_z, &mut dx);
        mat_vec_t_acc(&p.w_xr, &da_r, &mut dx);
        mat_vec_t_acc(&p.w_xn, &da_n, &mut dx);
        Some(dx)
    } else {
        None
    }
}
