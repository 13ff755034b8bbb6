//! LSTM cell: gates and state updates with exact backpropagation
//! through time.
//!
//! Two output rules are supported. The standard cell emits
//! h = o ⊙ tanh(s). The alternative rule h = tanh(s) ⊙ g (selected by
//! `candidate_gated`) leaves the output gate out of the forward path; its
//! parameters then receive exactly zero gradient.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{add_acc, mat_vec_t_acc, outer_acc, sigmoid, vec_mat_acc, Mat};
use super::NeuralError;

/// Feed-forward weights W (E x H), recurrent weights U (H x H), and one
/// bias vector per gate (input i, update g, forget f, output o).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub w_xi: Mat,
    pub w_xg: Mat,
    pub w_xf: Mat,
    pub w_xo: Mat,
    pub u_hi: Mat,
    pub u_hg: Mat,
    pub u_hf: Mat,
    pub u_ho: Mat,
    pub b_i: Vec<f64>,
    pub b_g: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(embed_dim: usize, hidden: usize) -> LstmParams {
        LstmParams {
            w_xi: Mat::zeros(embed_dim, hidden),
            w_xg: Mat::zeros(embed_dim, hidden),
            w_xf: Mat::zeros(embed_dim, hidden),
            w_xo: Mat::zeros(embed_dim, hidden),
            u_hi: Mat::zeros(hidden, hidden),
            u_hg: Mat::zeros(hidden, hidden),
            u_hf: Mat::zeros(hidden, hidden),
            u_ho: Mat::zeros(hidden, hidden),
            b_i: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    /// Seeded uniform init; the forget-gate bias starts at 1.0 so early
    /// training does not wipe the cell state.
    pub fn init(embed_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> LstmParams {
        let mut p = LstmParams {
            w_xi: Mat::uniform_init(embed_dim, hidden, rng),
            w_xg: Mat::uniform_init(embed_dim, hidden, rng),
            w_xf: Mat::uniform_init(embed_dim, hidden, rng),
            w_xo: Mat::uniform_init(embed_dim, hidden, rng),
            u_hi: Mat::uniform_init(hidden, hidden, rng),
            u_hg: Mat::uniform_init(hidden, hidden, rng),
            u_hf: Mat::uniform_init(hidden, hidden, rng),
            u_ho: Mat::uniform_init(hidden, hidden, rng),
            b_i: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        };
        p.b_f.iter_mut().for_each(|b| *b = 1.0);
        p
    }

    pub fn embed_dim(&self) -> usize {
        self.w_xi.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w_xi.cols()
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_xi.as_slice(),
            self.w_xg.as_slice(),
            self.w_xf.as_slice(),
            self.w_xo.as_slice(),
            self.u_hi.as_slice(),
            self.u_hg.as_slice(),
            self.u_hf.as_slice(),
            self.u_ho.as_slice(),
            &self.b_i,
            &self.b_g,
            &self.b_f,
            &self.b_o,
        ]
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_xi.as_mut_slice(),
            self.w_xg.as_mut_slice(),
            self.w_xf.as_mut_slice(),
            self.w_xo.as_mut_slice(),
            self.u_hi.as_mut_slice(),
            self.u_hg.as_mut_slice(),
            self.u_hf.as_mut_slice(),
            self.u_ho.as_mut_slice(),
            &mut self.b_i,
            &mut self.b_g,
            &mut self.b_f,
            &mut self.b_o,
        ]
    }

    pub fn named_arrays(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let (e, h) = (self.embed_dim(), self.hidden());
        vec![
            ("lstm.w_xi", vec![e, h], self.w_xi.as_slice()),
            ("lstm.w_xg", vec![e, h], self.w_xg.as_slice()),
            ("lstm.w_xf", vec![e, h], self.w_xf.as_slice()),
            ("lstm.w_xo", vec![e, h], self.w_xo.as_slice()),
            ("lstm.u_hi", vec![h, h], self.u_hi.as_slice()),
            ("lstm.u_hg", vec![h, h], self.u_hg.as_slice()),
            ("lstm.u_hf", vec![h, h], self.u_hf.as_slice()),
            ("lstm.u_ho", vec![h, h], self.u_ho.as_slice()),
            ("lstm.b_i", vec![h], &self.b_i),
            ("lstm.b_g", vec![h], &self.b_g),
            ("lstm.b_f", vec![h], &self.b_f),
            ("lstm.b_o", vec![h], &self.b_o),
        ]
    }
}

/// Hidden output h and cell state s at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub s: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> LstmState {
        LstmState {
            h: vec![0.0; hidden],
            s: vec![0.0; hidden],
        }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub s_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub tanh_s: Vec<f64>,
}

fn gate_preact(x: &[f64], h_prev: &[f64], w: &Mat, u: &Mat, b: &[f64]) -> Vec<f64> {
    let mut a = b.to_vec();
    vec_mat_acc(x, w, &mut a);
    vec_mat_acc(h_prev, u, &mut a);
    a
}

pub(crate) fn lstm_step_cached(
    x: &[f64],
    prev: &LstmState,
    p: &LstmParams,
    candidate_gated: bool,
) -> (LstmState, LstmStepCache) {
    let i: Vec<f64> = gate_preact(x, &prev.h, &p.w_xi, &p.u_hi, &p.b_i)
        .into_iter()
        .map(sigmoid)
        .collect();
    let g: Vec<f64> = gate_preact(x, &prev.h, &p.w_xg, &p.u_hg, &p.b_g)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let f: Vec<f64> = gate_preact(x, &prev.h, &p.w_xf, &p.u_hf, &p.b_f)
        .into_iter()
        .map(sigmoid)
        .collect();
    let o: Vec<f64> = gate_preact(x, &prev.h, &p.w_xo, &p.u_ho, &p.b_o)
        .into_iter()
        .map(sigmoid)
        .collect();

    let s: Vec<f64> = (0..i.len())
        .map(|j| f[j] * prev.s[j] + i[j] * g[j])
        .collect();
    let tanh_s: Vec<f64> = s.iter().map(|&v| v.tanh()).collect();
    let h: Vec<f64> = if candidate_gated {
        (0..i.len()).map(|j| tanh_s[j] * g[j]).collect()
    } else {
        (0..i.len()).map(|j| o[j] * tanh_s[j]).collect()
    };

    let cache = LstmStepCache {
        x: x.to_vec(),
        h_prev: prev.h.clone(),
        s_prev: prev.s.clone(),
        i,
        g,
        f,
        o,
        tanh_s,
    };
    (LstmState { h, s }, cache)
}

/// Gate activations of one step, exposed for inspection and oracle
/// tests.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGates {
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
}

/// One LSTM step: gates i,g,f,o, cell update s = f⊙s₋₁ + i⊙g, and the
/// selected output rule.
pub fn lstm_step(
    x: &[f64],
    prev: &LstmState,
    p: &LstmParams,
    candidate_gated: bool,
) -> Result<LstmState, NeuralError> {
    Ok(lstm_step_with_gates(x, prev, p, candidate_gated)?.0)
}

/// As [`lstm_step`], also returning the gate activations.
pub fn lstm_step_with_gates(
    x: &[f64],
    prev: &LstmState,
    p: &LstmParams,
    candidate_gated: bool,
) -> Result<(LstmState, LstmGates), NeuralError> {
    if x.len() != p.embed_dim() || prev.h.len() != p.hidden() || prev.s.len() != p.hidden() {
        return Err(NeuralError::ShapeMismatch(format!(
            "lstm_step: x={} prev.h={} prev.s={} vs E={} H={}",
            x.len(),
            prev.h.len(),
            prev.s.len(),
            p.embed_dim(),
            p.hidden()
        )));
    }
    if !x
        .iter()
        .chain(&prev.h)
        .chain(&prev.s)
        .all(|v| v.is_finite())
    {
        return Err(NeuralError::NonFinite("lstm_step input".into()));
    }
    let (state, cache) = lstm_step_cached(x, prev, p, candidate_gated);
    let gates = LstmGates {
        i: cache.i,
        g: cache.g,
        f: cache.f,
        o: cache.o,
    };
    Ok((state, gates))
}

/// Backward through one step. `dh`/`ds` hold dL/dh_t and dL/ds_t coming
/// in from the future; on return they hold dL/dh_{t-1} and dL/ds_{t-1}.
/// Returns dL/dx_t when `want_dx` is set.
pub(crate) fn lstm_step_backward(
    cache: &LstmStepCache,
    p: &LstmParams,
    grads: &mut LstmParams,
    dh: &mut Vec<f64>,
    ds: &mut [f64],
    candidate_gated: bool,
    want_dx: bool,
) -> Option<Vec<f64>> {
    let hsz = p.hidden();
    let mut dg_direct = vec![0.0; hsz];

    if candidate_gated {
        // h = tanh(s) ⊙ g
        for j in 0..hsz {
            ds[j] += dh[j] * cache.g[j] * (1.0 - cache.tanh_s[j] * cache.tanh_s[j]);
            dg_direct[j] = dh[j] * cache.tanh_s[j];
        }
    } else {
        // h = o ⊙ tanh(s)
        for j in 0..hsz {
            ds[j] += dh[j] * cache.o[j] * (1.0 - cache.tanh_s[j] * cache.tanh_s[j]);
        }
    }

    let mut da_i = vec![0.0; hsz];
    let mut da_g = vec![0.0; hsz];
    let mut da_f = vec![0.0; hsz];
    let mut da_o = vec![0.0; hsz];
    for j in 0..hsz {
        let di = ds[j] * cache.g[j];
        let dg = ds[j] * cache.i[j] + dg_direct[j];
        let df = ds[j] * cache.s_prev[j];
        let do_ = if candidate_gated {
            0.0
        } else {
            dh[j] * cache.tanh_s[j]
        };
        da_i[j] = di * cache.i[j] * (1.0 - cache.i[j]);
        da_g[j] = dg * (1.0 - cache.g[j] * cache.g[j]);
        da_f[j] = df * cache.f[j] * (1.0 - cache.f[j]);
        da_o[j] = do_ * cache.o[j] * (1.0 - cache.o[j]);
    }

    outer_acc(&mut grads.w_xi, &cache.x, &da_i);
    outer_acc(&mut grads.w_xg, &cache.x, &da_g);
    outer_acc(&mut grads.w_xf, &cache.x, &da_f);
    outer_acc(&mut grads.w_xo, &cache.x, &da_o);
    outer_acc(&mut grads.u_hi, &cache.h_prev, &da_i);
    outer_acc(&mut grads.u_hg, &cache.h_prev, &da_g);
    outer_acc(&mut grads.u_hf, &cache.h_prev, &da_f);
    outer_acc(&mut grads.u_ho, &cache.h_prev, &da_o);
    add_acc(&mut grads.b_i, &da_i);
    add_acc(&mut grads.b_g, &da_g);
    add_acc(&mut grads.b_f, &da_f);
    add_acc(&mut grads.b_o, &da_o);

    // dL/ds_{t-1} = ds ⊙ f.
    for j in 0..hsz {
        ds[j] *= cache.f[j];
    }
    // dL/dh_{t-1} = Σ da_* U_*ᵀ.
    let mut dh_prev = vec![0.0; hsz];
    mat_vec_t_acc(&p.u_hi, &da_i, &mut dh_prev);
    mat_vec_t_acc(&p.u_hg, &da_g, &mut dh_prev);
    mat_vec_t_acc(&p.u_hf, &da_f, &mut dh_prev);
    mat_vec_t_acc(&p.u_ho, &da_o, &mut dh_prev);
    *dh = dh_prev;

    if want_dx {
        let mut dx = vec![0.0; p.embed_dim()];
        mat_vec_t_acc(&p.w_xi, &da_i, &mut dx);
        mat_vec_t_acc(&p.w_xg, &da_g, &mut dx);
        mat_vec_t_acc(&p.w_xf, &da_f, &mut dx);
        mat_vec_t_acc(&p.w_xo, &da_o, &mut dx);
        Some(dx)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> LstmParams {
        // E = H = 1, all feed-forward weights 1, recurrent weights and
        // biases 0.
        let mut p = LstmParams::zeros(1, 1);
        p.w_xi.as_mut_slice()[0] = 1.0;
        p.w_xg.as_mut_slice()[0] = 1.0;
        p.w_xf.as_mut_slice()[0] = 1.0;
        p.w_xo.as_mut_slice()[0] = 1.0;
        p
    }

    #[test]
    fn zero_everything_gives_half_gates() {
        let p = LstmParams::zeros(2, 3);
        let prev = LstmState::zeros(3);
        for candidate_gated in [false, true] {
            let (state, cache) = lstm_step_cached(&[0.0, 0.0], &prev, &p, candidate_gated);
            for j in 0..3 {
                assert_eq!(cache.i[j], 0.5);
                assert_eq!(cache.f[j], 0.5);
                assert_eq!(cache.o[j], 0.5);
                assert_eq!(cache.g[j], 0.0);
                assert_eq!(state.s[j], 0.0);
                assert_eq!(state.h[j], 0.0);
            }
        }
    }

    #[test]
    fn scalar_oracle_standard_output() {
        // Independently computed: i=f=o=σ(1), g=tanh(1), s=i·g,
        // h = o·tanh(s).
        let p = unit_params();
        let prev = LstmState::zeros(1);
        let state = lstm_step(&[1.0], &prev, &p, false).unwrap();
        assert!((state.s[0] - 0.5567699411459397).abs() < 1e-12);
        assert!((state.h[0] - 0.3696063529357057).abs() < 1e-12);
    }

    #[test]
    fn scalar_oracle_candidate_gated_output() {
        // h = tanh(s)·g under the alternative output rule.
        let p = unit_params();
        let prev = LstmState::zeros(1);
        let state = lstm_step(&[1.0], &prev, &p, true).unwrap();
        assert!((state.s[0] - 0.5567699411459397).abs() < 1e-12);
        assert!((state.h[0] - 0.3850444364218614).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = LstmParams::zeros(2, 3);
        let prev = LstmState::zeros(3);
        assert!(matches!(
            lstm_step(&[0.0], &prev, &p, false),
            Err(NeuralError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let p = LstmParams::zeros(1, 1);
        let prev = LstmState::zeros(1);
        assert!(matches!(
            lstm_step(&[f64::NAN], &prev, &p, false),
            Err(NeuralError::NonFinite(_))
        ));
    }

    #[test]
    fn state_stays_bounded_and_gates_stay_open() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmParams::init(4, 6, &mut rng);
        let mut state = LstmState::zeros(6);
        for t in 0..50 {
            let x: Vec<f64> = (0..4).map(|k| ((t * 4 + k) as f64).sin() * 3.0).collect();
            let (next, gates) = lstm_step_with_gates(&x, &state, &p, false).unwrap();
            state = next;
            for (&h, &s) in state.h.iter().zip(&state.s) {
                assert!(h.abs() <= 1.0 + 1e-12, "|h| must stay <= 1, got {h}");
                assert!(s.is_finite());
            }
            for v in gates.i.iter().chain(&gates.f).chain(&gates.o) {
                assert!(*v > 0.0 && *v < 1.0, "sigmoid gate left (0,1): {v}");
            }
        }
    }
}
