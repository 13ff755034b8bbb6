//! Classifier assembly: embedding lookup, one cell (LSTM/GRU/1D-CNN),
//! dense layer to 3 classes, softmax, cross-entropy, and exact
//! gradients for every trainable parameter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cnn::{conv1d_backward, conv1d_forward_cached, Conv1dParams, ConvCache};
use super::gru::{gru_step_backward, gru_step_cached, GruParams, GruStepCache};
use super::linalg::{
    add_acc, all_finite, global_norm, mat_vec_t_acc, outer_acc, softmax, vec_mat_acc, Mat,
};
use super::lstm::{lstm_step_backward, lstm_step_cached, LstmParams, LstmState, LstmStepCache};
use super::{Arch, ModelConfig, NeuralError, Sample};

/// Gradients are clipped to this global L2 norm after backpropagation.
pub const GRAD_CLIP_NORM: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum CellParams {
    Lstm(LstmParams),
    Gru(GruParams),
    Cnn(Conv1dParams),
}

impl CellParams {
    fn slices(&self) -> Vec<&[f64]> {
        match self {
            CellParams::Lstm(p) => p.slices(),
            CellParams::Gru(p) => p.slices(),
            CellParams::Cnn(p) => p.slices(),
        }
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            CellParams::Lstm(p) => p.slices_mut(),
            CellParams::Gru(p) => p.slices_mut(),
            CellParams::Cnn(p) => p.slices_mut(),
        }
    }

    pub fn named_arrays(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        match self {
            CellParams::Lstm(p) => p.named_arrays(),
            CellParams::Gru(p) => p.named_arrays(),
            CellParams::Cnn(p) => p.named_arrays(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub cfg: ModelConfig,
    pub embedding: Mat,
    pub cell: CellParams,
    pub dense_w: Mat,
    pub dense_b: Vec<f64>,
}

/// Same shapes as the model parameters; accumulated by the backward
/// pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embedding: Mat,
    pub cell: CellParams,
    pub dense_w: Mat,
    pub dense_b: Vec<f64>,
    embedding_trainable: bool,
}

impl Gradients {
    fn zeros_like(model: &Model) -> Gradients {
        let cell = match &model.cell {
            CellParams::Lstm(p) => CellParams::Lstm(LstmParams::zeros(p.embed_dim(), p.hidden())),
            CellParams::Gru(p) => CellParams::Gru(GruParams::zeros(p.embed_dim(), p.hidden())),
            CellParams::Cnn(p) => {
                CellParams::Cnn(Conv1dParams::zeros(p.filters(), p.kernel, p.embed_dim))
            }
        };
        Gradients {
            embedding: Mat::zeros(model.embedding.rows(), model.embedding.cols()),
            cell,
            dense_w: Mat::zeros(model.dense_w.rows(), model.dense_w.cols()),
            dense_b: vec![0.0; model.dense_b.len()],
            embedding_trainable: model.cfg.embedding_trainable,
        }
    }

    /// Trainable slices in the same fixed order as
    /// [`Model::trainable_slices_mut`].
    pub fn trainable_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        if self.embedding_trainable {
            out.push(self.embedding.as_slice());
        }
        out.extend(self.cell.slices());
        out.push(self.dense_w.as_slice());
        out.push(&self.dense_b);
        out
    }

    pub fn global_norm(&self) -> f64 {
        global_norm(self.trainable_slices().into_iter())
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.trainable_slices_mut() {
            for v in s {
                *v *= factor;
            }
        }
    }

    fn trainable_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        if self.embedding_trainable {
            out.push(self.embedding.as_mut_slice());
        }
        out.extend(self.cell.slices_mut());
        out.push(self.dense_w.as_mut_slice());
        out.push(&mut self.dense_b);
        out
    }
}

enum CellTrace {
    Lstm(Vec<LstmStepCache>),
    Gru(Vec<GruStepCache>),
    Cnn { seq: Mat, cache: ConvCache },
}

struct ForwardTrace {
    cell: CellTrace,
    h_final: Vec<f64>,
    probs: Vec<f64>,
}

pub struct EvalOutcome {
    pub loss: f64,
    pub accuracy: f64,
    pub probs: Vec<Vec<f64>>,
    pub preds: Vec<usize>,
}

impl Model {
    /// Seeded initialization. Draw order is fixed (embedding, cell,
    /// dense) so a seed pins every weight.
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Model, NeuralError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut embedding = Mat::uniform_radius(
            cfg.vocab_size,
            cfg.embed_dim,
            1.0 / (cfg.embed_dim as f64).sqrt(),
            &mut rng,
        );
        // PAD embeds to zero so padded positions carry no signal.
        embedding.row_mut(crate::textprep::PAD_ID).fill(0.0);

        let cell = match cfg.arch {
            Arch::Lstm => CellParams::Lstm(LstmParams::init(cfg.embed_dim, cfg.hidden, &mut rng)),
            Arch::Gru => CellParams::Gru(GruParams::init(cfg.embed_dim, cfg.hidden, &mut rng)),
            Arch::Cnn1d => CellParams::Cnn(Conv1dParams::init(
                cfg.filters,
                cfg.kernel,
                cfg.embed_dim,
                &mut rng,
            )),
        };

        let dense_w = Mat::uniform_init(cfg.dense_in(), cfg.classes, &mut rng);
        let dense_b = vec![0.0; cfg.classes];

        Ok(Model {
            cfg,
            embedding,
            cell,
            dense_w,
            dense_b,
        })
    }

    fn check_ids(&self, ids: &[usize], len: usize) -> Result<(), NeuralError> {
        for &id in ids.iter().take(len.min(ids.len())) {
            if id >= self.cfg.vocab_size {
                return Err(NeuralError::IndexOutOfVocab {
                    id,
                    vocab: self.cfg.vocab_size,
                });
            }
        }
        Ok(())
    }

    fn forward_trace(&self, ids: &[usize], len: usize) -> Result<ForwardTrace, NeuralError> {
        self.check_ids(ids, len)?;
        let len = len.min(ids.len());

        let (h_final, cell_trace) = match &self.cell {
            CellParams::Lstm(p) => {
                let mut state = LstmState::zeros(self.cfg.hidden);
                let mut caches = Vec::with_capacity(len);
                for &id in &ids[..len] {
                    let (next, cache) = lstm_step_cached(
                        self.embedding.row(id),
                        &state,
                        p,
                        self.cfg.candidate_gated_output,
                    );
                    caches.push(cache);
                    state = next;
                }
                (state.h, CellTrace::Lstm(caches))
            }
            CellParams::Gru(p) => {
                let mut h = vec![0.0; self.cfg.hidden];
                let mut caches = Vec::with_capacity(len);
                for &id in &ids[..len] {
                    let (next, cache) = gru_step_cached(self.embedding.row(id), &h, p);
                    caches.push(cache);
                    h = next;
                }
                (h, CellTrace::Gru(caches))
            }
            CellParams::Cnn(p) => {
                // Convolve over max(len, kernel) rows; rows past the true
                // length are PAD. Output depends only on the true tokens,
                // so extra padding never changes it.
                let eff = len.max(p.kernel);
                let mut seq = Mat::zeros(eff, self.cfg.embed_dim);
                for t in 0..eff {
                    let id = if t < len {
                        ids[t]
                    } else {
                        crate::textprep::PAD_ID
                    };
                    seq.row_mut(t).copy_from_slice(self.embedding.row(id));
                }
                let (pooled, cache) = conv1d_forward_cached(&seq, p)?;
                (pooled, CellTrace::Cnn { seq, cache })
            }
        };

        let mut logits = self.dense_b.clone();
        vec_mat_acc(&h_final, &self.dense_w, &mut logits);
        let probs = softmax(&logits);
        if !all_finite([probs.as_slice()].into_iter()) {
            return Err(NeuralError::NonFinite("forward output".into()));
        }
        Ok(ForwardTrace {
            cell: cell_trace,
            h_final,
            probs,
        })
    }

    /// Class probabilities for one encoded sequence. PAD steps past the
    /// true length are ignored.
    pub fn forward(&self, ids: &[usize], len: usize) -> Result<Vec<f64>, NeuralError> {
        Ok(self.forward_trace(ids, len)?.probs)
    }

    /// Mean cross-entropy and exact gradients, without norm clipping.
    /// This is the raw object finite-difference checks compare against.
    pub fn loss_and_gradients_unclipped(
        &self,
        batch: &[Sample],
    ) -> Result<(f64, Gradients), NeuralError> {
        let (loss, grads, _) = self.loss_grads_counting(batch)?;
        Ok((loss, grads))
    }

    /// Mean cross-entropy and gradients, clipped to [`GRAD_CLIP_NORM`].
    pub fn loss_and_gradients(&self, batch: &[Sample]) -> Result<(f64, Gradients), NeuralError> {
        let (loss, mut grads, _) = self.loss_grads_counting(batch)?;
        let norm = grads.global_norm();
        if norm > GRAD_CLIP_NORM {
            grads.scale(GRAD_CLIP_NORM / norm);
        }
        Ok((loss, grads))
    }

    pub(crate) fn loss_grads_counting(
        &self,
        batch: &[Sample],
    ) -> Result<(f64, Gradients, usize), NeuralError> {
        if batch.is_empty() {
            return Err(NeuralError::EmptyBatch);
        }
        let b = batch.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut loss = 0.0;
        let mut correct = 0;

        for sample in batch {
            if sample.label >= self.cfg.classes {
                return Err(NeuralError::InvalidConfig(format!(
                    "label {} out of range",
                    sample.label
                )));
            }
            let trace = self.forward_trace(&sample.ids, sample.len)?;
            let p_true = trace.probs[sample.label];
            if p_true <= 0.0 || !p_true.is_finite() {
                return Err(NeuralError::NonFinite("cross-entropy".into()));
            }
            loss -= p_true.ln() / b;

            let pred = argmax(&trace.probs);
            if pred == sample.label {
                correct += 1;
            }

            // d(mean CE)/dlogits = (p - onehot) / B.
            let mut dlogits = trace.probs.clone();
            dlogits[sample.label] -= 1.0;
            for d in dlogits.iter_mut() {
                *d /= b;
            }

            outer_acc(&mut grads.dense_w, &trace.h_final, &dlogits);
            add_acc(&mut grads.dense_b, &dlogits);
            let mut dh = vec![0.0; trace.h_final.len()];
            mat_vec_t_acc(&self.dense_w, &dlogits, &mut dh);

            self.backward_cell(sample, trace, dh, &mut grads);
        }

        if !all_finite(grads.trainable_slices().into_iter()) {
            return Err(NeuralError::NonFinite("gradients".into()));
        }
        Ok((loss, grads, correct))
    }

    fn backward_cell(
        &self,
        sample: &Sample,
        trace: ForwardTrace,
        dh: Vec<f64>,
        grads: &mut Gradients,
    ) {
        let want_dx = self.cfg.embedding_trainable;
        let len = sample.len.min(sample.ids.len());
        match (&self.cell, trace.cell) {
            (CellParams::Lstm(p), CellTrace::Lstm(caches)) => {
                let g = match &mut grads.cell {
                    CellParams::Lstm(g) => g,
                    _ => unreachable!(),
                };
                let mut dh = dh;
                let mut ds = vec![0.0; self.cfg.hidden];
                for (t, cache) in caches.iter().enumerate().rev() {
                    let dx = lstm_step_backward(
                        cache,
                        p,
                        g,
                        &mut dh,
                        &mut ds,
                        self.cfg.candidate_gated_output,
                        want_dx,
                    );
                    if let Some(dx) = dx {
                        add_acc(grads.embedding.row_mut(sample.ids[t]), &dx);
                    }
                }
            }
            (CellParams::Gru(p), CellTrace::Gru(caches)) => {
                let g = match &mut grads.cell {
                    CellParams::Gru(g) => g,
                    _ => unreachable!(),
                };
                let mut dh = dh;
                for (t, cache) in caches.iter().enumerate().rev() {
                    let dx = gru_step_backward(cache, p, g, &mut dh, want_dx);
                    if let Some(dx) = dx {
                        add_acc(grads.embedding.row_mut(sample.ids[t]), &dx);
                    }
                }
            }
            (CellParams::Cnn(p), CellTrace::Cnn { seq, cache }) => {
                let g = match &mut grads.cell {
                    CellParams::Cnn(g) => g,
                    _ => unreachable!(),
                };
                let mut d_seq = want_dx.then(|| Mat::zeros(seq.rows(), seq.cols()));
                conv1d_backward(&seq, p, &cache, &dh, g, d_seq.as_mut());
                if let Some(d_seq) = d_seq {
                    for t in 0..seq.rows() {
                        let id = if t < len {
                            sample.ids[t]
                        } else {
                            crate::textprep::PAD_ID
                        };
                        add_acc(grads.embedding.row_mut(id), d_seq.row(t));
                    }
                }
            }
            _ => unreachable!("cell and trace kinds always match"),
        }
    }

    /// Loss, accuracy, probabilities, and argmax predictions over a
    /// dataset; read-only.
    pub fn evaluate(&self, data: &[Sample]) -> Result<EvalOutcome, NeuralError> {
        if data.is_empty() {
            return Err(NeuralError::EmptySplit("eval"));
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        let mut probs = Vec::with_capacity(data.len());
        let mut preds = Vec::with_capacity(data.len());
        for sample in data {
            let p = self.forward(&sample.ids, sample.len)?;
            loss -= p[sample.label].max(f64::MIN_POSITIVE).ln();
            let pred = argmax(&p);
            if pred == sample.label {
                correct += 1;
            }
            probs.push(p);
            preds.push(pred);
        }
        Ok(EvalOutcome {
            loss: loss / data.len() as f64,
            accuracy: correct as f64 / data.len() as f64,
            probs,
            preds,
        })
    }

    /// (trainable, total) parameter counts by enumerating the stored
    /// arrays.
    pub fn count_parameters(&self) -> (usize, usize) {
        let cell: usize = self.cell.slices().iter().map(|s| s.len()).sum();
        let dense = self.dense_w.as_slice().len() + self.dense_b.len();
        let embedding = self.embedding.as_slice().len();
        let mut trainable = cell + dense;
        if self.cfg.embedding_trainable {
            trainable += embedding;
        }
        (trainable, cell + dense + embedding)
    }

    /// Trainable parameter slices in a fixed, documented order:
    /// [embedding if trainable], cell arrays, dense weights, dense bias.
    pub fn trainable_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        if self.cfg.embedding_trainable {
            out.push(self.embedding.as_mut_slice());
        }
        out.extend(self.cell.slices_mut());
        out.push(self.dense_w.as_mut_slice());
        out.push(&mut self.dense_b);
        out
    }

    pub fn trainable_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        if self.cfg.embedding_trainable {
            out.push(self.embedding.as_slice());
        }
        out.extend(self.cell.slices());
        out.push(self.dense_w.as_slice());
        out.push(&self.dense_b);
        out
    }

    /// Every stored array with a stable name and shape, for checkpoints.
    pub fn named_arrays(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = vec![(
            "embedding".to_string(),
            vec![self.embedding.rows(), self.embedding.cols()],
            self.embedding.as_slice().to_vec(),
        )];
        for (name, shape, data) in self.cell.named_arrays() {
            out.push((name.to_string(), shape, data.to_vec()));
        }
        out.push((
            "dense.w".to_string(),
            vec![self.dense_w.rows(), self.dense_w.cols()],
            self.dense_w.as_slice().to_vec(),
        ));
        out.push((
            "dense.b".to_string(),
            vec![self.dense_b.len()],
            self.dense_b.clone(),
        ));
        out
    }
}

/// First index of the maximum; the deterministic tie-break.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(arch: Arch) -> ModelConfig {
        ModelConfig {
            arch,
            vocab_size: 12,
            embed_dim: 5,
            hidden: 4,
            filters: 3,
            kernel: 2,
            seq_len: 6,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn zero_dense_layer_gives_uniform_probabilities() {
        for arch in [Arch::Lstm, Arch::Gru, Arch::Cnn1d] {
            let mut model = Model::new(cfg(arch), 1).unwrap();
            model.dense_w = Mat::zeros(model.cfg.dense_in(), 3);
            model.dense_b = vec![0.0; 3];
            let p = model.forward(&[2, 3, 4, 0, 0, 0], 3).unwrap();
            for v in &p {
                assert!((v - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for arch in [Arch::Lstm, Arch::Gru, Arch::Cnn1d] {
            let model = Model::new(cfg(arch), 3).unwrap();
            for _ in 0..1000 {
                let len = rng.gen_range(0..=6);
                let ids: Vec<usize> = (0..6).map(|_| rng.gen_range(0..12)).collect();
                let p = model.forward(&ids, len).unwrap();
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(p.iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn pad_beyond_true_length_never_changes_output() {
        for arch in [Arch::Lstm, Arch::Gru, Arch::Cnn1d] {
            let model = Model::new(cfg(arch), 5).unwrap();
            let short = model.forward(&[2, 3, 4], 3).unwrap();
            let padded = model.forward(&[2, 3, 4, 0, 0, 0], 3).unwrap();
            for (a, b) in short.iter().zip(&padded) {
                assert_eq!(a, b, "{arch:?} output changed under extra padding");
            }
        }
    }

    #[test]
    fn out_of_vocab_id_is_an_error() {
        let model = Model::new(cfg(Arch::Lstm), 0).unwrap();
        assert!(matches!(
            model.forward(&[99], 1),
            Err(NeuralError::IndexOutOfVocab { id: 99, .. })
        ));
    }

    #[test]
    fn perfect_prediction_means_zero_loss_and_zero_gradients() {
        // Force p[label] = 1 by a huge bias on the true class.
        let mut model = Model::new(cfg(Arch::Lstm), 2).unwrap();
        model.dense_w = Mat::zeros(4, 3);
        model.dense_b = vec![800.0, 0.0, 0.0];
        let batch = vec![Sample {
            ids: vec![2, 3],
            len: 2,
            label: 0,
        }];
        let (loss, grads) = model.loss_and_gradients(&batch).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(grads.global_norm() < 1e-12);
    }

    #[test]
    fn uniform_prediction_loss_is_ln3() {
        let mut model = Model::new(cfg(Arch::Gru), 2).unwrap();
        model.dense_w = Mat::zeros(4, 3);
        model.dense_b = vec![0.0; 3];
        let batch = vec![Sample {
            ids: vec![2, 3],
            len: 2,
            label: 1,
        }];
        let (loss, _) = model.loss_and_gradients(&batch).unwrap();
        assert!((loss - 1.0986122886681098).abs() < 1e-12);
    }

    #[test]
    fn clipping_caps_the_global_norm() {
        // A saturated wrong answer produces a large gradient; amplify by
        // a huge dense weight so the raw norm exceeds the cap.
        let mut model = Model::new(cfg(Arch::Lstm), 4).unwrap();
        for w in model.dense_w.as_mut_slice() {
            *w *= 4000.0;
        }
        let batch = vec![
            Sample {
                ids: vec![2, 3, 4],
                len: 3,
                label: 0,
            },
            Sample {
                ids: vec![5, 6, 7],
                len: 3,
                label: 2,
            },
        ];
        let (_, raw) = model.loss_and_gradients_unclipped(&batch).unwrap();
        assert!(raw.global_norm() > GRAD_CLIP_NORM);
        let (_, clipped) = model.loss_and_gradients(&batch).unwrap();
        assert!((clipped.global_norm() - GRAD_CLIP_NORM).abs() < 1e-9);
    }

    #[test]
    fn parameter_counts_match_analytic_formula() {
        // E=8, H=4, C=3, V=10, frozen embedding:
        // LSTM cell 4(EH + H^2 + H) = 208, dense HC + C = 15 -> 223
        // trainable; embedding VE = 80 -> 303 total.
        let c = ModelConfig {
            arch: Arch::Lstm,
            vocab_size: 10,
            embed_dim: 8,
            hidden: 4,
            seq_len: 4,
            ..ModelConfig::default()
        };
        let model = Model::new(c.clone(), 0).unwrap();
        assert_eq!(model.count_parameters(), (223, 303));

        let trainable_emb = Model::new(
            ModelConfig {
                embedding_trainable: true,
                ..c
            },
            0,
        )
        .unwrap();
        assert_eq!(trainable_emb.count_parameters(), (223 + 80, 303));

        // GRU: 3(EH + H^2 + H) + dense.
        let g = Model::new(
            ModelConfig {
                arch: Arch::Gru,
                vocab_size: 10,
                embed_dim: 8,
                hidden: 4,
                seq_len: 4,
                ..ModelConfig::default()
            },
            0,
        )
        .unwrap();
        assert_eq!(
            g.count_parameters(),
            (3 * (32 + 16 + 4) + 15, 156 + 15 + 80)
        );

        // CNN: F·k·E + F + F·C + C.
        let n = Model::new(
            ModelConfig {
                arch: Arch::Cnn1d,
                vocab_size: 10,
                embed_dim: 8,
                filters: 6,
                kernel: 3,
                seq_len: 4,
                ..ModelConfig::default()
            },
            0,
        )
        .unwrap();
        assert_eq!(n.count_parameters(), (6 * 24 + 6 + 18 + 3, 171 + 80));
    }

    #[test]
    fn init_is_deterministic() {
        let a = Model::new(cfg(Arch::Lstm), 42).unwrap();
        let b = Model::new(cfg(Arch::Lstm), 42).unwrap();
        for (x, y) in a.trainable_slices().iter().zip(b.trainable_slices().iter()) {
            assert_eq!(x, y);
        }
        let c = Model::new(cfg(Arch::Lstm), 43).unwrap();
        assert_ne!(
            a.trainable_slices()[0],
            c.trainable_slices()[0],
            "different seeds must differ"
        );
    }
}
