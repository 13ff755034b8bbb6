//! Confusion-matrix metrics and multiclass ROC-AUC.
//!
//! Weighted averaging is the default: support-weighted recall equals
//! accuracy by algebra, which is the signature of how the reference
//! results were averaged. Zero denominators yield 0 and are flagged in
//! the report rather than producing NaN.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} true labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty confusion matrix")]
    EmptyMatrix,
    #[error("class {0} has only one side present; ROC undefined")]
    SingleClassOnly(usize),
}

/// C x C counts; rows are true classes, columns are predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, true_class: usize, pred_class: usize) -> u64 {
        self.counts[true_class][pred_class]
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn support(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn tp(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    pub fn fn_(&self, c: usize) -> u64 {
        self.support(c) - self.tp(c)
    }

    pub fn fp(&self, c: usize) -> u64 {
        (0..self.classes()).map(|r| self.counts[r][c]).sum::<u64>() - self.tp(c)
    }

    pub fn tn(&self, c: usize) -> u64 {
        self.n() - self.tp(c) - self.fp(c) - self.fn_(c)
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// Tally a confusion matrix. Empty inputs are allowed (all zeros).
pub fn confusion(
    true_labels: &[usize],
    predicted: &[usize],
    classes: usize,
) -> Result<ConfusionMatrix, MetricsError> {
    if true_labels.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            left: true_labels.len(),
            right: predicted.len(),
        });
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&t, &p) in true_labels.iter().zip(predicted) {
        if t >= classes {
            return Err(MetricsError::LabelOutOfRange { label: t, classes });
        }
        if p >= classes {
            return Err(MetricsError::LabelOutOfRange { label: p, classes });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Multiclass accuracy: trace / N.
pub fn accuracy(m: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let n = m.n();
    if n == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    Ok(m.trace() as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    Weighted,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class precision/recall/F1 with the zero-denominator-is-zero
/// convention.
pub fn per_class_metrics(m: &ConfusionMatrix) -> Result<Vec<ClassMetrics>, MetricsError> {
    if m.n() == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let mut out = Vec::with_capacity(m.classes());
    for c in 0..m.classes() {
        let tp = m.tp(c) as f64;
        let fp = m.fp(c) as f64;
        let fn_ = m.fn_(c) as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        out.push(ClassMetrics {
            class: c,
            precision,
            recall,
            f1,
            support: m.support(c),
        });
    }
    Ok(out)
}

/// Averaged (precision, recall, f1). Weighted averaging weights each
/// class by support/N; zero-support classes contribute zero weight.
pub fn precision_recall_f1(
    m: &ConfusionMatrix,
    averaging: Averaging,
) -> Result<(f64, f64, f64), MetricsError> {
    let per_class = per_class_metrics(m)?;
    let n = m.n() as f64;
    match averaging {
        Averaging::Weighted => {
            let mut p = 0.0;
            let mut r = 0.0;
            let mut f = 0.0;
            for cm in &per_class {
                let w = cm.support as f64;
                p += w * cm.precision;
                r += w * cm.recall;
                f += w * cm.f1;
            }
            Ok((p / n, r / n, f / n))
        }
        Averaging::Macro => {
            let k = per_class.len() as f64;
            let p = per_class.iter().map(|c| c.precision).sum::<f64>() / k;
            let r = per_class.iter().map(|c| c.recall).sum::<f64>() / k;
            let f = per_class.iter().map(|c| c.f1).sum::<f64>() / k;
            Ok((p, r, f))
        }
    }
}

/// ROC curve as (fpr, tpr) points from (0,0) to (1,1), both coordinates
/// non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| {
            let ((x1, y1), (x2, y2)) = (w[0], w[1]);
            x2 >= x1 && y2 >= y1
        })
    }
}

/// Binary ROC and trapezoidal AUC. Thresholds sweep the distinct scores
/// from high to low; tied scores move the curve diagonally, so the
/// trapezoid rule matches the pairwise statistic
/// P(score_pos > score_neg) + P(equal)/2.
pub fn roc_auc_binary(scores: &[f64], labels: &[bool]) -> Result<(RocCurve, f64), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 {
        return Err(MetricsError::SingleClassOnly(1));
    }
    if neg == 0 {
        return Err(MetricsError::SingleClassOnly(0));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores must not be NaN")
    });

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        // Consume the whole tie group before emitting a point.
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }

    let mut auc = 0.0;
    for w in points.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        auc += (x2 - x1) * (y1 + y2) / 2.0;
    }
    Ok((RocCurve { points }, auc))
}

fn ovr_auc_per_class(
    probabilities: &[Vec<f64>],
    labels: &[usize],
) -> Result<Vec<f64>, MetricsError> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: probabilities.len(),
            right: labels.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(MetricsError::EmptyMatrix);
    }
    let classes = probabilities[0].len();
    for &l in labels {
        if l >= classes {
            return Err(MetricsError::LabelOutOfRange { label: l, classes });
        }
    }
    let mut aucs = Vec::with_capacity(classes);
    for c in 0..classes {
        let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
        let binary: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        let (_, auc) = roc_auc_binary(&scores, &binary).map_err(|e| match e {
            MetricsError::SingleClassOnly(_) => MetricsError::SingleClassOnly(c),
            other => other,
        })?;
        aucs.push(auc);
    }
    Ok(aucs)
}

/// Unweighted mean of the per-class one-vs-rest AUCs.
pub fn roc_auc_macro_ovr(
    probabilities: &[Vec<f64>],
    labels: &[usize],
) -> Result<f64, MetricsError> {
    let aucs = ovr_auc_per_class(probabilities, labels)?;
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Support-weighted mean of the per-class one-vs-rest AUCs.
pub fn roc_auc_weighted_ovr(
    probabilities: &[Vec<f64>],
    labels: &[usize],
) -> Result<f64, MetricsError> {
    let aucs = ovr_auc_per_class(probabilities, labels)?;
    let n = labels.len() as f64;
    let mut out = 0.0;
    for (c, auc) in aucs.iter().enumerate() {
        let support = labels.iter().filter(|&&l| l == c).count() as f64;
        out += auc * support / n;
    }
    Ok(out)
}

/// Micro AUC: one binary problem over the flattened (sample, class)
/// indicator matrix.
pub fn roc_auc_micro(probabilities: &[Vec<f64>], labels: &[usize]) -> Result<f64, MetricsError> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: probabilities.len(),
            right: labels.len(),
        });
    }
    let mut scores = Vec::new();
    let mut flags = Vec::new();
    for (p, &l) in probabilities.iter().zip(labels) {
        for (c, &score) in p.iter().enumerate() {
            scores.push(score);
            flags.push(c == l);
        }
    }
    let (_, auc) = roc_auc_binary(&scores, &flags)?;
    Ok(auc)
}

/// The full metric bundle for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub auc_macro_ovr: f64,
    pub auc_weighted_ovr: f64,
    pub auc_micro: f64,
    pub per_class: Vec<ClassMetrics>,
    pub support_total: u64,
    pub flags: Vec<String>,
}

/// Evaluate predictions plus class probabilities against true labels.
pub fn evaluate_classifier(
    labels: &[usize],
    predictions: &[usize],
    probabilities: &[Vec<f64>],
) -> Result<EvalReport, MetricsError> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: labels.len(),
            right: probabilities.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(MetricsError::EmptyMatrix);
    }
    let classes = probabilities[0].len();
    let m = confusion(labels, predictions, classes)?;
    let acc = accuracy(&m)?;
    let (pw, rw, fw) = precision_recall_f1(&m, Averaging::Weighted)?;
    let (pm, rm, fm) = precision_recall_f1(&m, Averaging::Macro)?;
    let per_class = per_class_metrics(&m)?;

    let mut flags = Vec::new();
    for cm in &per_class {
        if cm.support == 0 {
            flags.push(format!(
                "class {} has zero support; its recall reported as 0",
                cm.class
            ));
        }
        if m.tp(cm.class) + m.fp(cm.class) == 0 {
            flags.push(format!(
                "class {} was never predicted; its precision reported as 0",
                cm.class
            ));
        }
    }

    Ok(EvalReport {
        accuracy: acc,
        precision_weighted: pw,
        recall_weighted: rw,
        f1_weighted: fw,
        precision_macro: pm,
        recall_macro: rm,
        f1_macro: fm,
        auc_macro_ovr: roc_auc_macro_ovr(probabilities, labels)?,
        auc_weighted_ovr: roc_auc_weighted_ovr(probabilities, labels)?,
        auc_micro: roc_auc_micro(probabilities, labels)?,
        per_class,
        support_total: m.n(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[u64]]) -> ConfusionMatrix {
        ConfusionMatrix {
            counts: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    /// Pairwise rank statistic: P(pos > neg) + P(pos == neg)/2. The
    /// independent oracle for AUC checks.
    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let pos: Vec<f64> = scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l)
            .map(|(&s, _)| s)
            .collect();
        let neg: Vec<f64> = scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| !l)
            .map(|(&s, _)| s)
            .collect();
        let mut wins = 0.0;
        for &p in &pos {
            for &n in &neg {
                if p > n {
                    wins += 1.0;
                } else if p == n {
                    wins += 0.5;
                }
            }
        }
        wins / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn confusion_examples() {
        let m = confusion(&[0, 1, 2], &[1, 1, 1], 3).unwrap();
        assert_eq!(m.count(0, 1), 1);
        assert_eq!(m.count(1, 1), 1);
        assert_eq!(m.count(2, 1), 1);
        assert_eq!(m.n(), 3);

        let perfect = confusion(&[0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap();
        assert_eq!(perfect.trace(), 4);

        let empty = confusion(&[], &[], 3).unwrap();
        assert_eq!(empty.n(), 0);
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(
            confusion(&[0, 1], &[0], 3),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion(&[5], &[0], 3),
            Err(MetricsError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn accuracy_binary_form() {
        // TP=50, TN=30, FP=10, FN=10 -> 0.8.
        let m = matrix(&[&[50, 10], &[10, 30]]);
        assert!((accuracy(&m).unwrap() - 0.8).abs() < 1e-15);

        let diag = matrix(&[&[3, 0], &[0, 7]]);
        assert_eq!(accuracy(&diag).unwrap(), 1.0);

        let zero_diag = matrix(&[&[0, 3], &[7, 0]]);
        assert_eq!(accuracy(&zero_diag).unwrap(), 0.0);

        let empty = matrix(&[&[0, 0], &[0, 0]]);
        assert!(matches!(accuracy(&empty), Err(MetricsError::EmptyMatrix)));
    }

    #[test]
    fn binary_precision_recall_f1() {
        // TP=50, FP=10, FN=10 for class 0 -> P = R = F1 = 5/6.
        let m = matrix(&[&[50, 10], &[10, 30]]);
        let per = per_class_metrics(&m).unwrap();
        assert!((per[0].precision - 5.0 / 6.0).abs() < 1e-15);
        assert!((per[0].recall - 5.0 / 6.0).abs() < 1e-15);
        assert!((per[0].f1 - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn zero_support_class_contributes_zero_weight() {
        let m = matrix(&[&[5, 0, 0], &[0, 5, 0], &[0, 0, 0]]);
        let per = per_class_metrics(&m).unwrap();
        assert_eq!(per[2].recall, 0.0);
        let (_, rw, _) = precision_recall_f1(&m, Averaging::Weighted).unwrap();
        assert_eq!(rw, 1.0); // the empty class is excluded by zero weight
    }

    #[test]
    fn weighted_recall_equals_accuracy() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mut counts = [[0u64; 3]; 3];
            for row in counts.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = rng.gen_range(0..60);
                }
            }
            let m = matrix(&[&counts[0], &counts[1], &counts[2]]);
            if m.n() == 0 {
                continue;
            }
            let acc = accuracy(&m).unwrap();
            let (_, rw, _) = precision_recall_f1(&m, Averaging::Weighted).unwrap();
            assert!(
                (rw - acc).abs() <= 8.0 * f64::EPSILON,
                "weighted recall {rw} != accuracy {acc}"
            );
        }
    }

    #[test]
    fn roc_auc_perfect_separation() {
        let scores = [0.9, 0.8, 0.7, 0.1];
        let labels = [true, true, false, false];
        let (curve, auc) = roc_auc_binary(&scores, &labels).unwrap();
        assert_eq!(auc, 1.0);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        assert!(curve.is_monotone());
    }

    #[test]
    fn roc_auc_all_ties_is_half() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let labels = [true, false, true, false];
        let (_, auc) = roc_auc_binary(&scores, &labels).unwrap();
        assert!((auc - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roc_auc_three_of_four_pairs() {
        // pos {0.8, 0.4}, neg {0.6, 0.2}: pairwise wins 3 of 4.
        let scores = [0.8, 0.4, 0.6, 0.2];
        let labels = [true, true, false, false];
        let (_, auc) = roc_auc_binary(&scores, &labels).unwrap();
        assert!((auc - 0.75).abs() < 1e-15);
        assert!((pairwise_auc(&scores, &labels) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn roc_auc_single_class_errors() {
        assert!(matches!(
            roc_auc_binary(&[0.1, 0.2], &[true, true]),
            Err(MetricsError::SingleClassOnly(_))
        ));
    }

    #[test]
    fn trapezoid_matches_pairwise_statistic() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(4..40);
            // Coarse grid forces plenty of ties.
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
            let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
                continue;
            }
            let (curve, auc) = roc_auc_binary(&scores, &labels).unwrap();
            assert!(curve.is_monotone());
            let oracle = pairwise_auc(&scores, &labels);
            assert!(
                (auc - oracle).abs() < 1e-12,
                "trapezoid {auc} vs pairwise {oracle}"
            );
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let scores: Vec<f64> = (0..30).map(|_| rng.gen::<f64>()).collect();
        let labels: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let (_, auc) = roc_auc_binary(&scores, &labels).unwrap();
        let squashed: Vec<f64> = scores.iter().map(|&s| (3.0 * s).exp()).collect();
        let (_, auc2) = roc_auc_binary(&squashed, &labels).unwrap();
        assert!((auc - auc2).abs() < 1e-12);
    }

    #[test]
    fn macro_ovr_examples() {
        // Perfect classifier.
        let probs = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let labels = vec![0, 1, 2];
        assert_eq!(roc_auc_macro_ovr(&probs, &labels).unwrap(), 1.0);

        // Probabilities independent of the label: 0.5 per class.
        let flat = vec![vec![0.4, 0.3, 0.3]; 6];
        let labels = vec![0, 1, 2, 0, 1, 2];
        assert!((roc_auc_macro_ovr(&flat, &labels).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn macro_ovr_matches_per_class_pairwise_mean() {
        let probs = vec![
            vec![0.7, 0.2, 0.1],
            vec![0.3, 0.5, 0.2],
            vec![0.2, 0.3, 0.5],
            vec![0.5, 0.4, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.3, 0.3, 0.4],
        ];
        let labels = vec![0, 1, 2, 0, 1, 2];
        let mut oracle = 0.0;
        for c in 0..3 {
            let scores: Vec<f64> = probs.iter().map(|p| p[c]).collect();
            let flags: Vec<bool> = labels.iter().map(|&l| l == c).collect();
            oracle += pairwise_auc(&scores, &flags);
        }
        oracle /= 3.0;
        let auc = roc_auc_macro_ovr(&probs, &labels).unwrap();
        assert!((auc - oracle).abs() < 1e-12);
    }

    #[test]
    fn macro_ovr_missing_class_errors() {
        let probs = vec![vec![0.5, 0.3, 0.2]; 4];
        let labels = vec![0, 1, 0, 1];
        assert!(matches!(
            roc_auc_macro_ovr(&probs, &labels),
            Err(MetricsError::SingleClassOnly(2))
        ));
    }

    #[test]
    fn eval_report_is_consistent() {
        let labels = vec![0, 0, 1, 1, 2, 2, 1, 0];
        let preds = vec![0, 1, 1, 1, 2, 0, 1, 0];
        let probs: Vec<Vec<f64>> = labels
            .iter()
            .zip(&preds)
            .map(|(_, &p)| {
                let mut v = vec![0.2, 0.2, 0.2];
                v[p] = 0.6;
                v
            })
            .collect();
        let report = evaluate_classifier(&labels, &preds, &probs).unwrap();
        assert!((report.recall_weighted - report.accuracy).abs() <= 8.0 * f64::EPSILON);
        for v in [
            report.accuracy,
            report.precision_weighted,
            report.f1_weighted,
            report.auc_macro_ovr,
            report.auc_weighted_ovr,
            report.auc_micro,
        ] {
            assert!((0.0..=1.0).contains(&v));
        }
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"auc_macro_ovr\""));
    }

    #[test]
    fn roc_curve_csv_format() {
        let curve = RocCurve {
            points: vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)],
        };
        let csv = curve.to_csv();
        assert!(csv.starts_with("fpr,tpr\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
