//! The end-to-end pipeline behind `run`, `compare`, and friends.
//!
//! Conditions reported per evaluation split:
//!   clean               no attack; correction per the split's flag
//!   attacked            attack, no correction
//!   attacked_corrected  attack, then correction
//!
//! Both the vocabulary and the correction dictionary are built from the
//! training split only, so no validation or test token can leak into
//! them.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adversary::{attack_text, derive_row_seed, AttackConfig};
use crate::corpus::{class_distribution, load_corpus, split_corpus, LabeledTweet};
use crate::corrector::{correct_text, CorrectionConfig, FrequencyDictionary};
use crate::metrics::{evaluate_classifier, EvalReport};
use crate::neural::train::curve_to_csv;
use crate::neural::{train, EpochStats, Model, Sample};
use crate::textprep::{
    build_vocabulary, builtin_stopwords, load_stopwords, normalize, remove_noise, remove_stopwords,
    tokenize, PreprocessConfig, Token, Vocabulary,
};

use super::config::{derive_seed, resolve, ExperimentConfig};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub class_counts: [u64; 3],
    pub class_fractions: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterCounts {
    pub trainable: usize,
    pub total: usize,
}

/// Machine-readable record of one full run. `canonical_json` leaves out
/// wall-clock time so identical configs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config_digest: String,
    pub seed: u64,
    pub arch: String,
    pub corpus: CorpusSummary,
    pub split_sizes: SplitSizes,
    pub vocab_size: usize,
    pub dictionary_size: usize,
    pub parameter_counts: ParameterCounts,
    pub best_epoch: usize,
    pub curve: Vec<EpochStats>,
    /// split name -> condition name -> metrics.
    pub evals: BTreeMap<String, BTreeMap<String, EvalReport>>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn canonical_json(&self) -> String {
        let mut stripped = self.clone();
        stripped.wall_clock_seconds = 0.0;
        serde_json::to_string_pretty(&stripped).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Resolved resources shared by the pipeline stages.
struct Stages {
    prep_keep_punct: PreprocessConfig,
    prep_full: PreprocessConfig,
    dict: FrequencyDictionary,
    correction: CorrectionConfig,
    attack: Option<AttackConfig>,
}

/// Noise removal with punctuation kept, plus lowercasing: the working
/// form that attack and correction operate on.
fn to_working(text: &str, stages: &Stages) -> String {
    let s = remove_noise(text, &stages.prep_keep_punct);
    if stages.prep_full.lowercase {
        s.to_lowercase()
    } else {
        s
    }
}

/// Finish the pipeline for one tweet: optional attack, optional
/// correction, punctuation strip, tokenize, stop words, normalize.
fn finish_tokens(
    working: &str,
    row_id: u64,
    attack: bool,
    correct: bool,
    stages: &Stages,
) -> Result<Vec<Token>, HarnessError> {
    let mut s = working.to_string();
    if attack {
        let base = stages
            .attack
            .as_ref()
            .expect("attack requested but not configured");
        let row_cfg = AttackConfig {
            seed: derive_row_seed(base.seed, row_id),
            ..base.clone()
        };
        s = attack_text(&s, &row_cfg)?.0;
    }
    if correct {
        s = correct_text(&s, &stages.dict, &stages.correction)?.corrected_text;
    }
    let s = remove_noise(&s, &stages.prep_full);
    let mut tokens = tokenize(&s);
    if stages.prep_full.remove_stopwords {
        tokens = remove_stopwords(&tokens, &stages.prep_full.stopword_list);
    }
    Ok(normalize(&tokens, &stages.prep_full))
}

fn encode_split(
    rows: &[LabeledTweet],
    attack: bool,
    correct: bool,
    stages: &Stages,
    vocab: &Vocabulary,
    seq_len: usize,
) -> Result<Vec<Sample>, HarnessError> {
    rows.iter()
        .map(|row| {
            let working = to_working(&row.text, stages);
            let tokens = finish_tokens(&working, row.id, attack, correct, stages)?;
            let (ids, len) = vocab.encode(&tokens, seq_len);
            Ok(Sample {
                ids,
                len,
                label: row.label.index(),
            })
        })
        .collect()
}

fn eval_condition(model: &Model, samples: &[Sample]) -> Result<EvalReport, HarnessError> {
    let outcome = model.evaluate(samples)?;
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    Ok(evaluate_classifier(
        &labels,
        &outcome.preds,
        &outcome.probs,
    )?)
}

/// Corpus, split, and resolved stage resources; shared by `run`,
/// `train`, and checkpoint evaluation.
pub(crate) struct Prepared {
    pub outcome: crate::corpus::LoadOutcome,
    pub split: crate::corpus::CorpusSplit,
    stages: Stages,
}

pub(crate) fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;

    let outcome = load_corpus(&cfg.corpus_path(), &cfg.corpus.schema)?;
    if outcome.tweets.is_empty() {
        return Err(HarnessError::Corpus(
            crate::corpus::CorpusError::EmptyCorpus,
        ));
    }

    let split = split_corpus(
        &outcome.tweets,
        &cfg.split.to_spec(derive_seed(cfg.seed, "split")),
    )?;

    let stopword_list = match &cfg.prep.stopwords_path {
        Some(p) => {
            let file = std::fs::File::open(resolve(&cfg.base_dir, p))?;
            load_stopwords(std::io::BufReader::new(file))?
        }
        None => builtin_stopwords(),
    };
    let prep_full = cfg.prep.to_preprocess_config(stopword_list);
    let prep_keep_punct = PreprocessConfig {
        remove_punct: false,
        ..prep_full.clone()
    };

    let mut dict = match &cfg.correction.wordfreq_path {
        Some(p) => {
            let content = std::fs::read_to_string(resolve(&cfg.base_dir, p))?;
            FrequencyDictionary::parse(&content)?
        }
        None => FrequencyDictionary::bundled(),
    };

    let attack = match &cfg.attack {
        Some(section) => {
            Some(section.to_attack_config(derive_seed(cfg.seed, "attack"), &cfg.base_dir)?)
        }
        None => None,
    };

    let mut stages = Stages {
        prep_keep_punct,
        prep_full,
        dict: FrequencyDictionary::new(),
        correction: cfg.correction.to_correction_config(),
        attack,
    };

    // Dictionary augmentation sees training text only, before any
    // attack or correction, restricted to purely alphabetic tokens.
    if cfg.correction.augment_from_train {
        for row in &split.train {
            let working = to_working(&row.text, &stages);
            for token in tokenize(&working) {
                if !token.is_empty() && token.chars().all(|c| c.is_alphabetic()) {
                    dict.add(&token);
                }
            }
        }
    }
    stages.dict = dict;

    Ok(Prepared {
        outcome,
        split,
        stages,
    })
}

/// Everything a run produces beyond the report: the best model, the
/// vocabulary, and the correction dictionary actually used.
pub struct RunArtifacts {
    pub report: RunReport,
    pub best_model: Model,
    pub vocab: Vocabulary,
    pub dictionary: FrequencyDictionary,
}

/// Execute load -> split -> preprocess -> optional attack ->
/// optional correction -> encode -> train -> evaluate. Identical configs (same digest) produce
/// identical reports apart from wall-clock time.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    Ok(run_experiment_full(cfg)?.report)
}

pub fn run_experiment_full(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let started = Instant::now();
    let Prepared {
        outcome,
        split,
        stages,
    } = prepare(cfg)?;
    let dist = class_distribution(&outcome.tweets);

    // Training pipeline and vocabulary (training split only).
    let attack_train = cfg
        .attack
        .as_ref()
        .map(|a| a.apply_to_train)
        .unwrap_or(false);
    let train_tokens: Vec<Vec<Token>> = split
        .train
        .iter()
        .map(|row| {
            let working = to_working(&row.text, &stages);
            finish_tokens(
                &working,
                row.id,
                attack_train,
                cfg.correction.enabled_train,
                &stages,
            )
        })
        .collect::<Result<_, _>>()?;
    let vocab = build_vocabulary(&train_tokens, cfg.prep.vocab_min_freq);

    let seq_len = cfg.model.seq_len;
    let train_samples: Vec<Sample> = split
        .train
        .iter()
        .zip(&train_tokens)
        .map(|(row, tokens)| {
            let (ids, len) = vocab.encode(tokens, seq_len);
            Sample {
                ids,
                len,
                label: row.label.index(),
            }
        })
        .collect();

    // Validation during training uses the clean condition.
    let val_clean = encode_split(
        &split.val,
        false,
        cfg.correction.enabled_val,
        &stages,
        &vocab,
        seq_len,
    )?;

    let model_cfg = cfg.model.to_model_config(vocab.len());
    let model = Model::new(model_cfg, derive_seed(cfg.seed, "init"))?;
    let parameter_counts = {
        let (trainable, total) = model.count_parameters();
        ParameterCounts { trainable, total }
    };

    let outcome_train = train(
        model,
        &train_samples,
        &val_clean,
        &cfg.train.to_train_config(derive_seed(cfg.seed, "shuffle")),
    )?;
    let best = &outcome_train.best;

    // Evaluate every requested condition on val and test.
    let mut evals: BTreeMap<String, BTreeMap<String, EvalReport>> = BTreeMap::new();
    for (split_name, rows, corrected_flag, attacked_flag) in [
        (
            "val",
            &split.val,
            cfg.correction.enabled_val,
            cfg.attack.as_ref().map(|a| a.apply_to_val).unwrap_or(false),
        ),
        (
            "test",
            &split.test,
            cfg.correction.enabled_test,
            cfg.attack
                .as_ref()
                .map(|a| a.apply_to_test)
                .unwrap_or(false),
        ),
    ] {
        let mut conditions = BTreeMap::new();
        let clean = encode_split(rows, false, corrected_flag, &stages, &vocab, seq_len)?;
        conditions.insert("clean".to_string(), eval_condition(best, &clean)?);
        if attacked_flag {
            let attacked = encode_split(rows, true, false, &stages, &vocab, seq_len)?;
            conditions.insert("attacked".to_string(), eval_condition(best, &attacked)?);
            let corrected = encode_split(rows, true, true, &stages, &vocab, seq_len)?;
            conditions.insert(
                "attacked_corrected".to_string(),
                eval_condition(best, &corrected)?,
            );
        }
        evals.insert(split_name.to_string(), conditions);
    }

    let report = RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: cfg.digest(),
        seed: cfg.seed,
        arch: cfg.model.arch.name().to_string(),
        corpus: CorpusSummary {
            accepted: outcome.tweets.len(),
            rejected: outcome.rejects.len(),
            class_counts: dist.counts,
            class_fractions: dist.fractions,
        },
        split_sizes: SplitSizes {
            train: split.train.len(),
            val: split.val.len(),
            test: split.test.len(),
        },
        vocab_size: vocab.len(),
        dictionary_size: stages.dict.len(),
        parameter_counts,
        best_epoch: outcome_train.best_epoch,
        curve: outcome_train.curve,
        evals,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(RunArtifacts {
        report,
        best_model: outcome_train.best,
        vocab,
        dictionary: stages.dict,
    })
}

/// Evaluate a saved checkpoint over the configured conditions without
/// retraining. The vocabulary hash recorded in the checkpoint must
/// match the vocabulary file.
pub fn evaluate_checkpoint(
    cfg: &ExperimentConfig,
    checkpoint_path: &Path,
    vocab_path: &Path,
) -> Result<BTreeMap<String, BTreeMap<String, EvalReport>>, HarnessError> {
    let Prepared { split, stages, .. } = prepare(cfg)?;
    let (model, recorded_hash) = crate::neural::load_checkpoint(checkpoint_path)?;
    let vocab = Vocabulary::from_jsonl(&std::fs::read_to_string(vocab_path)?).map_err(|e| {
        HarnessError::ConfigInvalid(format!("bad vocabulary file {}: {e}", vocab_path.display()))
    })?;
    if vocab.content_hash() != recorded_hash {
        return Err(HarnessError::ConfigInvalid(format!(
            "vocabulary {} does not match the checkpoint's recorded hash",
            vocab_path.display()
        )));
    }
    let seq_len = model.cfg.seq_len;

    let mut evals = BTreeMap::new();
    for (split_name, rows, corrected_flag, attacked_flag) in [
        (
            "val",
            &split.val,
            cfg.correction.enabled_val,
            cfg.attack.as_ref().map(|a| a.apply_to_val).unwrap_or(false),
        ),
        (
            "test",
            &split.test,
            cfg.correction.enabled_test,
            cfg.attack
                .as_ref()
                .map(|a| a.apply_to_test)
                .unwrap_or(false),
        ),
    ] {
        let mut conditions = BTreeMap::new();
        let clean = encode_split(rows, false, corrected_flag, &stages, &vocab, seq_len)?;
        conditions.insert("clean".to_string(), eval_condition(&model, &clean)?);
        if attacked_flag {
            let attacked = encode_split(rows, true, false, &stages, &vocab, seq_len)?;
            conditions.insert("attacked".to_string(), eval_condition(&model, &attacked)?);
            let corrected = encode_split(rows, true, true, &stages, &vocab, seq_len)?;
            conditions.insert(
                "attacked_corrected".to_string(),
                eval_condition(&model, &corrected)?,
            );
        }
        evals.insert(split_name.to_string(), conditions);
    }
    Ok(evals)
}

/// Attack every corpus row on its working form (noise removed,
/// lowercased); used by the standalone `attack` verb.
pub fn attack_prepared_corpus(
    cfg: &ExperimentConfig,
) -> Result<Vec<(LabeledTweet, Vec<crate::adversary::PerturbationRecord>)>, HarnessError> {
    let Prepared {
        outcome, stages, ..
    } = prepare(cfg)?;
    let attack = stages.attack.clone().ok_or_else(|| {
        HarnessError::ConfigInvalid("the attack verb needs an [attack] section".into())
    })?;
    let working: Vec<LabeledTweet> = outcome
        .tweets
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.text = to_working(&row.text, &stages);
            r
        })
        .collect();
    Ok(crate::adversary::attack_corpus(&working, &attack)?)
}

/// Correct every corpus row on its working form; used by the standalone
/// `correct` verb. The dictionary here is the base list only (no
/// training-split augmentation, since no split is implied).
pub fn correct_prepared_corpus(
    cfg: &ExperimentConfig,
) -> Result<Vec<(LabeledTweet, crate::corrector::CorrectionResult)>, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.correction.augment_from_train = false;
    let Prepared {
        outcome, stages, ..
    } = prepare(&cfg)?;
    outcome
        .tweets
        .iter()
        .map(|row| {
            let working = to_working(&row.text, &stages);
            let result = correct_text(&working, &stages.dict, &stages.correction)?;
            let mut r = row.clone();
            r.text = result.corrected_text.clone();
            Ok((r, result))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub method: String,
    pub accuracy: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("model     method              accuracy\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<9} {:<19} {:.4}\n",
                row.model, row.method, row.accuracy
            ));
        }
        out
    }
}

/// Headline condition: post-correction results when an attack is
/// configured, clean otherwise; always the test split.
fn headline(report: &RunReport) -> (&'static str, &EvalReport) {
    let test = &report.evals["test"];
    match test.get("attacked_corrected") {
        Some(r) => ("attacked_corrected", r),
        None => ("clean", &test["clean"]),
    }
}

/// Run several configs that differ only in the model section; one row
/// per model, sorted by accuracy descending (stable name tie-break).
pub fn compare_models(cfgs: &[ExperimentConfig]) -> Result<ComparisonTable, HarnessError> {
    if cfgs.is_empty() {
        return Err(HarnessError::ConfigInvalid(
            "compare needs at least one config".into(),
        ));
    }
    let strip = |c: &ExperimentConfig| {
        let mut c = c.clone();
        c.model = super::config::ModelSection::default();
        c.base_dir = std::path::PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    };
    let reference = strip(&cfgs[0]);
    if cfgs.iter().any(|c| strip(c) != reference) {
        return Err(HarnessError::IncompatibleConfigs);
    }

    let mut rows = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let report = run_experiment(cfg)?;
        let (method, eval) = headline(&report);
        rows.push(ComparisonRow {
            model: report.arch.clone(),
            method: method.to_string(),
            accuracy: eval.accuracy,
            report: eval.clone(),
        });
    }
    rows.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .unwrap()
            .then_with(|| a.model.cmp(&b.model))
    });
    Ok(ComparisonTable { rows })
}

/// Write the per-epoch curve CSV; returns the file path.
pub fn emit_curves(report: &RunReport, out_dir: &Path) -> Result<std::path::PathBuf, HarnessError> {
    if report.curve.is_empty() {
        return Err(HarnessError::MissingCurve);
    }
    std::fs::create_dir_all(out_dir)?;
    let name = format!("{}_curve.csv", report.arch.to_lowercase().replace('-', ""));
    let path = out_dir.join(name);
    std::fs::write(&path, curve_to_csv(&report.curve))?;
    Ok(path)
}
