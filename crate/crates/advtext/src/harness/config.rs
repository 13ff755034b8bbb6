//! Experiment configuration: one TOML file describing every stage, plus
//! a content digest that identifies the run.
//!
//! All randomness flows from the single root `seed` through labeled
//! derivation (split/attack/init/shuffle), so stages can be replayed
//! independently. Relative paths resolve against the config file's
//! directory; the digest hashes the configuration as written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{AttackConfig, AttackKind};
use crate::corpus::{CsvSchema, SplitSpec};
use crate::corrector::CorrectionConfig;
use crate::neural::{Arch, ModelConfig, TrainConfig};
use crate::textprep::PreprocessConfig;

use super::HarnessError;

fn fnv1a64(s: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stage seed derived from the root seed and a stage label.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    splitmix64(root ^ fnv1a64(label))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSection {
    pub path: String,
    pub schema: CsvSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSection {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub stratified: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_frac: 0.6,
            val_frac: 0.2,
            test_frac: 0.2,
            stratified: true,
        }
    }
}

impl SplitSection {
    pub fn to_spec(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            train_frac: self.train_frac,
            val_frac: self.val_frac,
            test_frac: self.test_frac,
            seed,
            stratified: self.stratified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepSection {
    pub remove_urls: bool,
    pub remove_mentions: bool,
    pub remove_hashtags: bool,
    pub remove_emoji: bool,
    pub remove_punct: bool,
    pub collapse_spaces: bool,
    pub remove_stopwords: bool,
    pub lowercase: bool,
    pub stem: bool,
    pub stopwords_path: Option<String>,
    pub vocab_min_freq: u64,
}

impl Default for PrepSection {
    fn default() -> Self {
        PrepSection {
            remove_urls: true,
            remove_mentions: true,
            remove_hashtags: true,
            remove_emoji: true,
            remove_punct: true,
            collapse_spaces: true,
            remove_stopwords: true,
            lowercase: true,
            stem: false,
            stopwords_path: None,
            vocab_min_freq: 2,
        }
    }
}

impl PrepSection {
    pub fn to_preprocess_config(
        &self,
        stopword_list: std::collections::BTreeSet<String>,
    ) -> PreprocessConfig {
        PreprocessConfig {
            remove_urls: self.remove_urls,
            remove_mentions: self.remove_mentions,
            remove_hashtags: self.remove_hashtags,
            remove_emoji: self.remove_emoji,
            remove_punct: self.remove_punct,
            collapse_spaces: self.collapse_spaces,
            remove_stopwords: self.remove_stopwords,
            lowercase: self.lowercase,
            stem: self.stem,
            stopword_list,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackSection {
    pub kinds: Vec<AttackKind>,
    pub per_token_prob: f64,
    pub max_edits_per_token: usize,
    /// Line-delimited JSON {word, synonyms}; falls back to the bundled
    /// demo lexicon when SynonymSwap is configured without a path.
    pub synonyms_path: Option<String>,
    /// One word per line; falls back to the bundled list.
    pub benign_words_path: Option<String>,
    pub apply_to_train: bool,
    pub apply_to_val: bool,
    pub apply_to_test: bool,
}

impl Default for AttackSection {
    fn default() -> Self {
        AttackSection {
            kinds: vec![AttackKind::CharSub],
            per_token_prob: 0.3,
            max_edits_per_token: 2,
            synonyms_path: None,
            benign_words_path: None,
            apply_to_train: false,
            apply_to_val: true,
            apply_to_test: true,
        }
    }
}

impl AttackSection {
    fn needs_lexicon(kinds: &[AttackKind]) -> bool {
        kinds.iter().any(|k| match k {
            AttackKind::SynonymSwap => true,
            AttackKind::Combined(inner) => Self::needs_lexicon(inner),
            _ => false,
        })
    }

    fn needs_benign(kinds: &[AttackKind]) -> bool {
        kinds.iter().any(|k| match k {
            AttackKind::BenignAppend => true,
            AttackKind::Combined(inner) => Self::needs_benign(inner),
            _ => false,
        })
    }

    pub fn to_attack_config(&self, seed: u64, base: &Path) -> Result<AttackConfig, HarnessError> {
        let synonym_lexicon = match &self.synonyms_path {
            Some(p) => {
                let content = std::fs::read_to_string(resolve(base, p))?;
                crate::adversary::parse_synonym_lexicon(&content)?
            }
            None if Self::needs_lexicon(&self.kinds) => crate::adversary::demo_synonym_lexicon(),
            None => BTreeMap::new(),
        };
        let benign_words = match &self.benign_words_path {
            Some(p) => std::fs::read_to_string(resolve(base, p))?
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
            None if Self::needs_benign(&self.kinds) => crate::adversary::demo_benign_words(),
            None => Vec::new(),
        };
        Ok(AttackConfig {
            kinds: self.kinds.clone(),
            per_token_prob: self.per_token_prob,
            seed,
            synonym_lexicon,
            benign_words,
            max_edits_per_token: self.max_edits_per_token,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionSection {
    pub enabled_train: bool,
    pub enabled_val: bool,
    pub enabled_test: bool,
    /// Add training-split tokens to the dictionary (never val/test).
    pub augment_from_train: bool,
    pub max_edit_distance: u8,
    pub merge_enabled: bool,
    pub max_merge_window: usize,
    pub min_candidate_freq: u64,
    /// "word count" per line; the bundled list is used when absent.
    pub wordfreq_path: Option<String>,
}

impl Default for CorrectionSection {
    fn default() -> Self {
        CorrectionSection {
            enabled_train: true,
            enabled_val: true,
            enabled_test: true,
            augment_from_train: true,
            max_edit_distance: 2,
            merge_enabled: true,
            max_merge_window: 5,
            min_candidate_freq: 1,
            wordfreq_path: None,
        }
    }
}

impl CorrectionSection {
    pub fn to_correction_config(&self) -> CorrectionConfig {
        CorrectionConfig {
            max_edit_distance: self.max_edit_distance,
            leet_map: crate::adversary::inverse_leet_map(),
            merge_enabled: self.merge_enabled,
            max_merge_window: self.max_merge_window,
            min_candidate_freq: self.min_candidate_freq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub arch: Arch,
    pub embed_dim: usize,
    pub hidden: usize,
    pub filters: usize,
    pub kernel: usize,
    pub seq_len: usize,
    pub embedding_trainable: bool,
    pub candidate_gated_output: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        ModelSection {
            arch: d.arch,
            embed_dim: d.embed_dim,
            hidden: d.hidden,
            filters: d.filters,
            kernel: d.kernel,
            seq_len: d.seq_len,
            embedding_trainable: d.embedding_trainable,
            candidate_gated_output: d.candidate_gated_output,
        }
    }
}

impl ModelSection {
    pub fn to_model_config(&self, vocab_size: usize) -> ModelConfig {
        ModelConfig {
            arch: self.arch,
            vocab_size,
            embed_dim: self.embed_dim,
            hidden: self.hidden,
            filters: self.filters,
            kernel: self.kernel,
            seq_len: self.seq_len,
            classes: 3,
            embedding_trainable: self.embedding_trainable,
            candidate_gated_output: self.candidate_gated_output,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub shuffle: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            epochs: d.epochs,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            beta1: d.beta1,
            beta2: d.beta2,
            epsilon: d.epsilon,
            shuffle: d.shuffle,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed,
            shuffle: self.shuffle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Root seed; every stochastic stage derives its own seed from it.
    pub seed: u64,
    pub corpus: CorpusSection,
    pub split: SplitSection,
    pub prep: PrepSection,
    pub attack: Option<AttackSection>,
    pub correction: CorrectionSection,
    pub model: ModelSection,
    pub train: TrainSection,
    /// Directory of the config file; relative paths resolve against it.
    /// Not part of the digest.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            corpus: CorpusSection::default(),
            split: SplitSection::default(),
            prep: PrepSection::default(),
            attack: None,
            correction: CorrectionSection::default(),
            model: ModelSection::default(),
            train: TrainSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

pub(crate) fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(content: &str, base_dir: &Path) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg: ExperimentConfig = toml::from_str(content)
            .map_err(|e| HarnessError::ConfigInvalid(format!("TOML parse error: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn from_toml_path(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::ConfigInvalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&content, base)
    }

    pub fn corpus_path(&self) -> PathBuf {
        resolve(&self.base_dir, &self.corpus.path)
    }

    /// Check fractions, dimensions, and that every referenced file
    /// exists.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.corpus.path.is_empty() {
            return Err(HarnessError::ConfigInvalid(
                "corpus.path is required".into(),
            ));
        }
        let must_exist = |label: &str, p: PathBuf| -> Result<(), HarnessError> {
            if p.is_file() {
                Ok(())
            } else {
                Err(HarnessError::ConfigInvalid(format!(
                    "{label} does not exist: {}",
                    p.display()
                )))
            }
        };
        must_exist("corpus.path", self.corpus_path())?;
        if let Some(p) = &self.prep.stopwords_path {
            must_exist("prep.stopwords_path", resolve(&self.base_dir, p))?;
        }
        if let Some(p) = &self.correction.wordfreq_path {
            must_exist("correction.wordfreq_path", resolve(&self.base_dir, p))?;
        }
        if let Some(attack) = &self.attack {
            if let Some(p) = &attack.synonyms_path {
                must_exist("attack.synonyms_path", resolve(&self.base_dir, p))?;
            }
            if let Some(p) = &attack.benign_words_path {
                must_exist("attack.benign_words_path", resolve(&self.base_dir, p))?;
            }
            if !(0.0..=1.0).contains(&attack.per_token_prob) {
                return Err(HarnessError::ConfigInvalid(
                    "attack.per_token_prob must be in [0,1]".into(),
                ));
            }
        }
        self.split
            .to_spec(0)
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        self.correction
            .to_correction_config()
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        self.model
            .to_model_config(2)
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        self.train
            .to_train_config(0)
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        if self.prep.vocab_min_freq < 1 {
            return Err(HarnessError::ConfigInvalid(
                "prep.vocab_min_freq must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form. Two configs with the same
    /// digest describe the same experiment.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
