//! Seeded, auditable adversarial perturbation of clean text.
//!
//! Covers the character level (substitution, insertion, deletion,
//! leetspeak, whitespace/punctuation injection), the word level
//! (synonym swap), and the sentence level (benign-word append). Every
//! edit is recorded, and replaying the records on the original text
//! reproduces the perturbed output exactly.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledTweet;

/// Fixed leetspeak table. '!' -> 'i' is deliberate so "k ! l l" rounds
/// back to "kill" through the corrector.
pub const LEET_TABLE: [(char, char); 6] = [
    ('a', '@'),
    ('i', '!'),
    ('e', '3'),
    ('o', '0'),
    ('s', '$'),
    ('l', '1'),
];

/// Leet pairs whose obfuscated form is punctuation; used by PunctInject.
const PUNCT_LEET: [(char, char); 3] = [('a', '@'), ('i', '!'), ('s', '$')];

const INJECT_PUNCT: [char; 4] = ['!', '.', '*', '-'];

pub fn leet_forward(c: char) -> Option<char> {
    LEET_TABLE.iter().find(|(p, _)| *p == c).map(|(_, s)| *s)
}

pub fn leet_inverse(c: char) -> Option<char> {
    LEET_TABLE.iter().find(|(_, s)| *s == c).map(|(p, _)| *p)
}

/// Inverse leet table as a map, the default the corrector consumes.
pub fn inverse_leet_map() -> BTreeMap<char, char> {
    LEET_TABLE.iter().map(|&(p, s)| (s, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackKind {
    CharSub,
    CharInsert,
    CharDelete,
    WhitespaceInject,
    PunctInject,
    LeetSub,
    SynonymSwap,
    BenignAppend,
    Combined(Vec<AttackKind>),
}

impl AttackKind {
    pub fn is_character_level(&self) -> bool {
        matches!(
            self,
            AttackKind::CharSub
                | AttackKind::CharInsert
                | AttackKind::CharDelete
                | AttackKind::LeetSub
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Kinds applied, in order, to every selected token.
    pub kinds: Vec<AttackKind>,
    /// Probability that an eligible token is attacked.
    pub per_token_prob: f64,
    pub seed: u64,
    pub synonym_lexicon: BTreeMap<String, Vec<String>>,
    pub benign_words: Vec<String>,
    /// Budget of single-character edits (sub/insert/delete/leet) per token.
    pub max_edits_per_token: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            kinds: vec![AttackKind::CharSub],
            per_token_prob: 0.3,
            seed: 0,
            synonym_lexicon: BTreeMap::new(),
            benign_words: Vec::new(),
            max_edits_per_token: 2,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if !(0.0..=1.0).contains(&self.per_token_prob) {
            return Err(AttackError::InvalidConfig(format!(
                "per_token_prob must be in [0,1], got {}",
                self.per_token_prob
            )));
        }
        if self.max_edits_per_token < 1 {
            return Err(AttackError::InvalidConfig(
                "max_edits_per_token must be >= 1".into(),
            ));
        }
        if self.kinds.is_empty() {
            return Err(AttackError::InvalidConfig("kinds must be non-empty".into()));
        }
        for kind in &self.kinds {
            self.validate_kind(kind, false)?;
        }
        Ok(())
    }

    fn validate_kind(&self, kind: &AttackKind, nested: bool) -> Result<(), AttackError> {
        match kind {
            AttackKind::SynonymSwap if self.synonym_lexicon.is_empty() => {
                Err(AttackError::LexiconRequired)
            }
            AttackKind::BenignAppend if self.benign_words.is_empty() => {
                Err(AttackError::BenignListRequired)
            }
            AttackKind::Combined(inner) => {
                if nested {
                    return Err(AttackError::InvalidConfig(
                        "Combined must not nest Combined".into(),
                    ));
                }
                if inner.is_empty() {
                    return Err(AttackError::InvalidConfig(
                        "Combined carries an empty kind list".into(),
                    ));
                }
                for k in inner {
                    self.validate_kind(k, true)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// One applied edit. `original` is the token form the edit saw, so a
/// chain of records per token replays in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub token_index: usize,
    pub original: String,
    pub perturbed: String,
    pub kind: AttackKind,
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("SynonymSwap requires a non-empty synonym lexicon")]
    LexiconRequired,
    #[error("BenignAppend requires a non-empty benign word list")]
    BenignListRequired,
    #[error("word too short for this perturbation: `{word}` (needs >= {needs} chars)")]
    TooShort { word: String, needs: usize },
    #[error("invalid attack config: {0}")]
    InvalidConfig(String),
    #[error("replaying records failed at token {index}: expected `{expected}`, found `{found}`")]
    ReplayMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

const ALPHABET: &[u8; 26] = b"abcdefghijklmnopqrstuvwxyz";

/// Apply one character-level perturbation. Sub/Insert/Delete move the
/// word by edit distance exactly 1; LeetSub maps one character through
/// the fixed table (unchanged when nothing is mappable). Positions are
/// chosen uniformly by the caller's seeded generator.
pub fn char_perturb(
    word: &str,
    kind: &AttackKind,
    rng: &mut ChaCha8Rng,
) -> Result<String, AttackError> {
    let chars: Vec<char> = word.chars().collect();
    match kind {
        AttackKind::CharSub => {
            if chars.is_empty() {
                return Err(AttackError::TooShort {
                    word: word.into(),
                    needs: 1,
                });
            }
            let pos = rng.gen_range(0..chars.len());
            let candidates: Vec<char> = ALPHABET
                .iter()
                .map(|&b| b as char)
                .filter(|&c| c != chars[pos])
                .collect();
            let mut out = chars.clone();
            out[pos] = candidates[rng.gen_range(0..candidates.len())];
            Ok(out.into_iter().collect())
        }
        AttackKind::CharInsert => {
            let pos = rng.gen_range(0..=chars.len());
            let c = ALPHABET[rng.gen_range(0..ALPHABET.len())] as char;
            let mut out = chars.clone();
            out.insert(pos, c);
            Ok(out.into_iter().collect())
        }
        AttackKind::CharDelete => {
            if chars.len() < 2 {
                return Err(AttackError::TooShort {
                    word: word.into(),
                    needs: 2,
                });
            }
            let pos = rng.gen_range(0..chars.len());
            let mut out = chars.clone();
            out.remove(pos);
            Ok(out.into_iter().collect())
        }
        AttackKind::LeetSub => {
            let mappable: Vec<usize> = chars
                .iter()
                .enumerate()
                .filter(|(_, c)| leet_forward(**c).is_some())
                .map(|(i, _)| i)
                .collect();
            if mappable.is_empty() {
                return Ok(word.to_string());
            }
            let pos = mappable[rng.gen_range(0..mappable.len())];
            let mut out = chars.clone();
            out[pos] = leet_forward(out[pos]).unwrap();
            Ok(out.into_iter().collect())
        }
        other => Err(AttackError::InvalidConfig(format!(
            "char_perturb requires a character-level kind, got {other:?}"
        ))),
    }
}

/// Apply one kind to one token. Character-level kinds draw down the edit
/// budget; spacing/punctuation/word kinds do not. Returns None when the
/// kind leaves the token unchanged.
fn apply_kind(
    token: &str,
    kind: &AttackKind,
    cfg: &AttackConfig,
    rng: &mut ChaCha8Rng,
    edit_budget: &mut usize,
) -> Result<Option<String>, AttackError> {
    match kind {
        AttackKind::CharSub
        | AttackKind::CharInsert
        | AttackKind::CharDelete
        | AttackKind::LeetSub => {
            if *edit_budget == 0 {
                return Ok(None);
            }
            if matches!(kind, AttackKind::CharDelete) && token.chars().count() < 2 {
                return Ok(None);
            }
            let out = char_perturb(token, kind, rng)?;
            if out == token {
                return Ok(None);
            }
            *edit_budget -= 1;
            Ok(Some(out))
        }
        AttackKind::PunctInject => {
            let chars: Vec<char> = token.chars().collect();
            let mappable: Vec<usize> = chars
                .iter()
                .enumerate()
                .filter(|(_, c)| PUNCT_LEET.iter().any(|(p, _)| p == *c))
                .map(|(i, _)| i)
                .collect();
            let mut out = chars.clone();
            if mappable.is_empty() {
                if chars.len() < 2 {
                    return Ok(None);
                }
                let pos = rng.gen_range(1..chars.len());
                let p = INJECT_PUNCT[rng.gen_range(0..INJECT_PUNCT.len())];
                out.insert(pos, p);
            } else {
                let pos = mappable[rng.gen_range(0..mappable.len())];
                out[pos] = PUNCT_LEET
                    .iter()
                    .find(|(p, _)| *p == out[pos])
                    .map(|(_, s)| *s)
                    .unwrap();
            }
            Ok(Some(out.into_iter().collect()))
        }
        AttackKind::WhitespaceInject => {
            if token.chars().count() < 2 {
                return Ok(None);
            }
            let spaced: String = token
                .chars()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            Ok(Some(spaced))
        }
        AttackKind::SynonymSwap => {
            let key = token.to_lowercase();
            match cfg.synonym_lexicon.get(&key) {
                Some(syns) if !syns.is_empty() => {
                    let choice = &syns[rng.gen_range(0..syns.len())];
                    if choice == token {
                        Ok(None)
                    } else {
                        Ok(Some(choice.clone()))
                    }
                }
                _ => Ok(None),
            }
        }
        // Sentence-level; handled once per text in attack_text.
        AttackKind::BenignAppend => Ok(None),
        AttackKind::Combined(inner) => {
            let mut current = token.to_string();
            let mut changed = false;
            for k in inner {
                if let Some(next) = apply_kind(&current, k, cfg, rng, edit_budget)? {
                    current = next;
                    changed = true;
                }
            }
            Ok(if changed { Some(current) } else { None })
        }
    }
}

fn kinds_contain_benign_append(kinds: &[AttackKind]) -> bool {
    kinds.iter().any(|k| match k {
        AttackKind::BenignAppend => true,
        AttackKind::Combined(inner) => kinds_contain_benign_append(inner),
        _ => false,
    })
}

/// Tokens of length 1 and tokens with non-alphabetic characters are
/// never attacked (avoids degenerate empty tokens).
fn is_eligible(token: &str) -> bool {
    token.chars().count() >= 2 && token.chars().all(|c| c.is_alphabetic())
}

/// Perturb a text. Deterministic for fixed (text, config); every selected
/// token receives the configured kinds in order, capped at
/// `max_edits_per_token` character edits.
pub fn attack_text(
    text: &str,
    cfg: &AttackConfig,
) -> Result<(String, Vec<PerturbationRecord>), AttackError> {
    cfg.validate()?;
    if text.trim().is_empty() {
        return Ok((text.to_string(), Vec::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tokens: Vec<String> = text.split_whitespace().map(|t| t.to_string()).collect();
    let mut records = Vec::new();

    for idx in 0..tokens.len() {
        if !is_eligible(&tokens[idx]) {
            continue;
        }
        let gate: f64 = rng.gen();
        if gate >= cfg.per_token_prob {
            continue;
        }
        let mut budget = cfg.max_edits_per_token;
        for kind in &cfg.kinds {
            if matches!(kind, AttackKind::BenignAppend) {
                continue;
            }
            if let Some(next) = apply_kind(&tokens[idx], kind, cfg, &mut rng, &mut budget)? {
                records.push(PerturbationRecord {
                    token_index: idx,
                    original: tokens[idx].clone(),
                    perturbed: next.clone(),
                    kind: kind.clone(),
                });
                tokens[idx] = next;
            }
        }
    }

    if kinds_contain_benign_append(&cfg.kinds) {
        let word = cfg.benign_words[rng.gen_range(0..cfg.benign_words.len())].clone();
        records.push(PerturbationRecord {
            token_index: tokens.len(),
            original: String::new(),
            perturbed: word.clone(),
            kind: AttackKind::BenignAppend,
        });
        tokens.push(word);
    }

    Ok((tokens.join(" "), records))
}

/// Apply a record list to the original text; must reproduce the attack
/// output exactly.
pub fn replay_records(text: &str, records: &[PerturbationRecord]) -> Result<String, AttackError> {
    let mut tokens: Vec<String> = text.split_whitespace().map(|t| t.to_string()).collect();
    for rec in records {
        if rec.token_index == tokens.len() && rec.original.is_empty() {
            tokens.push(rec.perturbed.clone());
            continue;
        }
        let found = tokens.get(rec.token_index).cloned().unwrap_or_default();
        if found != rec.original {
            return Err(AttackError::ReplayMismatch {
                index: rec.token_index,
                expected: rec.original.clone(),
                found,
            });
        }
        tokens[rec.token_index] = rec.perturbed.clone();
    }
    Ok(tokens.join(" "))
}

/// Append exactly `count` benign words, drawn with replacement.
pub fn sentence_append(
    text: &str,
    benign_words: &[String],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<String, AttackError> {
    if count < 1 {
        return Err(AttackError::InvalidConfig("count must be >= 1".into()));
    }
    if benign_words.is_empty() {
        return Err(AttackError::BenignListRequired);
    }
    let mut out = text.to_string();
    for _ in 0..count {
        let w = &benign_words[rng.gen_range(0..benign_words.len())];
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    Ok(out)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Per-row seed: corpus seed XOR a stable mix of the row id, so a single
/// row replayed in isolation matches its corpus-run output.
pub fn derive_row_seed(seed: u64, row_id: u64) -> u64 {
    seed ^ splitmix64(row_id)
}

/// Attack every row of a corpus. Labels, ids, and row order are
/// preserved; only the text changes.
pub fn attack_corpus(
    data: &[LabeledTweet],
    cfg: &AttackConfig,
) -> Result<Vec<(LabeledTweet, Vec<PerturbationRecord>)>, AttackError> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(data.len());
    for row in data {
        let row_cfg = AttackConfig {
            seed: derive_row_seed(cfg.seed, row.id),
            ..cfg.clone()
        };
        let (text, records) = attack_text(&row.text, &row_cfg)?;
        let mut attacked = row.clone();
        attacked.text = text;
        out.push((attacked, records));
    }
    Ok(out)
}

/// Parse a synonym lexicon from line-delimited JSON `{word, synonyms}`.
pub fn parse_synonym_lexicon(content: &str) -> Result<BTreeMap<String, Vec<String>>, AttackError> {
    #[derive(Deserialize)]
    struct Row {
        word: String,
        synonyms: Vec<String>,
    }
    let mut map = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(line)
            .map_err(|e| AttackError::InvalidConfig(format!("bad lexicon line {}: {e}", i + 1)))?;
        map.insert(row.word.to_lowercase(), row.synonyms);
    }
    Ok(map)
}

/// Bundled demo lexicon (includes kill -> end) and benign-word list.
pub fn demo_synonym_lexicon() -> BTreeMap<String, Vec<String>> {
    parse_synonym_lexicon(include_str!("../data/synonyms_demo.jsonl"))
        .expect("bundled lexicon parses")
}

pub fn demo_benign_words() -> Vec<String> {
    include_str!("../data/benign_words.txt")
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}
