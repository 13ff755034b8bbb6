//! Dictionary-based correction of adversarial text.
//!
//! Two de-obfuscation passes (inverse leetspeak, merge of spaced-out
//! fragments) followed by a frequency-ranked edit-distance spell check.
//! Candidate generation covers deletions, adjacent transpositions,
//! substitutions, and insertions over the lowercase alphabet; distance-1
//! candidates always beat distance-2 candidates regardless of frequency,
//! and frequency ties break lexicographically.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::inverse_leet_map;
use crate::textprep::{tokenize, Token};

/// Bundled English word-frequency list, "word count" per line.
pub const BUNDLED_WORDFREQ: &str = include_str!("../data/wordfreq_en.txt");

/// The corrector's known-word lexicon: lowercase word -> occurrence count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyDictionary {
    counts: HashMap<String, u64>,
    total: u64,
}

#[derive(Debug, Error)]
pub enum CorrectError {
    #[error("frequency dictionary is empty")]
    EmptyDictionary,
    #[error("invalid correction config: {0}")]
    InvalidConfig(String),
    #[error("bad frequency file line {line}: `{content}`")]
    BadFrequencyLine { line: usize, content: String },
    #[error("replaying steps failed at `{expected}` (found `{found}`)")]
    ReplayMismatch { expected: String, found: String },
}

impl FrequencyDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Count one occurrence of a token. Empty or whitespace-containing
    /// tokens are ignored; keys are lowercased.
    pub fn add(&mut self, token: &str) {
        let key = token.to_lowercase();
        if key.is_empty() || key.chars().any(char::is_whitespace) {
            return;
        }
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn add_with_count(&mut self, token: &str, count: u64) {
        let key = token.to_lowercase();
        if key.is_empty() || key.chars().any(char::is_whitespace) || count == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += count;
        self.total += count;
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn freq(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Parse a "word count" per-line frequency file.
    pub fn parse(content: &str) -> Result<Self, CorrectError> {
        let mut dict = FrequencyDictionary::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (word, count) = match (parts.next(), parts.next(), parts.next()) {
                (Some(w), Some(c), None) => match c.parse::<u64>() {
                    Ok(n) => (w, n),
                    Err(_) => {
                        return Err(CorrectError::BadFrequencyLine {
                            line: i + 1,
                            content: line.to_string(),
                        })
                    }
                },
                _ => {
                    return Err(CorrectError::BadFrequencyLine {
                        line: i + 1,
                        content: line.to_string(),
                    })
                }
            };
            dict.add_with_count(word, count);
        }
        Ok(dict)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_WORDFREQ).expect("bundled frequency list parses")
    }
}

/// Exact summed counts over token streams.
pub fn build_frequency_dictionary<S: AsRef<[Token]>>(sources: &[S]) -> FrequencyDictionary {
    let mut dict = FrequencyDictionary::new();
    for source in sources {
        for token in source.as_ref() {
            dict.add(token);
        }
    }
    dict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionConfig {
    /// 1 or 2.
    pub max_edit_distance: u8,
    /// Inverse leet table (obfuscated char -> letter).
    pub leet_map: BTreeMap<char, char>,
    pub merge_enabled: bool,
    /// Longest run of fragments the merge pass may glue together.
    pub max_merge_window: usize,
    pub min_candidate_freq: u64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            max_edit_distance: 2,
            leet_map: inverse_leet_map(),
            merge_enabled: true,
            max_merge_window: 5,
            min_candidate_freq: 1,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<(), CorrectError> {
        if !(1..=2).contains(&self.max_edit_distance) {
            return Err(CorrectError::InvalidConfig(format!(
                "max_edit_distance must be 1 or 2, got {}",
                self.max_edit_distance
            )));
        }
        if self.max_merge_window < 2 {
            return Err(CorrectError::InvalidConfig(
                "max_merge_window must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    Merge,
    Leet,
    Edit1,
    Edit2,
    Unchanged,
}

/// One span of the correction audit trail. `original` may cover several
/// whitespace-separated input tokens (merges); `replacement` is always a
/// single token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionStep {
    pub original: String,
    pub replacement: String,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub corrected_text: String,
    pub steps: Vec<CorrectionStep>,
}

const ALPHABET: [char; 26] = [
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's',
    't', 'u', 'v', 'w', 'x', 'y', 'z',
];

/// All strings one edit away: deletions, adjacent transpositions,
/// substitutions, insertions.
fn edits1(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let mut out = Vec::with_capacity(54 * n + 26);

    for i in 0..n {
        let mut v = chars.clone();
        v.remove(i);
        out.push(v.into_iter().collect());
    }
    for i in 0..n.saturating_sub(1) {
        if chars[i] != chars[i + 1] {
            let mut v = chars.clone();
            v.swap(i, i + 1);
            out.push(v.into_iter().collect());
        }
    }
    for i in 0..n {
        for &c in &ALPHABET {
            if c != chars[i] {
                let mut v = chars.clone();
                v[i] = c;
                out.push(v.into_iter().collect());
            }
        }
    }
    for i in 0..=n {
        for &c in &ALPHABET {
            let mut v = chars.clone();
            v.insert(i, c);
            out.push(v.into_iter().collect());
        }
    }
    out
}

/// Highest-frequency dictionary word among the candidates, ties broken
/// lexicographically. Selection is a total order, so iteration order of
/// the candidate list cannot influence the result.
fn select_best<'a, I: Iterator<Item = &'a str>>(
    candidates: I,
    dict: &FrequencyDictionary,
    min_freq: u64,
) -> Option<String> {
    let mut best: Option<(u64, String)> = None;
    for cand in candidates {
        if cand.is_empty() {
            continue;
        }
        let f = dict.freq(cand);
        if f < min_freq || f == 0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bf, bw)) => f > *bf || (f == *bf && cand < bw.as_str()),
        };
        if better {
            best = Some((f, cand.to_string()));
        }
    }
    best.map(|(_, w)| w)
}

fn best_edit1(word: &str, dict: &FrequencyDictionary, min_freq: u64) -> Option<String> {
    let cands = edits1(word);
    select_best(cands.iter().map(|s| s.as_str()), dict, min_freq)
}

fn best_edit2(word: &str, dict: &FrequencyDictionary, min_freq: u64) -> Option<String> {
    let mut best: Option<(u64, String)> = None;
    for e1 in edits1(word) {
        for e2 in edits1(&e1) {
            if e2.is_empty() {
                continue;
            }
            let f = dict.freq(&e2);
            if f < min_freq || f == 0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bf, bw)) => f > *bf || (f == *bf && e2 < *bw),
            };
            if better {
                best = Some((f, e2));
            }
        }
    }
    best.map(|(_, w)| w)
}

/// Spell-check one lowercase word. Dictionary hits come back unchanged;
/// otherwise the best distance-1 candidate wins, then distance-2, then
/// the input itself.
pub fn correct_word(
    word: &str,
    dict: &FrequencyDictionary,
    cfg: &CorrectionConfig,
) -> Result<(String, Rule), CorrectError> {
    if dict.is_empty() {
        return Err(CorrectError::EmptyDictionary);
    }
    cfg.validate()?;
    if word.is_empty() {
        return Ok((word.to_string(), Rule::Unchanged));
    }
    if dict.contains(word) {
        return Ok((word.to_string(), Rule::Unchanged));
    }
    if let Some(best) = best_edit1(word, dict, cfg.min_candidate_freq) {
        return Ok((best, Rule::Edit1));
    }
    if cfg.max_edit_distance >= 2 {
        if let Some(best) = best_edit2(word, dict, cfg.min_candidate_freq) {
            return Ok((best, Rule::Edit2));
        }
    }
    Ok((word.to_string(), Rule::Unchanged))
}

fn map_leet(token: &str, leet: &BTreeMap<char, char>) -> String {
    token
        .chars()
        .map(|c| leet.get(&c).copied().unwrap_or(c))
        .collect()
}

/// Alphabetic content of a token after inverse-leet mapping; what the
/// merge pass glues together.
fn fragment(token: &str, leet: &BTreeMap<char, char>) -> String {
    map_leet(token, leet)
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect()
}

/// De-obfuscate a token stream. The leet pass undoes in-word character
/// swaps; the merge pass re-joins words that were spelled out as
/// space-separated fragments ("k ! l l"). Returns the new stream plus a
/// complete coverage of steps (one per output token).
pub fn deobfuscate(
    tokens: &[Token],
    dict: &FrequencyDictionary,
    cfg: &CorrectionConfig,
) -> (Vec<Token>, Vec<CorrectionStep>) {
    // Leet pass: keep the mapped form only when it lands in the
    // dictionary directly or one edit away. Tokens with no alphabetic
    // content are left for the merge pass.
    let mut after_leet: Vec<(String, Option<CorrectionStep>)> = Vec::with_capacity(tokens.len());
    for token in tokens {
        let has_alpha = token.chars().any(|c| c.is_alphabetic());
        let mapped = map_leet(token, &cfg.leet_map);
        if !has_alpha || mapped == *token {
            after_leet.push((token.clone(), None));
            continue;
        }
        if dict.contains(&mapped) {
            after_leet.push((
                mapped.clone(),
                Some(CorrectionStep {
                    original: token.clone(),
                    replacement: mapped,
                    rule: Rule::Leet,
                }),
            ));
        } else if let Some(fixed) = best_edit1(&mapped, dict, cfg.min_candidate_freq) {
            after_leet.push((
                fixed.clone(),
                Some(CorrectionStep {
                    original: token.clone(),
                    replacement: fixed,
                    rule: Rule::Leet,
                }),
            ));
        } else {
            after_leet.push((token.clone(), None));
        }
    }

    // Merge pass: scan windows of 2..=max_merge_window tokens whose
    // fragments are at most 2 letters; accept the longest window whose
    // concatenation is a dictionary word of length >= 3.
    let mut out_tokens: Vec<Token> = Vec::with_capacity(after_leet.len());
    let mut steps: Vec<CorrectionStep> = Vec::with_capacity(after_leet.len());
    let n = after_leet.len();
    let mut i = 0;
    while i < n {
        let mut merged = None;
        if cfg.merge_enabled {
            let max_w = cfg.max_merge_window.min(n - i);
            let mut w = max_w;
            while w >= 2 {
                let window = &after_leet[i..i + w];
                let frags: Vec<String> = window
                    .iter()
                    .map(|(t, _)| fragment(t, &cfg.leet_map))
                    .collect();
                if frags.iter().all(|f| f.chars().count() <= 2) {
                    let joined: String = frags.concat();
                    if joined.chars().count() >= 3 && dict.contains(&joined) {
                        merged = Some((w, joined));
                        break;
                    }
                }
                w -= 1;
            }
        }
        match merged {
            Some((w, joined)) => {
                // The merge span covers the original (pre-leet) tokens.
                let span: Vec<String> = tokens[i..i + w].to_vec();
                steps.push(CorrectionStep {
                    original: span.join(" "),
                    replacement: joined.clone(),
                    rule: Rule::Merge,
                });
                out_tokens.push(joined);
                i += w;
            }
            None => {
                let (tok, leet_step) = after_leet[i].clone();
                steps.push(leet_step.unwrap_or_else(|| CorrectionStep {
                    original: tokens[i].clone(),
                    replacement: tok.clone(),
                    rule: Rule::Unchanged,
                }));
                out_tokens.push(tok);
                i += 1;
            }
        }
    }
    (out_tokens, steps)
}

/// Full correction pipeline: tokenize, de-obfuscate, spell-check each
/// token, re-join. Input is expected lowercase and noise-removed with
/// punctuation preserved. Deterministic; the step list replays to the
/// corrected text.
pub fn correct_text(
    text: &str,
    dict: &FrequencyDictionary,
    cfg: &CorrectionConfig,
) -> Result<CorrectionResult, CorrectError> {
    if dict.is_empty() {
        return Err(CorrectError::EmptyDictionary);
    }
    cfg.validate()?;

    let tokens = tokenize(text);
    let (deob_tokens, deob_steps) = deobfuscate(&tokens, dict, cfg);

    let mut final_tokens = Vec::with_capacity(deob_tokens.len());
    let mut steps = Vec::with_capacity(deob_tokens.len());
    for (token, deob_step) in deob_tokens.into_iter().zip(deob_steps) {
        let (corrected, rule) = if token.chars().any(|c| c.is_alphabetic()) {
            correct_word(&token, dict, cfg)?
        } else {
            (token.clone(), Rule::Unchanged)
        };
        let combined_rule = if deob_step.rule != Rule::Unchanged {
            debug_assert_eq!(
                rule,
                Rule::Unchanged,
                "deobfuscated tokens are in-dictionary"
            );
            deob_step.rule
        } else {
            rule
        };
        steps.push(CorrectionStep {
            original: deob_step.original,
            replacement: corrected.clone(),
            rule: combined_rule,
        });
        final_tokens.push(corrected);
    }

    Ok(CorrectionResult {
        corrected_text: final_tokens.join(" "),
        steps,
    })
}

/// Replay a step list over the original text; reproduces corrected_text.
pub fn replay_steps(text: &str, steps: &[CorrectionStep]) -> Result<String, CorrectError> {
    let tokens = tokenize(text);
    let mut cursor = 0;
    let mut out: Vec<String> = Vec::new();
    for step in steps {
        let span_len = step.original.split_whitespace().count().max(1);
        let span = tokens
            .get(cursor..cursor + span_len)
            .map(|s| s.join(" "))
            .unwrap_or_default();
        if span != step.original {
            return Err(CorrectError::ReplayMismatch {
                expected: step.original.clone(),
                found: span,
            });
        }
        out.push(step.replacement.clone());
        cursor += span_len;
    }
    if cursor != tokens.len() {
        return Err(CorrectError::ReplayMismatch {
            expected: "<end of text>".into(),
            found: tokens[cursor..].join(" "),
        });
    }
    Ok(out.join(" "))
}
