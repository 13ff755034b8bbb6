//! Loading, validation, and splitting of Davidson-style hate-speech CSVs.
//!
//! Each row carries crowd-annotation counts for three classes plus the
//! raw tweet. Rows that violate the annotation invariants are collected
//! into a rejects report rather than silently dropped, so corpus
//! statistics stay auditable.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Three-way class label of the Davidson annotation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Hate = 0,
    Offensive = 1,
    Neither = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Hate, Label::Offensive, Label::Neither];

    pub fn from_index(i: usize) -> Option<Label> {
        match i {
            0 => Some(Label::Hate),
            1 => Some(Label::Offensive),
            2 => Some(Label::Neither),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Hate => "hate",
            Label::Offensive => "offensive",
            Label::Neither => "neither",
        }
    }
}

/// One annotated tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTweet {
    pub id: u64,
    pub text: String,
    pub annot_total: u32,
    pub hate_count: u32,
    pub offensive_count: u32,
    pub neither_count: u32,
    pub label: Label,
}

/// Column-name mapping for the input CSV. Defaults match the published
/// Davidson file; `id` and `class` are optional (row ordinal / argmax
/// fallback).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub id: Option<String>,
    pub count: String,
    pub hate_speech: String,
    pub offensive_language: String,
    pub neither: String,
    pub class: Option<String>,
    pub tweet: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            id: None,
            count: "count".into(),
            hate_speech: "hate_speech".into(),
            offensive_language: "offensive_language".into(),
            neither: "neither".into(),
            class: Some("class".into()),
            tweet: "tweet".into(),
        }
    }
}

/// A row that failed validation, with the 1-based data line it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub tweets: Vec<LabeledTweet>,
    pub rejects: Vec<RejectedRow>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("input file has no data rows")]
    EmptyFile,
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid split spec: {0}")]
    InvalidSplit(String),
    #[error("class `{}` absent from data; stratified split impossible", .0.name())]
    ClassAbsent(Label),
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize, CorpusError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
}

fn parse_u32(record: &csv::StringRecord, idx: usize, name: &str) -> Result<u32, String> {
    let raw = record.get(idx).unwrap_or("");
    raw.trim()
        .parse::<u32>()
        .map_err(|_| format!("column `{name}` is not a non-negative integer: `{raw}`"))
}

/// Load and validate a corpus CSV. Structural problems (missing columns,
/// empty file) are hard errors; per-row invariant violations land in the
/// rejects report.
pub fn load_corpus(path: &Path, schema: &CsvSchema) -> Result<LoadOutcome, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();

    let col_count = find_column(&headers, &schema.count)?;
    let col_hate = find_column(&headers, &schema.hate_speech)?;
    let col_off = find_column(&headers, &schema.offensive_language)?;
    let col_neither = find_column(&headers, &schema.neither)?;
    let col_tweet = find_column(&headers, &schema.tweet)?;
    let col_class = match &schema.class {
        Some(name) => Some(find_column(&headers, name)?),
        None => None,
    };
    let col_id = match &schema.id {
        Some(name) => Some(find_column(&headers, name)?),
        None => None,
    };

    let mut tweets = Vec::new();
    let mut rejects = Vec::new();
    let mut row_ordinal: u64 = 0;

    for result in reader.records() {
        let record = result?;
        row_ordinal += 1;
        let line = row_ordinal; // 1-based data row

        let reject = |reason: String, rejects: &mut Vec<RejectedRow>| {
            rejects.push(RejectedRow { line, reason });
        };

        let annot_total = match parse_u32(&record, col_count, &schema.count) {
            Ok(v) => v,
            Err(e) => {
                reject(e, &mut rejects);
                continue;
            }
        };
        let hate = match parse_u32(&record, col_hate, &schema.hate_speech) {
            Ok(v) => v,
            Err(e) => {
                reject(e, &mut rejects);
                continue;
            }
        };
        let off = match parse_u32(&record, col_off, &schema.offensive_language) {
            Ok(v) => v,
            Err(e) => {
                reject(e, &mut rejects);
                continue;
            }
        };
        let neither = match parse_u32(&record, col_neither, &schema.neither) {
            Ok(v) => v,
            Err(e) => {
                reject(e, &mut rejects);
                continue;
            }
        };

        if hate + off + neither != annot_total {
            reject(
                format!(
                    "annotation counts {hate}+{off}+{neither} do not sum to total {annot_total}"
                ),
                &mut rejects,
            );
            continue;
        }

        let text = record.get(col_tweet).unwrap_or("").to_string();
        if text.trim().is_empty() {
            reject("tweet text is empty".into(), &mut rejects);
            continue;
        }

        let class_value = col_class.and_then(|c| {
            record
                .get(c)
                .and_then(|v| v.trim().parse::<usize>().ok())
                .and_then(Label::from_index)
        });

        let label = match resolve_label(hate, off, neither, class_value) {
            Ok(l) => l,
            Err(reason) => {
                reject(reason, &mut rejects);
                continue;
            }
        };

        let id = col_id
            .and_then(|c| record.get(c).and_then(|v| v.trim().parse::<u64>().ok()))
            .unwrap_or(row_ordinal - 1);

        tweets.push(LabeledTweet {
            id,
            text,
            annot_total,
            hate_count: hate,
            offensive_count: off,
            neither_count: neither,
            label,
        });
    }

    if row_ordinal == 0 {
        return Err(CorpusError::EmptyFile);
    }

    Ok(LoadOutcome { tweets, rejects })
}

/// Label = argmax of the three counts. Ties defer to the file's class
/// column; with no class column, the lowest class index among the tied
/// maxima wins. A class column that contradicts the counts is a reject.
fn resolve_label(
    hate: u32,
    off: u32,
    neither: u32,
    class_value: Option<Label>,
) -> Result<Label, String> {
    let counts = [hate, off, neither];
    let max = *counts.iter().max().unwrap();
    let tied: Vec<Label> = Label::ALL
        .iter()
        .copied()
        .filter(|l| counts[l.index()] == max)
        .collect();

    let label = if tied.len() == 1 {
        tied[0]
    } else {
        match class_value {
            Some(c) if tied.contains(&c) => c,
            Some(c) => {
                return Err(format!(
                    "class column `{}` does not resolve the annotation tie",
                    c.index()
                ))
            }
            None => tied[0],
        }
    };

    if let Some(c) = class_value {
        if tied.len() == 1 && c != label {
            return Err(format!(
                "class column `{}` disagrees with annotation argmax `{}`",
                c.index(),
                label.index()
            ));
        }
    }
    Ok(label)
}

/// Serialize a rejects report as line-delimited JSON `{line, reason}`.
pub fn write_rejects_report<W: Write>(rejects: &[RejectedRow], mut out: W) -> std::io::Result<()> {
    for r in rejects {
        let line = serde_json::to_string(r).expect("reject row serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Split fractions plus the seed and stratification flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.6,
            val_frac: 0.2,
            test_frac: 0.2,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, f) in [
            ("train_frac", self.train_frac),
            ("val_frac", self.val_frac),
            ("test_frac", self.test_frac),
        ] {
            if !f.is_finite() || f <= 0.0 {
                return Err(CorpusError::InvalidSplit(format!(
                    "{name} must be > 0, got {f}"
                )));
            }
        }
        let sum = self.train_frac + self.val_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidSplit(format!(
                "fractions sum to {sum}, expected 1.0"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<LabeledTweet>,
    pub val: Vec<LabeledTweet>,
    pub test: Vec<LabeledTweet>,
}

/// Part sizes: floor(n * frac) each, remainder assigned train-first.
fn part_sizes(n: usize, spec: &SplitSpec) -> (usize, usize, usize) {
    let mut sizes = [
        (n as f64 * spec.train_frac).floor() as usize,
        (n as f64 * spec.val_frac).floor() as usize,
        (n as f64 * spec.test_frac).floor() as usize,
    ];
    let mut rem = n - sizes.iter().sum::<usize>();
    let mut slot = 0;
    while rem > 0 {
        sizes[slot % 3] += 1;
        slot += 1;
        rem -= 1;
    }
    (sizes[0], sizes[1], sizes[2])
}

/// Stratified allocation as controlled matrix rounding: part sizes come
/// from the overall floor/train-first rule; each (class, part) cell is
/// the floor or ceiling of its proportional target, with exact row
/// (class) and column (part) sums. That keeps every class within one
/// item of its target in every part, which is exactly the
/// |frac_part(c) - frac_total(c)| <= 1/|part| stratification bound.
fn stratified_allocation(class_counts: [usize; 3], spec: &SplitSpec) -> [[usize; 3]; 3] {
    let n: usize = class_counts.iter().sum();
    let (pt, pv, ps) = part_sizes(n, spec);
    let parts = [pt, pv, ps];

    let mut cells = [[0usize; 3]; 3];
    let mut frac = [[0f64; 3]; 3];
    for c in 0..3 {
        for p in 0..3 {
            let target = class_counts[c] as f64 * parts[p] as f64 / n as f64;
            cells[c][p] = target.floor() as usize;
            frac[c][p] = target - target.floor();
        }
    }
    let row_need: Vec<usize> = (0..3)
        .map(|c| class_counts[c] - cells[c].iter().sum::<usize>())
        .collect();
    let col_need: Vec<usize> = (0..3)
        .map(|p| parts[p] - (0..3).map(|c| cells[c][p]).sum::<usize>())
        .collect();

    // Choose which cells round up: per row exactly row_need cells, per
    // column exactly col_need. The table is 3x3, so enumerate the <=27
    // row-pattern combinations and keep the best-scoring feasible one
    // (sum of fractional parts, first pattern on ties). A feasible
    // rounding always exists for consistent margins.
    let row_patterns: Vec<Vec<[bool; 3]>> = (0..3)
        .map(|c| {
            let mut pats = Vec::new();
            for mask in 0..8u8 {
                let pat = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
                if pat.iter().filter(|&&b| b).count() == row_need[c] {
                    pats.push(pat);
                }
            }
            pats
        })
        .collect();

    let mut best: Option<([[bool; 3]; 3], f64)> = None;
    for a in &row_patterns[0] {
        for b in &row_patterns[1] {
            for c in &row_patterns[2] {
                let choice = [*a, *b, *c];
                let ok = (0..3).all(|p| (0..3).filter(|&r| choice[r][p]).count() == col_need[p]);
                if !ok {
                    continue;
                }
                let score: f64 = (0..3)
                    .flat_map(|r| (0..3).filter(move |&p| choice[r][p]).map(move |p| (r, p)))
                    .map(|(r, p)| frac[r][p])
                    .sum();
                if best.as_ref().map(|(_, s)| score > *s).unwrap_or(true) {
                    best = Some((choice, score));
                }
            }
        }
    }
    let (choice, _) = best.expect("controlled rounding always has a feasible pattern");
    for c in 0..3 {
        for p in 0..3 {
            if choice[c][p] {
                cells[c][p] += 1;
            }
        }
    }
    cells
}

/// Deterministic, optionally stratified split. Equal (data, seed) yields
/// bitwise-equal partitions.
pub fn split_corpus(data: &[LabeledTweet], spec: &SplitSpec) -> Result<CorpusSplit, CorpusError> {
    spec.validate()?;
    if data.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut split = CorpusSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };

    let assign = |indices: &mut Vec<usize>,
                  sizes: (usize, usize, usize),
                  rng: &mut ChaCha8Rng,
                  split: &mut CorpusSplit| {
        indices.shuffle(rng);
        let (n_train, n_val, _) = sizes;
        for (pos, &i) in indices.iter().enumerate() {
            let item = data[i].clone();
            if pos < n_train {
                split.train.push(item);
            } else if pos < n_train + n_val {
                split.val.push(item);
            } else {
                split.test.push(item);
            }
        }
    };

    if spec.stratified {
        let mut class_counts = [0usize; 3];
        for t in data {
            class_counts[t.label.index()] += 1;
        }
        for label in Label::ALL {
            if class_counts[label.index()] == 0 {
                return Err(CorpusError::ClassAbsent(label));
            }
        }
        let allocation = stratified_allocation(class_counts, spec);
        for label in Label::ALL {
            let mut indices: Vec<usize> = data
                .iter()
                .enumerate()
                .filter(|(_, t)| t.label == label)
                .map(|(i, _)| i)
                .collect();
            let cells = allocation[label.index()];
            assign(
                &mut indices,
                (cells[0], cells[1], cells[2]),
                &mut rng,
                &mut split,
            );
        }
    } else {
        let mut indices: Vec<usize> = (0..data.len()).collect();
        let sizes = part_sizes(indices.len(), spec);
        assign(&mut indices, sizes, &mut rng, &mut split);
    }

    Ok(split)
}

/// Per-class counts and fractions. Empty input yields all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: [u64; 3],
    pub fractions: [f64; 3],
    pub total: u64,
}

impl ClassDistribution {
    pub fn majority(&self) -> Label {
        let mut best = Label::Hate;
        for l in Label::ALL {
            if self.counts[l.index()] > self.counts[best.index()] {
                best = l;
            }
        }
        best
    }
}

pub fn class_distribution(data: &[LabeledTweet]) -> ClassDistribution {
    let mut counts = [0u64; 3];
    for t in data {
        counts[t.label.index()] += 1;
    }
    let total: u64 = counts.iter().sum();
    let fractions = if total == 0 {
        [0.0; 3]
    } else {
        [
            counts[0] as f64 / total as f64,
            counts[1] as f64 / total as f64,
            counts[2] as f64 / total as f64,
        ]
    };
    ClassDistribution {
        counts,
        fractions,
        total,
    }
}

/// Per-class counts keyed by label, handy for stratification checks.
pub fn counts_by_label(data: &[LabeledTweet]) -> HashMap<Label, usize> {
    let mut m = HashMap::new();
    for t in data {
        *m.entry(t.label).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(id: u64, label: Label) -> LabeledTweet {
        LabeledTweet {
            id,
            text: format!("tweet {id}"),
            annot_total: 3,
            hate_count: if label == Label::Hate { 3 } else { 0 },
            offensive_count: if label == Label::Offensive { 3 } else { 0 },
            neither_count: if label == Label::Neither { 3 } else { 0 },
            label,
        }
    }

    fn write_csv(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "count,hate_speech,offensive_language,neither,class,tweet"
        )
        .unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn argmax_forces_offensive() {
        let f = write_csv(&["3,0,3,0,1,\"some text\""]);
        let out = load_corpus(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(out.tweets.len(), 1);
        assert_eq!(out.tweets[0].label, Label::Offensive);
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn tie_resolved_by_class_column() {
        let f = write_csv(&["3,1,1,1,2,\"some text\""]);
        let out = load_corpus(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(out.tweets[0].label, Label::Neither);
    }

    #[test]
    fn tie_without_class_column_takes_lowest_index() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "count,hate_speech,offensive_language,neither,tweet").unwrap();
        writeln!(f, "2,1,1,0,\"some text\"").unwrap();
        f.flush().unwrap();
        let schema = CsvSchema {
            class: None,
            ..CsvSchema::default()
        };
        let out = load_corpus(f.path(), &schema).unwrap();
        assert_eq!(out.tweets[0].label, Label::Hate);
    }

    #[test]
    fn counts_exceeding_total_are_rejected() {
        let f = write_csv(&["3,4,0,0,0,\"some text\""]);
        let out = load_corpus(f.path(), &CsvSchema::default()).unwrap();
        assert!(out.tweets.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].line, 1);
        assert!(out.rejects[0].reason.contains("do not sum"));
    }

    #[test]
    fn empty_text_rejected() {
        let f = write_csv(&["3,3,0,0,0,\"   \""]);
        let out = load_corpus(f.path(), &CsvSchema::default()).unwrap();
        assert!(out.tweets.is_empty());
        assert_eq!(out.rejects.len(), 1);
    }

    #[test]
    fn missing_column_is_hard_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "count,hate_speech,offensive_language,tweet").unwrap();
        writeln!(f, "3,3,0,\"x\"").unwrap();
        f.flush().unwrap();
        match load_corpus(f.path(), &CsvSchema::default()) {
            Err(CorpusError::MissingColumn(c)) => assert_eq!(c, "neither"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_hard_error() {
        let f = write_csv(&[]);
        match load_corpus(f.path(), &CsvSchema::default()) {
            Err(CorpusError::EmptyFile) => {}
            other => panic!("expected EmptyFile, got {other:?}"),
        }
    }

    #[test]
    fn rejects_report_is_jsonl() {
        let rejects = vec![RejectedRow {
            line: 7,
            reason: "bad".into(),
        }];
        let mut buf = Vec::new();
        write_rejects_report(&rejects, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(v["line"], 7);
    }

    #[test]
    fn split_sizes_floor_with_train_first_remainder() {
        let data: Vec<LabeledTweet> = (0..10).map(|i| tweet(i, Label::Offensive)).collect();
        let spec = SplitSpec {
            stratified: false,
            seed: 9,
            ..SplitSpec::default()
        };
        let split = split_corpus(&data, &spec).unwrap();
        assert_eq!(
            (split.train.len(), split.val.len(), split.test.len()),
            (6, 2, 2)
        );
    }

    #[test]
    fn split_is_deterministic() {
        let data: Vec<LabeledTweet> = (0..50)
            .map(|i| tweet(i, Label::from_index((i % 3) as usize).unwrap()))
            .collect();
        let spec = SplitSpec {
            seed: 42,
            ..SplitSpec::default()
        };
        let a = split_corpus(&data, &spec).unwrap();
        let b = split_corpus(&data, &spec).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn stratified_split_matches_hand_enumeration() {
        // 100 items, class mix 50/30/20, fractions 0.6/0.2/0.2:
        // per-class train takes floor(0.6 * n_c) = 30/18/12.
        let mut data = Vec::new();
        for i in 0..50 {
            data.push(tweet(i, Label::Hate));
        }
        for i in 50..80 {
            data.push(tweet(i, Label::Offensive));
        }
        for i in 80..100 {
            data.push(tweet(i, Label::Neither));
        }
        let spec = SplitSpec {
            seed: 7,
            ..SplitSpec::default()
        };
        let split = split_corpus(&data, &spec).unwrap();
        let by = counts_by_label(&split.train);
        assert_eq!(by[&Label::Hate], 30);
        assert_eq!(by[&Label::Offensive], 18);
        assert_eq!(by[&Label::Neither], 12);
        assert_eq!(split.train.len(), 60);
        assert_eq!(split.val.len(), 20);
        assert_eq!(split.test.len(), 20);
    }

    #[test]
    fn stratified_split_with_absent_class_fails() {
        let data: Vec<LabeledTweet> = (0..10).map(|i| tweet(i, Label::Offensive)).collect();
        let spec = SplitSpec::default();
        match split_corpus(&data, &spec) {
            Err(CorpusError::ClassAbsent(_)) => {}
            other => panic!("expected ClassAbsent, got {other:?}"),
        }
    }

    #[test]
    fn split_round_trips_ids() {
        let data: Vec<LabeledTweet> = (0..37)
            .map(|i| tweet(i, Label::from_index((i % 3) as usize).unwrap()))
            .collect();
        let spec = SplitSpec {
            seed: 5,
            ..SplitSpec::default()
        };
        let split = split_corpus(&data, &spec).unwrap();
        let mut ids: Vec<u64> = split
            .train
            .iter()
            .chain(&split.val)
            .chain(&split.test)
            .map(|t| t.id)
            .collect();
        ids.sort_unstable();
        let expected: Vec<u64> = (0..37).collect();
        assert_eq!(ids, expected);
    }

    #[test]
    fn invalid_fractions_rejected() {
        let data = vec![tweet(0, Label::Hate)];
        let spec = SplitSpec {
            train_frac: 0.5,
            val_frac: 0.2,
            test_frac: 0.2,
            ..SplitSpec::default()
        };
        assert!(matches!(
            split_corpus(&data, &spec),
            Err(CorpusError::InvalidSplit(_))
        ));
    }

    #[test]
    fn class_distribution_examples() {
        assert_eq!(class_distribution(&[]).counts, [0, 0, 0]);
        let data = vec![
            tweet(0, Label::Hate),
            tweet(1, Label::Hate),
            tweet(2, Label::Neither),
        ];
        let d = class_distribution(&data);
        assert_eq!(d.counts, [2, 0, 1]);
        assert!((d.fractions[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((d.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.majority(), Label::Hate);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_preserves_multiset_and_stratification(
                n_hate in 1usize..40,
                n_off in 1usize..40,
                n_neither in 1usize..40,
                seed in any::<u64>(),
            ) {
                let mut data = Vec::new();
                let mut id = 0u64;
                for _ in 0..n_hate { data.push(tweet(id, Label::Hate)); id += 1; }
                for _ in 0..n_off { data.push(tweet(id, Label::Offensive)); id += 1; }
                for _ in 0..n_neither { data.push(tweet(id, Label::Neither)); id += 1; }
                let spec = SplitSpec { seed, ..SplitSpec::default() };
                let split = split_corpus(&data, &spec).unwrap();

                // Round trip: union of parts equals the input multiset.
                let mut ids: Vec<u64> = split.train.iter()
                    .chain(&split.val)
                    .chain(&split.test)
                    .map(|t| t.id)
                    .collect();
                ids.sort_unstable();
                let expected: Vec<u64> = (0..data.len() as u64).collect();
                prop_assert_eq!(ids, expected);

                // Stratification: per-class fraction within 1/|part| of overall.
                let total = class_distribution(&data);
                for part in [&split.train, &split.val, &split.test] {
                    if part.is_empty() { continue; }
                    let d = class_distribution(part);
                    for c in 0..3 {
                        let diff = (d.fractions[c] - total.fractions[c]).abs();
                        prop_assert!(diff <= 1.0 / part.len() as f64 + 1e-12,
                            "class {} fraction off by {}", c, diff);
                    }
                }
            }
        }
    }
}
