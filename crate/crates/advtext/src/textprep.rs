//! Four-stage text preprocessing (noise removal, stop-word removal,
//! tokenization, normalization) and vocabulary construction.
//!
//! On the adversarial evaluation path, punctuation removal is bypassed
//! until after the correction stage: the corrector needs obfuscating
//! punctuation ("k ! l l") intact to undo it.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// A whitespace-free unit of text. After normalization a token contains
/// no uppercase letters.
pub type Token = String;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Bundled stop-word list (~150 common English function words), one per
/// line. A custom list can be loaded with [`load_stopwords`].
pub const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub remove_urls: bool,
    pub remove_mentions: bool,
    pub remove_hashtags: bool,
    pub remove_emoji: bool,
    pub remove_punct: bool,
    pub collapse_spaces: bool,
    pub remove_stopwords: bool,
    pub lowercase: bool,
    pub stem: bool,
    pub stopword_list: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            remove_urls: true,
            remove_mentions: true,
            remove_hashtags: true,
            remove_emoji: true,
            remove_punct: true,
            collapse_spaces: true,
            remove_stopwords: true,
            lowercase: true,
            stem: false,
            stopword_list: builtin_stopwords(),
        }
    }
}

pub fn builtin_stopwords() -> BTreeSet<String> {
    parse_stopwords(BUILTIN_STOPWORDS)
}

fn parse_stopwords(content: &str) -> BTreeSet<String> {
    content
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn load_stopwords<R: BufRead>(reader: R) -> std::io::Result<BTreeSet<String>> {
    let mut set = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim().to_lowercase();
        if !w.is_empty() {
            set.insert(w);
        }
    }
    Ok(set)
}

// URL = scheme-prefixed or "www."-prefixed maximal non-space run;
// mention = "@"+word; hashtag = "#"+word. Twitter conventions.
static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").unwrap());
static MENTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HASHTAG_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\w+").unwrap());

/// Emoji here means anything outside the basic multilingual plane plus
/// the common symbol blocks and joiners used to compose emoji.
fn is_emoji_char(c: char) -> bool {
    let cp = c as u32;
    cp > 0xFFFF
        || (0x2600..=0x27BF).contains(&cp)
        || (0x2B00..=0x2BFF).contains(&cp)
        || cp == 0x200D
        || (0xFE0E..=0xFE0F).contains(&cp)
}

fn is_removable_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '…' | '“' | '”' | '‘' | '’' | '—' | '–' | '«' | '»')
}

/// Stage 1: strip URLs, mentions, hashtags, emoji, and punctuation per
/// the config, then collapse whitespace runs and trim. Idempotent.
pub fn remove_noise(text: &str, cfg: &PreprocessConfig) -> String {
    let mut s = text.to_string();
    if cfg.remove_urls {
        s = URL_RE.replace_all(&s, " ").into_owned();
    }
    if cfg.remove_mentions {
        s = MENTION_RE.replace_all(&s, " ").into_owned();
    }
    if cfg.remove_hashtags {
        s = HASHTAG_RE.replace_all(&s, " ").into_owned();
    }
    if cfg.remove_emoji {
        s = s.chars().filter(|&c| !is_emoji_char(c)).collect();
    }
    if cfg.remove_punct {
        // Apostrophes are dropped so contractions stay one token; any
        // other punctuation becomes a space.
        s = s
            .chars()
            .filter_map(|c| {
                if c == '\'' || c == '’' {
                    None
                } else if is_removable_punct(c) {
                    Some(' ')
                } else {
                    Some(c)
                }
            })
            .collect();
    }
    if cfg.collapse_spaces {
        s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    s.trim().to_string()
}

/// Stage 3: whitespace tokenization. Joining the tokens with single
/// spaces reproduces the input up to collapsed whitespace.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().map(|t| t.to_string()).collect()
}

/// Stage 2: drop tokens whose lowercase form is a stop word. Relative
/// order of survivors is preserved.
pub fn remove_stopwords(tokens: &[Token], stopwords: &BTreeSet<String>) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(&t.to_lowercase()))
        .cloned()
        .collect()
}

/// Strip trailing "ing", "ed", "s" repeatedly while the remaining stem
/// keeps at least 3 letters. Repeated stripping makes normalize
/// idempotent ("singings" -> "sing" in one call).
fn stem_token(token: &str) -> String {
    let mut current = token.to_string();
    loop {
        let mut changed = false;
        for suffix in ["ing", "ed", "s"] {
            if let Some(stem) = current.strip_suffix(suffix) {
                if stem.chars().count() >= 3 {
                    current = stem.to_string();
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return current;
        }
    }
}

/// Stage 4: lowercase (and optionally stem) every token.
pub fn normalize(tokens: &[Token], cfg: &PreprocessConfig) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut s = if cfg.lowercase {
                t.to_lowercase()
            } else {
                t.clone()
            };
            if cfg.stem {
                s = stem_token(&s);
            }
            s
        })
        .collect()
}

/// Token/index mapping with frequency counts. Id 0 is PAD, id 1 is UNK;
/// remaining ids are assigned by descending frequency with lexicographic
/// tie-breaks, so two builds over the same corpus are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    freq: HashMap<String, u64>,
    min_freq: u64,
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad vocabulary line {line}: {reason}")]
    BadLine { line: usize, reason: String },
}

#[derive(Serialize, Deserialize)]
struct VocabRow {
    token: String,
    id: usize,
    freq: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        // PAD and UNK are always present.
        false
    }

    pub fn min_freq(&self) -> u64 {
        self.min_freq
    }

    pub fn id_of(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(|s| s.as_str())
    }

    pub fn freq_of(&self, token: &str) -> u64 {
        self.freq.get(token).copied().unwrap_or(0)
    }

    /// Right-pad with PAD to `seq_len`, truncate beyond it, and report
    /// the true (pre-padding) length.
    pub fn encode(&self, tokens: &[Token], seq_len: usize) -> (Vec<usize>, usize) {
        assert!(seq_len >= 1, "seq_len must be >= 1");
        let true_len = tokens.len().min(seq_len);
        let mut ids = Vec::with_capacity(seq_len);
        for t in tokens.iter().take(true_len) {
            ids.push(self.id_of(t));
        }
        ids.resize(seq_len, PAD_ID);
        (ids, true_len)
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<&str> {
        ids.iter()
            .map(|&i| self.token_of(i).unwrap_or(UNK_TOKEN))
            .collect()
    }

    /// Line-delimited JSON `{token, id, freq}`, rows ordered by id.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, token) in self.id_to_token.iter().enumerate() {
            let row = VocabRow {
                token: token.clone(),
                id,
                freq: self.freq_of(token),
            };
            out.push_str(&serde_json::to_string(&row).expect("vocab row serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_jsonl().as_bytes())
    }

    pub fn from_jsonl(content: &str) -> Result<Vocabulary, VocabError> {
        let mut rows: Vec<VocabRow> = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: VocabRow = serde_json::from_str(line).map_err(|e| VocabError::BadLine {
                line: i + 1,
                reason: e.to_string(),
            })?;
            rows.push(row);
        }
        rows.sort_by_key(|r| r.id);
        let mut id_to_token = Vec::with_capacity(rows.len());
        let mut token_to_id = HashMap::new();
        let mut freq = HashMap::new();
        for (expect, row) in rows.into_iter().enumerate() {
            if row.id != expect {
                return Err(VocabError::BadLine {
                    line: expect + 1,
                    reason: format!("ids not contiguous: expected {expect}, got {}", row.id),
                });
            }
            token_to_id.insert(row.token.clone(), row.id);
            freq.insert(row.token.clone(), row.freq);
            id_to_token.push(row.token);
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token,
            freq,
            min_freq: 1,
        })
    }

    /// SHA-256 of the canonical JSONL form; recorded in checkpoints so a
    /// model can refuse a mismatched vocabulary.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_jsonl().as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Count tokens across the corpus, keep those with freq >= min_freq, and
/// assign ids 2.. by descending frequency (ties lexicographic).
pub fn build_vocabulary(corpus: &[Vec<Token>], min_freq: u64) -> Vocabulary {
    assert!(min_freq >= 1, "min_freq must be >= 1");
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in corpus {
        for tok in doc {
            if tok == PAD_TOKEN || tok == UNK_TOKEN {
                continue;
            }
            *counts.entry(tok.clone()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_freq).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut id_to_token = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    let mut token_to_id = HashMap::new();
    token_to_id.insert(PAD_TOKEN.to_string(), PAD_ID);
    token_to_id.insert(UNK_TOKEN.to_string(), UNK_ID);
    let mut freq = HashMap::new();
    for (token, count) in kept {
        token_to_id.insert(token.clone(), id_to_token.len());
        freq.insert(token.clone(), count);
        id_to_token.push(token);
    }
    Vocabulary {
        token_to_id,
        id_to_token,
        freq,
        min_freq,
    }
}
