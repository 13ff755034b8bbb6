//! Synthetic Davidson-style corpora for tests and demos.
//!
//! The generator plants an order-sensitive class signal: Hate tweets
//! carry an insult marker before a target marker, Offensive tweets the
//! reverse order, Neither tweets no markers at all. Marker pairs are
//! separated by at least two fillers, so bag-of-ngram features cannot
//! tell Hate from Offensive while a recurrent model can. Every word is
//! drawn from the bundled frequency dictionary, which keeps clean
//! fixtures inside the corrector's lexicon.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, LabeledTweet};
use crate::neural::Sample;

pub const INSULT_MARKERS: [&str; 6] = [
    "vermin", "maggot", "parasite", "garbage", "rubbish", "monster",
];
pub const TARGET_MARKERS: [&str; 6] = [
    "people",
    "children",
    "everyone",
    "neighbors",
    "strangers",
    "students",
];

pub const FILLERS: [&str; 30] = [
    "today", "morning", "coffee", "weather", "music", "game", "movie", "dinner", "garden",
    "street", "window", "paper", "story", "school", "market", "winter", "summer", "river",
    "mountain", "bridge", "picture", "letter", "teacher", "doctor", "kitchen", "library",
    "evening", "journey", "village", "holiday",
];

/// Class mix modeled on the published corpus: offensive is the majority.
const CLASS_WEIGHTS: [(Label, f64); 3] = [
    (Label::Offensive, 0.50),
    (Label::Neither, 0.30),
    (Label::Hate, 0.20),
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn fillers(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| pick(rng, &FILLERS).to_string()).collect()
}

fn draw_label(rng: &mut ChaCha8Rng) -> Label {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (label, w) in CLASS_WEIGHTS {
        acc += w;
        if u < acc {
            return label;
        }
    }
    Label::Hate
}

/// Generate one tweet for a class. Marker order is the only feature
/// separating Hate from Offensive; the gap between markers is at least
/// two fillers.
fn synth_text(label: Label, rng: &mut ChaCha8Rng) -> String {
    let lead = rng.gen_range(1..3);
    let gap = rng.gen_range(2..5);
    let tail = rng.gen_range(1..4);
    let mut words: Vec<String> = Vec::new();
    match label {
        Label::Hate => {
            words.extend(fillers(rng, lead));
            words.push(pick(rng, &INSULT_MARKERS).to_string());
            words.extend(fillers(rng, gap));
            words.push(pick(rng, &TARGET_MARKERS).to_string());
            words.extend(fillers(rng, tail));
        }
        Label::Offensive => {
            words.extend(fillers(rng, lead));
            words.push(pick(rng, &TARGET_MARKERS).to_string());
            words.extend(fillers(rng, gap));
            words.push(pick(rng, &INSULT_MARKERS).to_string());
            words.extend(fillers(rng, tail));
        }
        Label::Neither => {
            words.extend(fillers(rng, lead + gap + tail + 2));
        }
    }
    words.join(" ")
}

fn annotation_counts(label: Label, rng: &mut ChaCha8Rng) -> (u32, u32, u32, u32) {
    // Three annotators; majority always matches the label, sometimes
    // with one dissent.
    let dissent = rng.gen_bool(0.25);
    let mut counts = [0u32; 3];
    counts[label.index()] = if dissent { 2 } else { 3 };
    if dissent {
        let mut other = rng.gen_range(0..2);
        if other >= label.index() {
            other += 1;
        }
        counts[other] = 1;
    }
    (3, counts[0], counts[1], counts[2])
}

/// A labeled synthetic corpus of `rows` tweets.
pub fn synth_corpus(rows: usize, seed: u64) -> Vec<LabeledTweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows as u64)
        .map(|id| {
            let label = draw_label(&mut rng);
            let text = synth_text(label, &mut rng);
            let (total, hate, off, neither) = annotation_counts(label, &mut rng);
            LabeledTweet {
                id,
                text,
                annot_total: total,
                hate_count: hate,
                offensive_count: off,
                neither_count: neither,
                label,
            }
        })
        .collect()
}

/// Write a corpus in the Davidson CSV layout.
pub fn write_corpus_csv(tweets: &[LabeledTweet], path: &Path) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "count,hate_speech,offensive_language,neither,class,tweet"
    )?;
    for t in tweets {
        let text = t.text.replace('"', "\"\"");
        writeln!(
            f,
            "{},{},{},{},{},\"{}\"",
            t.annot_total,
            t.hate_count,
            t.offensive_count,
            t.neither_count,
            t.label.index(),
            text
        )?;
    }
    Ok(())
}

/// Tiny separable id-level dataset: each class has its own token block,
/// so any of the models can drive training accuracy to 1.0.
pub fn separable_samples(n: usize, vocab_size: usize, seq_len: usize, seed: u64) -> Vec<Sample> {
    assert!(vocab_size >= 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = (vocab_size - 2) / 3;
    (0..n)
        .map(|i| {
            let class = i % 3;
            let lo = 2 + class * block;
            let hi = lo + block.max(1);
            let len = rng.gen_range(2..=seq_len.min(6));
            let mut ids: Vec<usize> = (0..len)
                .map(|_| rng.gen_range(lo..hi.min(vocab_size)))
                .collect();
            ids.resize(seq_len, 0);
            Sample {
                ids,
                len,
                label: class,
            }
        })
        .collect()
}
