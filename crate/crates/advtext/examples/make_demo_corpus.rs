//! Generate a synthetic demo corpus plus a ready-to-run experiment
//! config, for trying the CLI without the real dataset:
//!
//!   cargo run -p advtext --example make_demo_corpus -- demo 3000 7
//!   cargo run -p advtext -- --config demo/experiment.toml --out demo/out run

use std::path::PathBuf;

use advtext::fixtures::{synth_corpus, write_corpus_csv};

const CONFIG: &str = r#"seed = 7

[corpus]
path = "corpus.csv"

[split]
train_frac = 0.6
val_frac = 0.2
test_frac = 0.2
stratified = true

[prep]
remove_stopwords = false
vocab_min_freq = 1

[attack]
kinds = ["LeetSub", "CharSub"]
per_token_prob = 0.3
max_edits_per_token = 2
apply_to_val = true
apply_to_test = true

[correction]
max_edit_distance = 2
merge_enabled = true

[model]
arch = "lstm"
embed_dim = 50
hidden = 64
seq_len = 32

[train]
epochs = 10
batch_size = 32
learning_rate = 0.002
"#;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "demo".into()));
    let rows: usize = args
        .next()
        .map(|v| v.parse().expect("rows must be an integer"))
        .unwrap_or(3000);
    let seed: u64 = args
        .next()
        .map(|v| v.parse().expect("seed must be an integer"))
        .unwrap_or(7);

    std::fs::create_dir_all(&dir).expect("create output directory");
    let corpus_path = dir.join("corpus.csv");
    write_corpus_csv(&synth_corpus(rows, seed), &corpus_path).expect("write corpus");
    let config_path = dir.join("experiment.toml");
    std::fs::write(&config_path, CONFIG).expect("write config");

    println!("wrote {} rows to {}", rows, corpus_path.display());
    println!("wrote starter config to {}", config_path.display());
    println!(
        "next: cargo run -p advtext --release -- --config {} --out {} run",
        config_path.display(),
        dir.join("out").display()
    );
}
