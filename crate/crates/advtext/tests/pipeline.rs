//! End-to-end harness tests: smoke, condition ordering, leakage
//! isolation, comparison, curves, and checkpoint evaluation.

use std::path::Path;

use advtext::adversary::AttackKind;
use advtext::corpus::{split_corpus, LabeledTweet};
use advtext::fixtures;
use advtext::harness::config::{
    derive_seed, AttackSection, ModelSection, PrepSection, TrainSection,
};
use advtext::harness::run::{evaluate_checkpoint, run_experiment_full};
use advtext::harness::{
    compare_models, emit_curves, run_experiment, ExperimentConfig, HarnessError,
};
use advtext::neural::{save_checkpoint, Arch};

fn small_config(dir: &Path, rows: usize, epochs: usize, arch: Arch, seed: u64) -> ExperimentConfig {
    let corpus_path = dir.join("synth.csv");
    if !corpus_path.exists() {
        fixtures::write_corpus_csv(&fixtures::synth_corpus(rows, 77), &corpus_path).unwrap();
    }
    let mut cfg = ExperimentConfig::default();
    cfg.seed = seed;
    cfg.base_dir = dir.to_path_buf();
    cfg.corpus.path = "synth.csv".into();
    cfg.prep = PrepSection {
        remove_stopwords: false,
        vocab_min_freq: 1,
        ..PrepSection::default()
    };
    cfg.attack = Some(AttackSection {
        kinds: vec![AttackKind::LeetSub, AttackKind::CharSub],
        per_token_prob: 0.3,
        apply_to_val: true,
        apply_to_test: true,
        ..AttackSection::default()
    });
    cfg.model = ModelSection {
        arch,
        embed_dim: 12,
        hidden: 16,
        filters: 8,
        kernel: 3,
        seq_len: 16,
        ..ModelSection::default()
    };
    cfg.train = TrainSection {
        epochs,
        batch_size: 16,
        learning_rate: 5e-3,
        ..TrainSection::default()
    };
    cfg
}

#[test]
fn smoke_run_populates_every_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 50, 1, Arch::Lstm, 3);
    let report = run_experiment(&cfg).unwrap();

    assert_eq!(report.tool_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(report.config_digest.len(), 64);
    assert_eq!(report.corpus.accepted, 50);
    assert_eq!(
        report.split_sizes.train + report.split_sizes.val + report.split_sizes.test,
        50
    );
    assert!(report.vocab_size > 2);
    assert!(report.dictionary_size > 1000);
    assert!(report.parameter_counts.trainable > 0);
    assert_eq!(report.curve.len(), 1);
    for split in ["val", "test"] {
        let conditions = &report.evals[split];
        for condition in ["clean", "attacked", "attacked_corrected"] {
            assert!(
                conditions.contains_key(condition),
                "{split} missing {condition}"
            );
        }
    }
    assert!(report.wall_clock_seconds > 0.0);

    // A one-epoch run emits a one-row curve.
    let path = emit_curves(&report, dir.path()).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 2); // header + one row
}

#[test]
fn condition_ordering_on_pinned_fixture() {
    // Pinned regression: clean >= attacked_corrected >= attacked.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), 1000, 10, Arch::Lstm, 11);
    cfg.model.embed_dim = 24;
    cfg.model.hidden = 32;
    let report = run_experiment(&cfg).unwrap();
    let test = &report.evals["test"];
    let clean = test["clean"].accuracy;
    let attacked = test["attacked"].accuracy;
    let corrected = test["attacked_corrected"].accuracy;
    assert!(
        clean >= corrected && corrected >= attacked,
        "expected clean {clean:.4} >= corrected {corrected:.4} >= attacked {attacked:.4}"
    );
    assert!(attacked < clean, "attack had no effect");
}

#[test]
fn vocabulary_and_dictionary_see_only_training_tokens() {
    // Plant a marker token in exactly the rows that the (deterministic)
    // split sends to val and test; neither the vocabulary nor the
    // correction dictionary may contain it afterwards.
    let dir = tempfile::tempdir().unwrap();
    let seed = 5u64;
    let rows = fixtures::synth_corpus(120, 42);

    let probe_cfg = small_config(dir.path(), 1, 1, Arch::Lstm, seed);
    let spec = probe_cfg.split.to_spec(derive_seed(seed, "split"));
    let probe_split = split_corpus(&rows, &spec).unwrap();
    let eval_ids: std::collections::HashSet<u64> = probe_split
        .val
        .iter()
        .chain(&probe_split.test)
        .map(|t| t.id)
        .collect();
    assert!(!eval_ids.is_empty());

    let marked: Vec<LabeledTweet> = rows
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if eval_ids.contains(&t.id) {
                t.text = format!("{} zzleakzz", t.text);
            }
            t
        })
        .collect();
    fixtures::write_corpus_csv(&marked, &dir.path().join("marked.csv")).unwrap();

    let mut cfg = small_config(dir.path(), 1, 1, Arch::Lstm, seed);
    cfg.corpus.path = "marked.csv".into();
    let artifacts = run_experiment_full(&cfg).unwrap();

    // The split in the run is the same split we probed: same ids.
    assert_eq!(artifacts.report.split_sizes.train, probe_split.train.len());
    assert!(
        !artifacts.vocab.contains("zzleakzz"),
        "val/test token leaked into the vocabulary"
    );
    assert!(
        !artifacts.dictionary.contains("zzleakzz"),
        "val/test token leaked into the correction dictionary"
    );

    // Control: a token planted in training rows does appear.
    let train_ids: std::collections::HashSet<u64> =
        probe_split.train.iter().map(|t| t.id).collect();
    let marked_train: Vec<LabeledTweet> = rows
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if train_ids.contains(&t.id) {
                t.text = format!("{} zzcontrolzz", t.text);
            }
            t
        })
        .collect();
    fixtures::write_corpus_csv(&marked_train, &dir.path().join("marked_train.csv")).unwrap();
    let mut cfg2 = small_config(dir.path(), 1, 1, Arch::Lstm, seed);
    cfg2.corpus.path = "marked_train.csv".into();
    let artifacts2 = run_experiment_full(&cfg2).unwrap();
    assert!(artifacts2.vocab.contains("zzcontrolzz"));
    assert!(artifacts2.dictionary.contains("zzcontrolzz"));
}

#[test]
fn compare_produces_sorted_rows_and_rejects_mismatched_configs() {
    let dir = tempfile::tempdir().unwrap();
    let base = small_config(dir.path(), 60, 1, Arch::Lstm, 9);
    let mut gru = base.clone();
    gru.model.arch = Arch::Gru;
    let mut cnn = base.clone();
    cnn.model.arch = Arch::Cnn1d;

    let table = compare_models(&[base.clone(), gru, cnn]).unwrap();
    assert_eq!(table.rows.len(), 3);
    for pair in table.rows.windows(2) {
        assert!(
            pair[0].accuracy >= pair[1].accuracy,
            "rows must sort by accuracy"
        );
    }
    let names: std::collections::HashSet<&str> =
        table.rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(names.len(), 3);
    // Attack configured, so the headline condition is post-correction.
    assert!(table.rows.iter().all(|r| r.method == "attacked_corrected"));

    let single = compare_models(&[base.clone()]).unwrap();
    assert_eq!(single.rows.len(), 1);

    // Any non-model difference is rejected.
    let mut different_seed = base.clone();
    different_seed.model.arch = Arch::Gru;
    different_seed.seed = 1000;
    assert!(matches!(
        compare_models(&[base, different_seed]),
        Err(HarnessError::IncompatibleConfigs)
    ));
}

#[test]
fn curve_csv_has_one_row_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    // The default protocol trains for a fixed 100 epochs; the curve
    // must carry exactly that series.
    let mut cfg = small_config(dir.path(), 40, 100, Arch::Lstm, 2);
    cfg.attack = None;
    cfg.model.embed_dim = 6;
    cfg.model.hidden = 6;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.curve.len(), 100);

    let path = emit_curves(&report, dir.path()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epoch,train_loss,train_acc,val_loss,val_acc"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    let epochs: Vec<usize> = rows
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(
        epochs.windows(2).all(|w| w[1] == w[0] + 1),
        "epochs must be monotone"
    );
}

#[test]
fn checkpoint_evaluation_matches_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 80, 2, Arch::Gru, 13);
    let artifacts = run_experiment_full(&cfg).unwrap();

    let ckpt = dir.path().join("checkpoint.json");
    let vocab = dir.path().join("vocab.jsonl");
    save_checkpoint(
        &artifacts.best_model,
        &artifacts.vocab.content_hash(),
        &ckpt,
    )
    .unwrap();
    std::fs::write(&vocab, artifacts.vocab.to_jsonl()).unwrap();

    let evals = evaluate_checkpoint(&cfg, &ckpt, &vocab).unwrap();
    assert_eq!(evals, artifacts.report.evals);

    // A tampered vocabulary hash must be refused.
    let other_vocab = dir.path().join("other_vocab.jsonl");
    std::fs::write(
        &other_vocab,
        "{\"token\":\"<pad>\",\"id\":0,\"freq\":0}\n{\"token\":\"<unk>\",\"id\":1,\"freq\":0}\n",
    )
    .unwrap();
    assert!(evaluate_checkpoint(&cfg, &ckpt, &other_vocab).is_err());
}
