//! CLI surface tests: verbs, artifacts on disk, and exit codes.

use std::path::Path;
use std::process::Command;

use advtext::fixtures;

fn write_fixture(dir: &Path, rows: usize) {
    fixtures::write_corpus_csv(&fixtures::synth_corpus(rows, 55), &dir.join("synth.csv")).unwrap();
}

fn write_config(dir: &Path, epochs: usize) {
    let toml = format!(
        r#"
seed = 4

[corpus]
path = "synth.csv"

[prep]
remove_stopwords = false
vocab_min_freq = 1

[attack]
kinds = ["LeetSub", "CharSub"]
per_token_prob = 0.3

[model]
arch = "lstm"
embed_dim = 8
hidden = 8
seq_len = 16

[train]
epochs = {epochs}
batch_size = 16
learning_rate = 0.005
"#
    );
    std::fs::write(dir.join("experiment.toml"), toml).unwrap();
}

fn advtext(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_advtext"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn run_verb_writes_report_checkpoint_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), 60);
    write_config(dir.path(), 1);

    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "run"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for artifact in [
        "run_report.json",
        "checkpoint.json",
        "vocab.jsonl",
        "lstm_curve.csv",
    ] {
        assert!(
            dir.path().join("out").join(artifact).exists(),
            "missing {artifact}"
        );
    }
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/run_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
    assert!(report["evals"]["test"]["attacked_corrected"]["accuracy"].is_number());
}

#[test]
fn ingest_attack_correct_and_eval_verbs() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), 40);
    write_config(dir.path(), 1);

    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "ingest"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("out/rejects.jsonl").exists());
    assert!(dir.path().join("out/corpus_summary.json").exists());

    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "attack"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("out/attacked.csv").exists());
    assert!(dir.path().join("out/attack_audit.jsonl").exists());

    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "correct"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("out/corrected.csv").exists());

    // train then eval against the saved checkpoint.
    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "train"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "eval"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/eval_report.json").exists());
}

#[test]
fn compare_verb_writes_three_row_table() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), 45);
    write_config(dir.path(), 1);

    let out = advtext(
        &[
            "--config",
            "experiment.toml",
            "--out",
            "out",
            "compare",
            "--arch",
            "lstm,gru,cnn1d",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/comparison.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 3);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("model"));
    assert!(stdout.contains("LSTM"));
}

#[test]
fn exit_codes_distinguish_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();

    // Missing config: exit 2.
    let out = advtext(&["run"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // Config referencing a missing corpus: exit 2 (validation).
    write_config(dir.path(), 1);
    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "run"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    // Present but malformed corpus (missing column): exit 3.
    std::fs::write(
        dir.path().join("synth.csv"),
        "count,hate_speech,offensive_language,tweet\n3,3,0,\"x\"\n",
    )
    .unwrap();
    let out = advtext(
        &["--config", "experiment.toml", "--out", "out", "ingest"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("neither"), "stderr: {stderr}");

    // Numeric failure: a divergent learning rate drives the loss
    // non-finite, which is exit 4.
    write_fixture(dir.path(), 30);
    let bad = std::fs::read_to_string(dir.path().join("experiment.toml"))
        .unwrap()
        .replace("learning_rate = 0.005", "learning_rate = 1e12");
    std::fs::write(dir.path().join("diverge.toml"), bad).unwrap();
    let out = advtext(
        &["--config", "diverge.toml", "--out", "out", "run"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // --seed override changes the digest.
    write_fixture(dir.path(), 30);
    let out = advtext(
        &[
            "--config",
            "experiment.toml",
            "--out",
            "a",
            "--seed",
            "1",
            "run",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out2 = advtext(
        &[
            "--config",
            "experiment.toml",
            "--out",
            "b",
            "--seed",
            "2",
            "run",
        ],
        dir.path(),
    );
    assert!(out2.status.success());
    let digest = |p: &Path| {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["config_digest"].as_str().unwrap().to_string()
    };
    assert_ne!(
        digest(&dir.path().join("a/run_report.json")),
        digest(&dir.path().join("b/run_report.json"))
    );
}
