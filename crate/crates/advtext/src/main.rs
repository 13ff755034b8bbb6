use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use advtext::corpus::{class_distribution, load_corpus, write_rejects_report};
use advtext::fixtures::write_corpus_csv;
use advtext::harness::run::{
    attack_prepared_corpus, correct_prepared_corpus, evaluate_checkpoint, run_experiment_full,
};
use advtext::harness::{compare_models, emit_curves, ExperimentConfig, HarnessError};
use advtext::neural::{save_checkpoint, Arch};

/// Adversarial-attack, correction, and classification experiments over
/// hate-speech corpora.
#[derive(Parser)]
#[command(name = "advtext", version, about)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load and validate the corpus; write the rejects report and class
    /// distribution.
    Ingest,
    /// Attack every corpus row; write the attacked CSV and audit trail.
    Attack,
    /// Correct every corpus row; write the corrected CSV and audit
    /// trail.
    Correct,
    /// Train a model; write checkpoint, vocabulary, and training curve.
    Train,
    /// Evaluate a saved checkpoint over the configured conditions.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Full pipeline: ingest, split, preprocess, attack, correct,
    /// train, evaluate; write the run report.
    Run,
    /// Train and evaluate several architectures on the same data and
    /// seed; write a comparison table.
    Compare {
        /// Architectures to compare.
        #[arg(long, value_delimiter = ',', default_values_t = [
            "lstm".to_string(), "gru".to_string(), "cnn1d".to_string()
        ])]
        arch: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::ConfigInvalid("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::from_toml_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn parse_arch(name: &str) -> Result<Arch, HarnessError> {
    match name.to_lowercase().as_str() {
        "lstm" => Ok(Arch::Lstm),
        "gru" => Ok(Arch::Gru),
        "cnn1d" | "cnn" | "1d-cnn" => Ok(Arch::Cnn1d),
        other => Err(HarnessError::ConfigInvalid(format!(
            "unknown architecture `{other}` (expected lstm, gru, or cnn1d)"
        ))),
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    let cfg = load_config(&cli)?;
    let out = &cli.out;
    std::fs::create_dir_all(out)?;

    match &cli.cmd {
        Cmd::Ingest => {
            cfg.validate()?;
            let outcome = load_corpus(&cfg.corpus_path(), &cfg.corpus.schema)?;
            let rejects_path = out.join("rejects.jsonl");
            write_rejects_report(&outcome.rejects, std::fs::File::create(&rejects_path)?)?;
            let dist = class_distribution(&outcome.tweets);
            std::fs::write(
                out.join("corpus_summary.json"),
                serde_json::to_string_pretty(&dist).expect("distribution serializes"),
            )?;
            println!(
                "accepted {} rows, rejected {} (report: {})",
                outcome.tweets.len(),
                outcome.rejects.len(),
                rejects_path.display()
            );
            println!(
                "class counts: hate={} offensive={} neither={}",
                dist.counts[0], dist.counts[1], dist.counts[2]
            );
        }
        Cmd::Attack => {
            let attacked = attack_prepared_corpus(&cfg)?;
            let rows: Vec<_> = attacked.iter().map(|(r, _)| r.clone()).collect();
            write_corpus_csv(&rows, &out.join("attacked.csv"))?;
            let mut audit = String::new();
            for (row, records) in &attacked {
                let entry = serde_json::json!({"id": row.id, "records": records});
                audit.push_str(&entry.to_string());
                audit.push('\n');
            }
            std::fs::write(out.join("attack_audit.jsonl"), audit)?;
            let edited = attacked.iter().filter(|(_, r)| !r.is_empty()).count();
            println!(
                "attacked {} of {} rows -> {}",
                edited,
                attacked.len(),
                out.join("attacked.csv").display()
            );
        }
        Cmd::Correct => {
            let corrected = correct_prepared_corpus(&cfg)?;
            let rows: Vec<_> = corrected.iter().map(|(r, _)| r.clone()).collect();
            write_corpus_csv(&rows, &out.join("corrected.csv"))?;
            let mut audit = String::new();
            for (row, result) in &corrected {
                let entry = serde_json::json!({"id": row.id, "steps": result.steps});
                audit.push_str(&entry.to_string());
                audit.push('\n');
            }
            std::fs::write(out.join("correction_audit.jsonl"), audit)?;
            println!(
                "corrected {} rows -> {}",
                corrected.len(),
                out.join("corrected.csv").display()
            );
        }
        Cmd::Train | Cmd::Run => {
            let artifacts = run_experiment_full(&cfg)?;
            let vocab_path = out.join("vocab.jsonl");
            std::fs::write(&vocab_path, artifacts.vocab.to_jsonl())?;
            save_checkpoint(
                &artifacts.best_model,
                &artifacts.vocab.content_hash(),
                &out.join("checkpoint.json"),
            )?;
            let curve_path = emit_curves(&artifacts.report, out)?;
            println!("config digest: {}", artifacts.report.config_digest);
            println!(
                "parameters: {} trainable / {} total",
                artifacts.report.parameter_counts.trainable,
                artifacts.report.parameter_counts.total
            );
            println!("curve: {}", curve_path.display());
            if matches!(cli.cmd, Cmd::Run) {
                std::fs::write(out.join("run_report.json"), artifacts.report.to_json())?;
                if let Some(test) = artifacts.report.evals.get("test") {
                    for (condition, eval) in test {
                        println!(
                            "test/{condition}: acc={:.4} f1w={:.4} auc={:.4}",
                            eval.accuracy, eval.f1_weighted, eval.auc_macro_ovr
                        );
                    }
                }
                println!("report: {}", out.join("run_report.json").display());
            } else {
                println!("checkpoint: {}", out.join("checkpoint.json").display());
            }
        }
        Cmd::Eval { checkpoint, vocab } => {
            let ckpt = checkpoint
                .clone()
                .unwrap_or_else(|| out.join("checkpoint.json"));
            let voc = vocab.clone().unwrap_or_else(|| out.join("vocab.jsonl"));
            let evals = evaluate_checkpoint(&cfg, &ckpt, &voc)?;
            std::fs::write(
                out.join("eval_report.json"),
                serde_json::to_string_pretty(&evals).expect("evals serialize"),
            )?;
            for (split, conditions) in &evals {
                for (condition, eval) in conditions {
                    println!("{split}/{condition}: acc={:.4}", eval.accuracy);
                }
            }
        }
        Cmd::Compare { arch } => {
            let mut cfgs = Vec::new();
            for name in arch {
                let mut variant = cfg.clone();
                variant.model.arch = parse_arch(name)?;
                cfgs.push(variant);
            }
            let table = compare_models(&cfgs)?;
            std::fs::write(out.join("comparison.json"), table.to_json())?;
            print!("{}", table.to_text());
        }
    }
    Ok(())
}
