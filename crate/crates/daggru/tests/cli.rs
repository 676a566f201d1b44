//! End-to-end checks of the command-line interface: every subcommand runs
//! against real (tiny) corpora through the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use daggru::corpus::load_corpus;
use daggru::model::load_model;
use daggru::stats::read_ledger;
use daggru::trainer::RunRecord;
use tempfile::tempdir;

fn daggru(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daggru"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn expect_ok(out: &Output) -> Vec<String> {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

/// Every command prints a JSON banner first; later lines that start with
/// `{` must parse too.
fn banner(lines: &[String]) -> serde_json::Value {
    serde_json::from_str(&lines[0]).expect("first stdout line is JSON")
}

const GEN_TINY: &[&str] = &[
    "gen-synthetic",
    "--seed", "3",
    "--docs", "12",
    "--sentences-per-doc", "2",
    "--vocab", "30",
    "--event-types", "2",
    "--k", "8",
];

const TINY_MODEL: &[&str] = &["--hidden", "6", "--edge-dim", "3", "--dropout", "0.0"];
const TINY_TRAIN: &[&str] = &["--max-epochs", "2", "--lr0", "0.005"];

#[test]
fn gen_synthetic_is_deterministic_and_loadable() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let out_a = expect_ok(&daggru(a.path(), GEN_TINY));
    expect_ok(&daggru(b.path(), GEN_TINY));
    assert_eq!(banner(&out_a)["command"], "gen-synthetic");

    let bytes_a = std::fs::read(a.path().join("corpus.jsonl")).unwrap();
    let bytes_b = std::fs::read(b.path().join("corpus.jsonl")).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed, same bytes");

    let corpus = load_corpus(&a.path().join("corpus.jsonl")).unwrap();
    assert_eq!(corpus.n_docs(), 12);
    assert_eq!(corpus.embedding_dim(), 8);
}

#[test]
fn train_evaluate_round_trip() {
    let dir = tempdir().unwrap();
    expect_ok(&daggru(dir.path(), GEN_TINY));
    let corpus_path = dir.path().join("corpus.jsonl");
    let corpus_arg = corpus_path.to_str().unwrap();

    let mut args = vec![
        "train",
        "--corpus", corpus_arg,
        "--random-split", "8,2,2",
    ];
    args.extend_from_slice(TINY_MODEL);
    args.extend_from_slice(TINY_TRAIN);
    let lines = expect_ok(&daggru(dir.path(), &args));
    assert_eq!(banner(&lines)["command"], "train");

    // One ledger row, and the checkpoint it names loads and matches.
    let records = read_ledger(&dir.path().join("runs.jsonl")).unwrap();
    assert_eq!(records.len(), 1);
    let record: RunRecord = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(record, records[0]);
    assert_eq!(record.test_evaluations, 1);
    let ckpt_name = record.checkpoint.as_deref().expect("train saves a checkpoint");
    let model = load_model(&dir.path().join(ckpt_name)).unwrap();
    assert_eq!(model.config.hidden, 6);

    // Evaluating the checkpoint on the same split reproduces the ledger's
    // test score exactly.
    let eval_lines = expect_ok(&daggru(
        dir.path(),
        &[
            "evaluate",
            "--checkpoint", dir.path().join(ckpt_name).to_str().unwrap(),
            "--corpus", corpus_arg,
            "--random-split", "8,2,2",
            "--partition", "test",
        ],
    ));
    let result: serde_json::Value = serde_json::from_str(eval_lines.last().unwrap()).unwrap();
    assert_eq!(result["micro_f1"].as_f64().unwrap(), record.test_f1);
    assert_eq!(result["partition"], "test");
}

#[test]
fn study_report_bootstrap_flow() {
    let dir = tempdir().unwrap();
    expect_ok(&daggru(dir.path(), GEN_TINY));
    let corpus_path = dir.path().join("corpus.jsonl");
    let corpus_arg = corpus_path.to_str().unwrap();

    for model in ["dag-gru-attn", "bigru"] {
        let mut args = vec![
            "seed-study",
            "--corpus", corpus_arg,
            "--random-split", "8,2,2",
            "--n-seeds", "2",
            "--model", model,
        ];
        args.extend_from_slice(TINY_MODEL);
        args.extend_from_slice(TINY_TRAIN);
        expect_ok(&daggru(dir.path(), &args));
    }
    let records = read_ledger(&dir.path().join("runs.jsonl")).unwrap();
    assert_eq!(records.len(), 4, "two studies appended into one ledger");
    assert_eq!(records.iter().filter(|r| r.model == "bigru").count(), 2);
    assert!(records.iter().all(|r| r.checkpoint.is_none()));

    let report_lines = expect_ok(&daggru(
        dir.path(),
        &["report", "--csv", "results.csv", "--welch", "dag-gru-attn,bigru"],
    ));
    let text = report_lines.join("\n");
    assert!(text.contains("dag-gru-attn"), "{text}");
    assert!(text.contains("bigru"), "{text}");
    let welch: serde_json::Value =
        serde_json::from_str(report_lines.last().unwrap()).unwrap();
    let p = welch["welch"]["p"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("model,runs,"));
    assert_eq!(csv.lines().count(), 3);

    let boot_lines = expect_ok(&daggru(
        dir.path(),
        &["bootstrap", "--model", "dag-gru-attn", "--reps", "50"],
    ));
    let boot: serde_json::Value = serde_json::from_str(boot_lines.last().unwrap()).unwrap();
    let mean = boot["mean_test_f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mean));
}

#[test]
fn parallel_studies_leave_identical_ledgers() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    for (dir, jobs) in [(&a, "1"), (&b, "2")] {
        expect_ok(&daggru(dir.path(), GEN_TINY));
        let corpus_path = dir.path().join("corpus.jsonl");
        let mut args = vec![
            "--jobs", jobs,
            "seed-study",
            "--corpus", corpus_path.to_str().unwrap(),
            "--random-split", "8,2,2",
            "--n-seeds", "3",
        ];
        args.extend_from_slice(TINY_MODEL);
        args.extend_from_slice(TINY_TRAIN);
        expect_ok(&daggru(dir.path(), &args));
    }
    let bytes_a = std::fs::read(a.path().join("runs.jsonl")).unwrap();
    let bytes_b = std::fs::read(b.path().join("runs.jsonl")).unwrap();
    assert_eq!(bytes_a, bytes_b, "thread count must not leak into results");
}

#[test]
fn failures_are_single_line_errors_with_exit_one() {
    let dir = tempdir().unwrap();
    let out = daggru(
        dir.path(),
        &[
            "train",
            "--corpus", "does-not-exist.jsonl",
            "--random-split", "8,2,2",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: "), "{stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");

    // Missing split arguments are caught before any training.
    let out = daggru(dir.path(), &["train", "--corpus", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(1));

    // An empty ledger is a clean error, not a crash.
    let out = daggru(dir.path(), &["report"]);
    assert_eq!(out.status.code(), Some(1));
}
