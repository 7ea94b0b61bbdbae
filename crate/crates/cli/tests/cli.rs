//! End-to-end tests of the `lexaug` binary: exit codes, error JSON on
//! stderr, and the behavior of each subcommand over the bundled assets.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lexaug")
}

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn lexaug")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_lexicon_exits_2_with_error_json() {
    let out = run(&[
        "score-text",
        "--lexicon",
        "/nonexistent/lex.tsv",
        "--text",
        "hello",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    let value: serde_json::Value =
        serde_json::from_str(err.lines().last().unwrap()).expect("stderr carries error JSON");
    assert!(value["error"].as_str().unwrap().contains("input not found"));
    assert_eq!(value["code"], 2);
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["train", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("train"));
    assert!(stdout(&out).contains("fetch-defs"));
}

#[test]
fn score_text_scores_known_words() {
    let lex = assets().join("labmt_sample_500.tsv");
    let out = run(&[
        "score-text",
        "--lexicon",
        lex.to_str().unwrap(),
        "--text",
        "the the",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "4.9800");

    let out = run(&[
        "score-text",
        "--lexicon",
        lex.to_str().unwrap(),
        "--text",
        "zzzqqq qqqzzz",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "no-match");
}

fn train_small_token_run(run_dir: &Path) {
    let config = assets().join("configs/token_sample.json");
    let out = run(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--lexicon",
        assets().join("labmt_sample_500.tsv").to_str().unwrap(),
        "--max-epochs",
        "4",
        "--patience",
        "0",
        "--samples-per-model",
        "20",
        "--run-dir",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "train stderr: {}", stderr(&out));
}

#[test]
fn train_writes_complete_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    train_small_token_run(&run_dir);
    for rel in ["config.json", "run.json", "splits.txt"] {
        assert!(run_dir.join(rel).exists(), "missing {rel}");
    }
    for fold in 0..5 {
        for rel in ["checkpoint.manifest", "checkpoint.bin", "history.csv"] {
            assert!(
                run_dir.join(format!("fold{fold}/{rel}")).exists(),
                "missing fold{fold}/{rel}"
            );
        }
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(summary["folds"], 5);
    assert_eq!(summary["model"], "token");
    assert_eq!(summary["dataset_size"], 500);
}

#[test]
fn augment_scores_oov_and_skips_rated_words() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    train_small_token_run(&run_dir);

    // "love" is human-rated in the sample; "coronavirus" is not
    let words = tmp.path().join("words.txt");
    std::fs::write(&words, "coronavirus\nlove\n").unwrap();
    let out = run(&[
        "augment",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let tsv = stdout(&out);
    assert!(tsv.contains("coronavirus\t"));
    assert!(!tsv.contains("\nlove\t"), "rated word must be skipped");
    assert!(stderr(&out).contains("already human-rated"));
    // scored rows stay on the scale with nonnegative uncertainty
    for line in tsv.lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        let h: f64 = fields[1].parse().unwrap();
        let sigma: f64 = fields[4].parse().unwrap();
        assert!((1.0..=9.0).contains(&h));
        assert!(sigma >= 0.0);
        assert_eq!(fields[5], "100"); // 5 members x 20 samples
        assert_eq!(fields[6], "model");
    }

    // forcing rescoring includes the rated word
    let out = run(&[
        "augment",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
        "--force",
    ]);
    assert!(stdout(&out).contains("\nlove\t"));

    // empty words file: empty output, exit 0
    let empty = tmp.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let out = run(&[
        "augment",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--words",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1, "header only");
}

#[test]
fn augment_on_untrained_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let words = tmp.path().join("words.txt");
    std::fs::write(&words, "anything\n").unwrap();
    let out = run(&[
        "augment",
        "--run-dir",
        tmp.path().join("not_a_run").to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a trained run"));
}

#[test]
fn evaluate_writes_reports_with_human_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    train_small_token_run(&run_dir);
    let out = run(&[
        "evaluate",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--top-k",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let eval_dir = run_dir.join("eval");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(eval_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["n"], 100); // 20% holdout of 500
    assert!(report["human"]["mean_sigma"].as_f64().unwrap() > 0.0);
    assert_eq!(report["top_errors"].as_array().unwrap().len(), 50);
    let table = std::fs::read_to_string(eval_dir.join("report_table.csv")).unwrap();
    assert!(table
        .lines()
        .any(|l| l.starts_with("human-ratings-sigma,") && l.ends_with("this-run")));
    assert!(table
        .lines()
        .any(|l| l.starts_with("human-ratings-variance,") && l.ends_with("this-run")));
    assert!(table.contains(",published"));
    assert!(eval_dir.join("group_errors.csv").exists());
    assert!(eval_dir.join("top_errors.csv").exists());
}

#[test]
fn dictionary_pipeline_trains_and_evaluates() {
    let tmp = tempfile::tempdir().unwrap();
    // desk-scale dictionary config kept tiny so the test stays fast
    let config = tmp.path().join("dict.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "model": "dictionary",
            "lexicon": assets().join("labmt_sample_500.tsv"),
            "subword_vocab": assets().join("subword_vocab_tiny.txt"),
            "defs_cache": assets().join("defs_cache_sample.jsonl"),
            "seed": 7,
            "train": { "max_epochs": 2, "batch_size": 32, "patience": 0, "learning_rate": 0.001 },
            "mc": { "samples_per_model": 5, "train_mode_dropout": true },
            "dictionary": {
                "layers": 1, "heads": 2, "model_dim": 16, "ff_dim": 32,
                "seq_len": 24, "block_dropout": 0.1, "positional": true,
                "hidden": [16, 8], "head_dropout": 0.5, "train_encoder": true,
                "max_def_words": 50
            }
        })
        .to_string(),
    )
    .unwrap();
    let run_dir = tmp.path().join("dict_run");
    let out = run(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--run-dir",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let out = run(&[
        "evaluate",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--top-k",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("eval/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["model"], "dictionary-ensemble");
    assert_eq!(report["n"], 100);

    // augmentation uses cached definitions where available
    let words = tmp.path().join("words.txt");
    std::fs::write(&words, "coronavirus\nglorptex\n").unwrap();
    let out = run(&[
        "augment",
        "--run-dir",
        run_dir.to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let tsv = stdout(&out);
    assert!(tsv.contains("coronavirus\t"));
    assert!(
        tsv.contains("glorptex\t"),
        "words without definitions still score"
    );
}

#[test]
fn fetch_defs_fixture_mode_populates_and_resumes() {
    let tmp = tempfile::tempdir().unwrap();
    let lex = tmp.path().join("lex.tsv");
    std::fs::write(
        &lex,
        "word\thappiness_average\thappiness_standard_deviation\n\
         love\t8.4\t1.1\njoy\t8.2\t1.2\nzzzqqq\t5.0\t1.0\n",
    )
    .unwrap();
    let cache = tmp.path().join("cache.jsonl");
    let fixtures = assets().join("fixtures/defs");
    let args = [
        "fetch-defs",
        "--lexicon",
        lex.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
        "--fixtures",
        fixtures.to_str().unwrap(),
        "--spacing-ms",
        "0",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("fetched 3"), "got: {text}");
    assert!(text.contains("found 2"));
    assert!(text.contains("missing 1"));
    assert!(text.contains("zzzqqq"));
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), 3);

    // rerun: idempotent, no new fetches, no new cache lines
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("fetched 0 (cached 3"));
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), 3);
}

#[test]
fn baseline_emits_table_with_published_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out_csv = tmp.path().join("baselines.csv");
    let out = run(&[
        "baseline",
        "--lexicon",
        assets().join("labmt_sample_500.tsv").to_str().unwrap(),
        "--vectors",
        assets().join("vectors_50d_toy.txt").to_str().unwrap(),
        "--models",
        "ridge,lasso,elasticnet",
        "--trials",
        "3",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let table = std::fs::read_to_string(&out_csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "model,average,p25,p50,p75,p85,p95,source");
    assert!(lines
        .iter()
        .any(|l| l.starts_with("ridge,") && l.ends_with("this-run")));
    assert!(lines
        .iter()
        .any(|l| l.starts_with("lasso,") && l.ends_with("this-run")));
    assert!(lines
        .iter()
        .any(|l| l.starts_with("elasticnet,") && l.ends_with("this-run")));
    assert!(lines
        .iter()
        .any(|l| l.starts_with("ridge+fasttext,") && l.ends_with("published")));
    // the toy vectors carry real signal: ridge should comfortably beat a
    // constant predictor on this 500-word sample (MAD is about 1.8)
    let ridge_row = lines.iter().find(|l| l.starts_with("ridge,")).unwrap();
    let mae: f64 = ridge_row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(mae < 1.4, "ridge baseline MAE {mae} shows no signal");
}

#[test]
fn training_run_is_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    let config = assets().join("configs/token_sample.json");
    let lexicon = assets().join("labmt_sample_500.tsv");
    let mut hashes = Vec::new();
    for seed in ["1", "2"] {
        let dir = tmp.path().join(format!("run{seed}"));
        let out = run(&[
            "train",
            "--config",
            config.to_str().unwrap(),
            "--lexicon",
            lexicon.to_str().unwrap(),
            "--max-epochs",
            "2",
            "--patience",
            "0",
            "--seed",
            seed,
            "--run-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap();
        hashes.push(summary["model_hash"].as_str().unwrap().to_string());
    }
    assert_ne!(
        hashes[0], hashes[1],
        "different seeds must change the model hash"
    );
}

#[test]
fn train_with_missing_lexicon_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "train",
        "--model",
        "token",
        "--lexicon",
        "/nonexistent/lex.tsv",
        "--run-dir",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("input not found"));
}
