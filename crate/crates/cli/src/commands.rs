//! Subcommand implementations. The clap layer in `cli` parses arguments and
//! delegates here; everything below returns `Result` so exit codes and error
//! JSON stay in one place.

use std::fs;
use std::path::{Path, PathBuf};

use lexaug_core::baselines::{run_baseline_trials, BaselineRun, Regularizer};
use lexaug_core::embed::word_feature;
use lexaug_core::eval::{build_report, WordPrediction};
use lexaug_core::nn::{Regressor, TokenModel, TokenModelConfig};
use lexaug_core::predict::{augment_lexicon, augmented_tsv, mc_predict_ensemble, SkipReason};
use lexaug_core::rng::{hash_hex, Rng};
use lexaug_core::tokenize::NgramConfig;
use lexaug_core::train::{make_splits, train_ensemble, Ensemble};
use lexaug_core::transformer::{DictModel, DictModelConfig, EncoderConfig};

use crate::config::{ModelKind, RunConfig};
use crate::dataset::{build_dictionary_bundle, build_token_bundle, load_lexicon, load_vectors};
use crate::defs_client::{
    populate_cache, FetchClient, FetchPolicy, FixtureTransport, HttpTransport, DEFAULT_ENDPOINT,
    ENDPOINT_ENV_VAR,
};
use crate::error::{CliError, Result};
use crate::report::{
    baseline_table_csv, group_errors_csv, report_json, report_table_csv, top_errors_csv,
};
use crate::runs::{default_eval_dir, load_run, read_words_file, save_run, LoadedRun};

fn token_model_config(cfg: &RunConfig, vocab_size: usize) -> TokenModelConfig {
    TokenModelConfig {
        vocab_size,
        embed_dim: cfg.token.embed_dim,
        hidden: cfg.token.hidden.clone(),
        dropout: cfg.token.dropout,
        train_embeddings: cfg.token.train_embeddings,
    }
}

fn dict_model_config(cfg: &RunConfig, vocab_size: usize) -> DictModelConfig {
    DictModelConfig {
        encoder: EncoderConfig {
            vocab_size,
            layers: cfg.dictionary.layers,
            heads: cfg.dictionary.heads,
            model_dim: cfg.dictionary.model_dim,
            ff_dim: cfg.dictionary.ff_dim,
            max_len: cfg.dictionary.seq_len,
            block_dropout: cfg.dictionary.block_dropout,
            positional: cfg.dictionary.positional,
        },
        hidden: cfg.dictionary.hidden.clone(),
        head_dropout: cfg.dictionary.head_dropout,
        train_encoder: cfg.dictionary.train_encoder,
    }
}

/// Train the configured ensemble and persist the run directory.
pub fn cmd_train(cfg: &RunConfig, run_dir: &Path) -> Result<()> {
    let (ensemble, dataset_size): (Ensemble, usize) = match cfg.model {
        ModelKind::Token => {
            let bundle = build_token_bundle(cfg)?;
            let splits = make_splits(bundle.dataset.len(), &cfg.split_spec())?;
            let model_cfg = token_model_config(cfg, bundle.vocab.len());
            let embedding = bundle.embedding.clone();
            let mut factory = |_fold: u32, rng: &mut Rng| -> Box<dyn Regressor> {
                Box::new(TokenModel::with_embeddings(
                    model_cfg.clone(),
                    &embedding,
                    rng,
                ))
            };
            let ensemble = train_ensemble(
                &mut factory,
                &bundle.dataset,
                &splits,
                &cfg.split_spec(),
                &cfg.train_config(),
                bundle.vocab_hash,
            )?;
            (ensemble, bundle.dataset.len())
        }
        ModelKind::Dictionary => {
            let bundle = build_dictionary_bundle(cfg)?;
            let splits = make_splits(bundle.dataset.len(), &cfg.split_spec())?;
            let model_cfg = dict_model_config(cfg, bundle.vocab.len());
            let mut factory = |_fold: u32, rng: &mut Rng| -> Box<dyn Regressor> {
                Box::new(DictModel::new(model_cfg.clone(), rng))
            };
            let ensemble = train_ensemble(
                &mut factory,
                &bundle.dataset,
                &splits,
                &cfg.split_spec(),
                &cfg.train_config(),
                bundle.vocab_hash,
            )?;
            (ensemble, bundle.dataset.len())
        }
    };
    for member in &ensemble.members {
        println!(
            "fold {} best epoch {} val MAE {:.4}",
            member.outcome.fold, member.outcome.best_epoch, member.outcome.val_mae
        );
    }
    save_run(run_dir, cfg, &ensemble, dataset_size)?;
    println!(
        "run saved to {} ({} folds, model hash {})",
        run_dir.display(),
        ensemble.members.len(),
        hash_hex(ensemble.model_hash(cfg.seed)),
    );
    Ok(())
}

fn holdout_predictions(run: &LoadedRun) -> Result<Vec<WordPrediction>> {
    let cfg = &run.config;
    let mc = cfg.mc_config();
    let mut preds = Vec::new();
    match cfg.model {
        ModelKind::Token => {
            let bundle = build_token_bundle(cfg)?;
            for &i in &run.ensemble.splits.holdout {
                let word = &bundle.dataset.words[i];
                let seq = &bundle.dataset.seqs[i];
                let p = mc_predict_ensemble(&run.ensemble, word, seq, &mc)?;
                preds.push(WordPrediction {
                    word: word.clone(),
                    h_raw: p.h_hat,
                    sigma_hat: p.sigma_hat,
                });
            }
        }
        ModelKind::Dictionary => {
            let bundle = build_dictionary_bundle(cfg)?;
            for &i in &run.ensemble.splits.holdout {
                let word = &bundle.dataset.words[i];
                let seq = &bundle.dataset.seqs[i];
                let p = mc_predict_ensemble(&run.ensemble, word, seq, &mc)?;
                preds.push(WordPrediction {
                    word: word.clone(),
                    h_raw: p.h_hat,
                    sigma_hat: p.sigma_hat,
                });
            }
        }
    }
    Ok(preds)
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::WriteFailed {
            path: path.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::WriteFailed {
        path: path.to_path_buf(),
        source,
    })
}

/// Evaluate the trained ensemble on its holdout set and write the report
/// files.
pub fn cmd_evaluate(run_dir: &Path, top_k: usize, out_dir: Option<PathBuf>) -> Result<()> {
    let run = load_run(run_dir)?;
    if run.ensemble.splits.holdout.is_empty() {
        return Err(CliError::BadRunDir {
            path: run_dir.to_path_buf(),
            message: "run has no holdout indices".into(),
        });
    }
    let lexicon = load_lexicon(&run.config.lexicon)?;
    let preds = holdout_predictions(&run)?;
    let report = build_report(&preds, &lexicon, top_k)?;
    let label = format!("{}-ensemble", run.config.model.label());
    let out = out_dir.unwrap_or_else(|| default_eval_dir(run_dir));
    write_out(
        &out.join("report.json"),
        &report_json(&report, &label, &run.summary.model_hash),
    )?;
    write_out(
        &out.join("report_table.csv"),
        &report_table_csv(&report, &label),
    )?;
    write_out(&out.join("group_errors.csv"), &group_errors_csv(&report))?;
    write_out(&out.join("top_errors.csv"), &top_errors_csv(&report))?;
    println!(
        "holdout MAE {:.4} over {} words (human mean sigma {:.4}); reports in {}",
        report.mae,
        report.n,
        report.human_mean_sigma,
        out.display(),
    );
    Ok(())
}

/// Score a words file with the trained ensemble and emit the augmented TSV.
pub fn cmd_augment(
    run_dir: &Path,
    words_file: &Path,
    force: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let run = load_run(run_dir)?;
    let words = read_words_file(words_file)?;
    let mc = run.config.mc_config();
    let rows = match run.config.model {
        ModelKind::Token => {
            let bundle = build_token_bundle(&run.config)?;
            let mut encode = |w: &str| bundle.encode_word(w);
            augment_lexicon(
                &run.ensemble,
                &mut encode,
                &bundle.lexicon,
                &words,
                &mc,
                force,
            )
        }
        ModelKind::Dictionary => {
            let bundle = build_dictionary_bundle(&run.config)?;
            let mut encode = |w: &str| bundle.encode_word(w);
            augment_lexicon(
                &run.ensemble,
                &mut encode,
                &bundle.lexicon,
                &words,
                &mc,
                force,
            )
        }
    };
    for row in &rows {
        match &row.skipped {
            Some(SkipReason::AlreadyRated) => {
                eprintln!(
                    "skipped '{}': already human-rated (use --force to rescore)",
                    row.word
                );
            }
            Some(SkipReason::Unencodable(reason)) => {
                eprintln!("skipped '{}': {reason}", row.word);
            }
            None => {}
        }
    }
    let model_hash = u64::from_str_radix(&run.summary.model_hash, 16).unwrap_or(0);
    let tsv = augmented_tsv(&rows, model_hash);
    match out {
        Some(path) => {
            write_out(&path, &tsv)?;
            let scored = rows.iter().filter(|r| r.prediction.is_some()).count();
            println!("wrote {scored} scored rows to {}", path.display());
        }
        None => print!("{tsv}"),
    }
    Ok(())
}

/// Populate the definition cache for a lexicon and print coverage.
pub struct FetchDefsArgs {
    pub lexicon: PathBuf,
    pub cache: PathBuf,
    pub endpoint: Option<String>,
    pub fixtures: Option<PathBuf>,
    pub error_ttl_secs: u64,
    pub missing_ttl_secs: u64,
    pub limit: Option<usize>,
    pub spacing_ms: u64,
}

pub fn cmd_fetch_defs(args: &FetchDefsArgs) -> Result<()> {
    let lexicon = load_lexicon(&args.lexicon)?;
    let policy = FetchPolicy {
        spacing: std::time::Duration::from_millis(args.spacing_ms),
        ..FetchPolicy::default()
    };
    let ttl = crate::defs_client::CacheTtl {
        error_secs: args.error_ttl_secs,
        missing_secs: args.missing_ttl_secs,
    };
    let stats = match &args.fixtures {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(CliError::InputNotFound { path: dir.clone() });
            }
            let mut client = FetchClient::new(FixtureTransport::new(dir), policy);
            populate_cache(&mut client, &args.cache, &lexicon, ttl, args.limit)?
        }
        None => {
            let endpoint = args
                .endpoint
                .clone()
                .or_else(|| std::env::var(ENDPOINT_ENV_VAR).ok())
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
            let mut client = FetchClient::new(HttpTransport::new(&endpoint), policy);
            populate_cache(&mut client, &args.cache, &lexicon, ttl, args.limit)?
        }
    };
    println!(
        "fetched {} (cached {}, found {}, missing {}, errored {})",
        stats.fetched, stats.already_cached, stats.found, stats.missing, stats.errored
    );
    let coverage = crate::defs_client::cache_coverage(&args.cache, &lexicon)?;
    println!(
        "coverage: found {} missing {} errored {} pending {}",
        coverage.found, coverage.missing, coverage.errored, coverage.pending
    );
    if !coverage.missing_words.is_empty() {
        let preview: Vec<&str> = coverage
            .missing_words
            .iter()
            .take(20)
            .map(String::as_str)
            .collect();
        println!(
            "missing words (first {}): {}",
            preview.len(),
            preview.join(", ")
        );
    }
    Ok(())
}

/// Score free text with the lexicon-average scorer.
pub fn cmd_score_text(lexicon_path: &Path, text: &str) -> Result<()> {
    let lexicon = load_lexicon(lexicon_path)?;
    match lexicon.score_text(text) {
        Some(score) => println!("{score:.4}"),
        None => println!("no-match"),
    }
    Ok(())
}

/// Fit and evaluate linear baselines over pooled pre-trained vectors.
pub struct BaselineArgs {
    pub lexicon: PathBuf,
    pub vectors: PathBuf,
    pub models: Vec<String>,
    pub trials: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<()> {
    let lexicon = load_lexicon(&args.lexicon)?;
    let vectors = load_vectors(&args.vectors)?;
    let ngram = NgramConfig::default();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut skipped = 0usize;
    for entry in lexicon.entries() {
        match word_feature(&entry.word, &vectors, &ngram) {
            Some((features, _)) => {
                x.push(features);
                y.push(entry.h_avg);
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("{skipped} words had no vector coverage and were skipped");
    }
    if x.is_empty() {
        return Err(CliError::BadInput {
            path: args.vectors.clone(),
            message: "no lexicon word has vector coverage".into(),
        });
    }
    let mut runs: Vec<BaselineRun> = Vec::new();
    for name in &args.models {
        let reg = match name.as_str() {
            "ols" => Regularizer::None,
            "ridge" => Regularizer::Ridge {
                lambda: args.lambda,
            },
            "lasso" => Regularizer::Lasso {
                lambda: args.lambda,
            },
            "elasticnet" => Regularizer::ElasticNet {
                lambda: args.lambda,
                alpha: args.alpha,
            },
            other => {
                return Err(CliError::BadConfig(format!(
                    "unknown baseline '{other}' (ols|ridge|lasso|elasticnet)"
                )))
            }
        };
        let run = run_baseline_trials(&x, &y, &reg, args.trials, args.holdout_fraction, args.seed)?;
        println!(
            "{}: mean MAE {:.4} over {} trials",
            run.label,
            run.mean_mae,
            run.trials.len()
        );
        runs.push(run);
    }
    let csv = baseline_table_csv(&runs);
    match &args.out {
        Some(path) => {
            write_out(path, &csv)?;
            println!("baseline table written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
