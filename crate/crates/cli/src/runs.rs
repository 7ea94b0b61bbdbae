//! Run-directory layout and serialization.
//!
//! ```text
//! run_dir/
//!   config.json            resolved configuration snapshot
//!   run.json               summary: hashes, per-fold validation MAE
//!   splits.txt             index sections: holdout, per-fold train/val
//!   fold0/
//!     checkpoint.manifest  plain-text parameter manifest
//!     checkpoint.bin       little-endian f32 payload
//!     history.csv          epoch,train_loss,val_mae
//!   ...
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use lexaug_core::checkpoint::{manifest_from_text, manifest_to_text, Checkpoint};
use lexaug_core::rng::hash_hex;
use lexaug_core::train::{Ensemble, EnsembleMember, EpochStats, FoldIndices, FoldOutcome, Splits};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub model: String,
    pub vocab_hash: String,
    pub model_hash: String,
    pub folds: usize,
    pub fold_val_mae: Vec<f64>,
    pub dataset_size: usize,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::WriteFailed {
            path: path.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::WriteFailed {
        path: path.to_path_buf(),
        source,
    })
}

pub fn splits_to_text(splits: &Splits) -> String {
    let mut out = String::from("[holdout]\n");
    for i in &splits.holdout {
        out.push_str(&format!("{i}\n"));
    }
    for (f, fold) in splits.folds.iter().enumerate() {
        out.push_str(&format!("[fold{f}.train]\n"));
        for i in &fold.train {
            out.push_str(&format!("{i}\n"));
        }
        out.push_str(&format!("[fold{f}.val]\n"));
        for i in &fold.val {
            out.push_str(&format!("{i}\n"));
        }
    }
    out
}

pub fn splits_from_text(text: &str) -> Result<Splits> {
    let mut holdout = Vec::new();
    let mut folds: Vec<FoldIndices> = Vec::new();
    #[derive(Clone, Copy)]
    enum Section {
        None,
        Holdout,
        Train(usize),
        Val(usize),
    }
    let mut section = Section::None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = if name == "holdout" {
                Section::Holdout
            } else if let Some(rest) = name.strip_prefix("fold") {
                let (num, kind) = rest.split_once('.').ok_or_else(|| {
                    CliError::Internal(format!("splits line {}: bad section '{name}'", lineno + 1))
                })?;
                let idx: usize = num.parse().map_err(|_| {
                    CliError::Internal(format!("splits line {}: bad fold '{num}'", lineno + 1))
                })?;
                while folds.len() <= idx {
                    folds.push(FoldIndices {
                        train: Vec::new(),
                        val: Vec::new(),
                    });
                }
                match kind {
                    "train" => Section::Train(idx),
                    "val" => Section::Val(idx),
                    other => {
                        return Err(CliError::Internal(format!(
                            "splits line {}: unknown subsection '{other}'",
                            lineno + 1
                        )))
                    }
                }
            } else {
                return Err(CliError::Internal(format!(
                    "splits line {}: unknown section '{name}'",
                    lineno + 1
                )));
            };
            continue;
        }
        let value: usize = line.parse().map_err(|_| {
            CliError::Internal(format!("splits line {}: bad index '{line}'", lineno + 1))
        })?;
        match section {
            Section::Holdout => holdout.push(value),
            Section::Train(i) => folds[i].train.push(value),
            Section::Val(i) => folds[i].val.push(value),
            Section::None => {
                return Err(CliError::Internal(format!(
                    "splits line {}: index before any section",
                    lineno + 1
                )))
            }
        }
    }
    Ok(Splits { holdout, folds })
}

pub fn history_to_csv(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch,train_loss,val_mae\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.epoch, h.train_loss, h.val_mae));
    }
    out
}

pub fn history_from_csv(text: &str) -> Result<Vec<EpochStats>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || CliError::Internal(format!("history line {}: bad row", lineno + 1));
        let epoch = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let train_loss = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let val_mae = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        out.push(EpochStats {
            epoch,
            train_loss,
            val_mae,
        });
    }
    Ok(out)
}

/// Persist a trained ensemble plus its configuration into `run_dir`.
pub fn save_run(
    run_dir: &Path,
    cfg: &RunConfig,
    ensemble: &Ensemble,
    dataset_size: usize,
) -> Result<()> {
    let config_json = serde_json::to_string_pretty(cfg)
        .map_err(|e| CliError::Internal(format!("config serialization: {e}")))?;
    write_atomic(&run_dir.join("config.json"), config_json.as_bytes())?;
    write_atomic(
        &run_dir.join("splits.txt"),
        splits_to_text(&ensemble.splits).as_bytes(),
    )?;
    let checkpoints = ensemble.checkpoints(cfg.seed);
    for (member, ck) in ensemble.members.iter().zip(&checkpoints) {
        let fold_dir = run_dir.join(format!("fold{}", member.outcome.fold));
        write_atomic(
            &fold_dir.join("checkpoint.manifest"),
            manifest_to_text(&ck.manifest).as_bytes(),
        )?;
        write_atomic(&fold_dir.join("checkpoint.bin"), &ck.payload_bytes())?;
        write_atomic(
            &fold_dir.join("history.csv"),
            history_to_csv(&member.outcome.history).as_bytes(),
        )?;
    }
    let summary = RunSummary {
        schema_version: lexaug_core::checkpoint::SCHEMA_VERSION,
        model: cfg.model.label().to_string(),
        vocab_hash: hash_hex(ensemble.vocab_hash),
        model_hash: hash_hex(ensemble.model_hash(cfg.seed)),
        folds: ensemble.members.len(),
        fold_val_mae: ensemble.members.iter().map(|m| m.outcome.val_mae).collect(),
        dataset_size,
    };
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Internal(format!("summary serialization: {e}")))?;
    write_atomic(&run_dir.join("run.json"), summary_json.as_bytes())?;
    Ok(())
}

/// A run directory loaded back into memory.
pub struct LoadedRun {
    pub config: RunConfig,
    pub summary: RunSummary,
    pub ensemble: Ensemble,
}

fn run_read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|_| CliError::BadRunDir {
        path: path.parent().unwrap_or(path).to_path_buf(),
        message: format!("missing {}", path.display()),
    })
}

pub fn load_run(run_dir: &Path) -> Result<LoadedRun> {
    if !run_dir.is_dir() {
        return Err(CliError::BadRunDir {
            path: run_dir.to_path_buf(),
            message: "not a directory".into(),
        });
    }
    let config: RunConfig = serde_json::from_str(&run_read(&run_dir.join("config.json"))?)
        .map_err(|e| CliError::BadRunDir {
            path: run_dir.to_path_buf(),
            message: format!("config.json: {e}"),
        })?;
    let summary: RunSummary =
        serde_json::from_str(&run_read(&run_dir.join("run.json"))?).map_err(|e| {
            CliError::BadRunDir {
                path: run_dir.to_path_buf(),
                message: format!("run.json: {e}"),
            }
        })?;
    let splits = splits_from_text(&run_read(&run_dir.join("splits.txt"))?)?;

    let mut members = Vec::with_capacity(summary.folds);
    let mut vocab_hash = 0u64;
    for fold in 0..summary.folds {
        let fold_dir = run_dir.join(format!("fold{fold}"));
        let manifest = manifest_from_text(&run_read(&fold_dir.join("checkpoint.manifest"))?)?;
        let payload_bytes =
            fs::read(fold_dir.join("checkpoint.bin")).map_err(|_| CliError::BadRunDir {
                path: run_dir.to_path_buf(),
                message: format!("missing fold{fold}/checkpoint.bin"),
            })?;
        let payload = Checkpoint::payload_from_bytes(&payload_bytes)?;
        vocab_hash = manifest.vocab_hash;
        let val_mae = manifest.val_mae.unwrap_or(f64::NAN);
        let ck = Checkpoint { manifest, payload };
        let model = ck.restore()?;
        let history = history_from_csv(&run_read(&fold_dir.join("history.csv"))?)?;
        let best_epoch = history
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.val_mae.partial_cmp(&b.1.val_mae).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        members.push(EnsembleMember {
            model,
            outcome: FoldOutcome {
                fold: fold as u32,
                best_epoch,
                val_mae,
                history,
            },
        });
    }
    let ensemble = Ensemble {
        members,
        splits,
        spec: config.split_spec(),
        vocab_hash,
    };
    Ok(LoadedRun {
        config,
        summary,
        ensemble,
    })
}

/// Words file: one word per line, blank lines and `#` comments skipped.
pub fn read_words_file(path: &Path) -> Result<Vec<String>> {
    let text = crate::dataset::read_text(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_string())
        .collect())
}

pub fn default_eval_dir(run_dir: &Path) -> PathBuf {
    run_dir.join("eval")
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexaug_core::train::{make_splits, SplitSpec};

    #[test]
    fn splits_text_round_trip() {
        let spec = SplitSpec {
            holdout_fraction: 0.2,
            folds: 3,
            seed: 5,
        };
        let splits = make_splits(60, &spec).unwrap();
        let text = splits_to_text(&splits);
        let back = splits_from_text(&text).unwrap();
        assert_eq!(splits, back);
        assert_eq!(text, splits_to_text(&back));
    }

    #[test]
    fn history_csv_round_trip() {
        let history = vec![
            EpochStats {
                epoch: 0,
                train_loss: 2.5,
                val_mae: 1.25,
            },
            EpochStats {
                epoch: 1,
                train_loss: 1.75,
                val_mae: 1.0625,
            },
        ];
        let text = history_to_csv(&history);
        assert_eq!(history_from_csv(&text).unwrap(), history);
    }

    #[test]
    fn malformed_splits_are_rejected() {
        assert!(splits_from_text("3\n").is_err());
        assert!(splits_from_text("[weird]\n3\n").is_err());
        assert!(splits_from_text("[holdout]\nabc\n").is_err());
    }
}
