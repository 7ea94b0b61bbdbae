//! Holdout split, k-fold cross-validation, per-fold training loops, and
//! ensemble assembly.
//!
//! The holdout is removed first and never touched by any fold; the k fold
//! validation sets exactly partition the remainder. Every stochastic choice
//! (shuffles, dropout, init) draws from a stream derived from the run seed,
//! so a `(seed, data, config)` triple reproduces the ensemble in
//! single-threaded runs.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::checkpoint::Checkpoint;
use crate::eval::mae;
use crate::nn::{AdamConfig, AdamState, DropoutPlan, Regressor};
use crate::rng::{fnv1a, Rng};
use crate::tokenize::TokenSequence;

/// Holdout and cross-validation geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub holdout_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            holdout_fraction: 0.2,
            folds: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub holdout: Vec<usize>,
    pub folds: Vec<FoldIndices>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    DatasetTooSmall { n: usize, minimum: usize },
    BadSpec { reason: String },
    Diverged { fold: u32, epoch: usize },
    EmptyFold { fold: u32 },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::DatasetTooSmall { n, minimum } => {
                write!(f, "dataset of {n} items is below the minimum {minimum}")
            }
            TrainError::BadSpec { reason } => write!(f, "invalid split spec: {reason}"),
            TrainError::Diverged { fold, epoch } => {
                write!(
                    f,
                    "training diverged (non-finite loss) in fold {fold} at epoch {epoch}"
                )
            }
            TrainError::EmptyFold { fold } => write!(f, "fold {fold} has an empty subset"),
        }
    }
}

impl core::error::Error for TrainError {}

/// Seeded shuffle, then: the first `round(n * holdout_fraction)` indices
/// become the holdout; the remainder is cut into `folds` validation chunks
/// (as equal as integer division permits), each fold training on the other
/// chunks.
pub fn make_splits(n: usize, spec: &SplitSpec) -> Result<Splits, TrainError> {
    if spec.folds < 2 {
        return Err(TrainError::BadSpec {
            reason: format!("need at least 2 folds, got {}", spec.folds),
        });
    }
    if !(0.0..1.0).contains(&spec.holdout_fraction) {
        return Err(TrainError::BadSpec {
            reason: format!("holdout fraction {} outside [0, 1)", spec.holdout_fraction),
        });
    }
    let minimum = 10 * spec.folds;
    if n < minimum {
        return Err(TrainError::DatasetTooSmall { n, minimum });
    }
    let mut rng = Rng::derive(spec.seed, "splits");
    let order = rng.permutation(n);
    let n_holdout = libm::round(n as f64 * spec.holdout_fraction) as usize;
    let holdout = order[..n_holdout].to_vec();
    let rest = &order[n_holdout..];
    let m = rest.len();
    let base = m / spec.folds;
    let extra = m % spec.folds;
    let mut folds = Vec::with_capacity(spec.folds);
    let mut cursor = 0usize;
    for i in 0..spec.folds {
        let size = base + usize::from(i < extra);
        let val = rest[cursor..cursor + size].to_vec();
        let mut train = Vec::with_capacity(m - size);
        train.extend_from_slice(&rest[..cursor]);
        train.extend_from_slice(&rest[cursor + size..]);
        folds.push(FoldIndices { train, val });
        cursor += size;
    }
    Ok(Splits { holdout, folds })
}

/// Per-fold training settings. `patience` counts epochs without validation
/// improvement before stopping early; 0 disables early stopping.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 500,
            batch_size: 32,
            patience: 50,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold: u32,
    pub best_epoch: usize,
    pub val_mae: f64,
    pub history: Vec<EpochStats>,
}

/// In-memory training data: encoded sequences with targets, row-aligned
/// with the source words.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub words: Vec<String>,
    pub seqs: Vec<TokenSequence>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }
}

fn val_mae(model: &dyn Regressor, data: &Dataset, idx: &[usize]) -> f64 {
    let preds: Vec<f64> = idx
        .iter()
        .map(|&i| model.predict_one(&data.seqs[i], &mut DropoutPlan::infer()))
        .collect();
    let truth: Vec<f64> = idx.iter().map(|&i| data.targets[i]).collect();
    mae(&preds, &truth).unwrap_or(f64::INFINITY)
}

/// Train one fold with mini-batch Adam, early stopping on validation MAE,
/// and best-epoch weight restoration. The model ends up holding the
/// best-validation parameters.
pub fn train_fold(
    model: &mut dyn Regressor,
    data: &Dataset,
    fold_idx: &FoldIndices,
    cfg: &TrainConfig,
    fold: u32,
) -> Result<FoldOutcome, TrainError> {
    if fold_idx.train.is_empty() || fold_idx.val.is_empty() {
        return Err(TrainError::EmptyFold { fold });
    }
    let mut shuffle_rng = Rng::derive(cfg.seed, &format!("fold.{fold}.shuffle"));
    let mut dropout_rng = Rng::derive(cfg.seed, &format!("fold.{fold}.dropout"));
    let n_params = model.params().len();
    let mut adam = AdamState::new(n_params);
    let mut grad = alloc::vec![0.0; n_params];
    let frozen = model.frozen_ranges();

    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut best_mae = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = model.params().data().to_vec();
    let mut since_best = 0usize;

    let mut order = fold_idx.train.clone();
    for epoch in 0..cfg.max_epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let seqs: Vec<&TokenSequence> = batch.iter().map(|&i| &data.seqs[i]).collect();
            let targets: Vec<f64> = batch.iter().map(|&i| data.targets[i]).collect();
            for g in grad.iter_mut() {
                *g = 0.0;
            }
            let mut plan = DropoutPlan::train(Rng::seed_from(dropout_rng.next_u64()));
            let loss = model.batch_grad(&seqs, &targets, &mut plan, &mut grad);
            if !loss.is_finite() {
                return Err(TrainError::Diverged { fold, epoch });
            }
            for r in &frozen {
                for g in &mut grad[r.clone()] {
                    *g = 0.0;
                }
            }
            adam.step(&cfg.adam, model.params_mut().data_mut(), &grad);
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        if !model.params().all_finite() {
            return Err(TrainError::Diverged { fold, epoch });
        }
        let train_loss = loss_sum / seen as f64;
        let epoch_val_mae = val_mae(model, data, &fold_idx.val);
        history.push(EpochStats {
            epoch,
            train_loss,
            val_mae: epoch_val_mae,
        });
        if epoch_val_mae < best_mae {
            best_mae = epoch_val_mae;
            best_epoch = epoch;
            best_params.copy_from_slice(model.params().data());
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                break;
            }
        }
    }
    model.params_mut().data_mut().copy_from_slice(&best_params);
    Ok(FoldOutcome {
        fold,
        best_epoch,
        val_mae: best_mae,
        history,
    })
}

/// One trained fold member.
pub struct EnsembleMember {
    pub model: Box<dyn Regressor>,
    pub outcome: FoldOutcome,
}

/// The k trained fold models plus everything needed to reproduce and
/// serialize them.
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
    pub splits: Splits,
    pub spec: SplitSpec,
    pub vocab_hash: u64,
}

impl Ensemble {
    /// Checkpoints in fold order.
    pub fn checkpoints(&self, seed: u64) -> Vec<Checkpoint> {
        self.members
            .iter()
            .map(|m| {
                Checkpoint::capture(
                    m.model.as_ref(),
                    seed,
                    m.outcome.fold,
                    self.vocab_hash,
                    Some(m.outcome.val_mae),
                )
            })
            .collect()
    }

    /// Stable content hash over the member manifests; identifies the model
    /// set in augmented-lexicon output.
    pub fn model_hash(&self, seed: u64) -> u64 {
        let text: String = self
            .checkpoints(seed)
            .iter()
            .map(|c| crate::checkpoint::manifest_to_text(&c.manifest))
            .collect();
        fnv1a(text.as_bytes())
    }
}

/// Train all folds and assemble the ensemble. `factory` builds a fresh
/// seeded model for each fold.
pub fn train_ensemble(
    factory: &mut dyn FnMut(u32, &mut Rng) -> Box<dyn Regressor>,
    data: &Dataset,
    splits: &Splits,
    spec: &SplitSpec,
    cfg: &TrainConfig,
    vocab_hash: u64,
) -> Result<Ensemble, TrainError> {
    let mut members = Vec::with_capacity(splits.folds.len());
    for (i, fold_idx) in splits.folds.iter().enumerate() {
        let fold = i as u32;
        let mut init_rng = Rng::derive(cfg.seed, &format!("fold.{fold}.init"));
        let mut model = factory(fold, &mut init_rng);
        let outcome = train_fold(model.as_mut(), data, fold_idx, cfg, fold)?;
        members.push(EnsembleMember { model, outcome });
    }
    Ok(Ensemble {
        members,
        splits: splits.clone(),
        spec: spec.clone(),
        vocab_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{TokenModel, TokenModelConfig};
    use alloc::vec;

    #[test]
    fn split_sizes_match_arithmetic() {
        let spec = SplitSpec {
            holdout_fraction: 0.2,
            folds: 5,
            seed: 7,
        };
        let splits = make_splits(1000, &spec).unwrap();
        assert_eq!(splits.holdout.len(), 200);
        for fold in &splits.folds {
            assert_eq!(fold.val.len(), 160);
            assert_eq!(fold.train.len(), 640);
        }
    }

    #[test]
    fn fold_validation_sets_partition_the_rest() {
        let spec = SplitSpec {
            holdout_fraction: 0.2,
            folds: 5,
            seed: 11,
        };
        let n = 803; // deliberately not divisible
        let splits = make_splits(n, &spec).unwrap();
        let mut seen = vec![0usize; n];
        for &i in &splits.holdout {
            seen[i] += 1;
        }
        for fold in &splits.folds {
            for &i in &fold.val {
                seen[i] += 1;
            }
        }
        assert!(
            seen.iter().all(|&c| c == 1),
            "holdout + fold vals must cover each index once"
        );
        // train sets exclude holdout and own val
        for fold in &splits.folds {
            for &i in &fold.train {
                assert!(!splits.holdout.contains(&i));
                assert!(!fold.val.contains(&i));
            }
            assert_eq!(fold.train.len() + fold.val.len() + splits.holdout.len(), n);
        }
    }

    #[test]
    fn splits_are_seeded_and_deterministic() {
        let spec = SplitSpec {
            holdout_fraction: 0.2,
            folds: 5,
            seed: 3,
        };
        assert_eq!(
            make_splits(200, &spec).unwrap(),
            make_splits(200, &spec).unwrap()
        );
        let other = SplitSpec { seed: 4, ..spec };
        assert_ne!(
            make_splits(200, &spec).unwrap(),
            make_splits(200, &other).unwrap()
        );
    }

    #[test]
    fn small_datasets_are_rejected() {
        let spec = SplitSpec::default();
        assert!(matches!(
            make_splits(49, &spec),
            Err(TrainError::DatasetTooSmall { minimum: 50, .. })
        ));
        assert!(make_splits(50, &spec).is_ok());
    }

    fn toy_dataset(n: usize) -> Dataset {
        // target is a linear function of which tokens appear, so the model
        // has real signal to learn
        let mut words = Vec::new();
        let mut seqs = Vec::new();
        let mut targets = Vec::new();
        for i in 0..n {
            let a = 2 + (i % 7) as u32;
            let b = 2 + ((i / 7) % 5) as u32 + 7;
            words.push(alloc::format!("w{i}"));
            seqs.push(TokenSequence::new(&[a, b], 6, 0));
            targets.push(2.0 + 0.5 * (a as f64) + 0.25 * (b as f64));
        }
        Dataset {
            words,
            seqs,
            targets,
        }
    }

    fn toy_model_cfg() -> TokenModelConfig {
        TokenModelConfig {
            vocab_size: 16,
            embed_dim: 6,
            hidden: vec![8, 4],
            dropout: 0.1,
            train_embeddings: true,
        }
    }

    #[test]
    fn training_reduces_loss_on_toy_data() {
        let data = toy_dataset(100);
        let fold_idx = FoldIndices {
            train: (0..80).collect(),
            val: (80..100).collect(),
        };
        let cfg = TrainConfig {
            max_epochs: 120,
            patience: 0,
            seed: 5,
            ..TrainConfig::default()
        };
        let mut model = TokenModel::new(toy_model_cfg(), &mut Rng::seed_from(2));
        let outcome = train_fold(&mut model, &data, &fold_idx, &cfg, 0).unwrap();
        let first = outcome.history.first().unwrap().train_loss;
        let last = outcome.history.last().unwrap().train_loss;
        assert!(last < first / 2.0, "train loss {first} -> {last}");
        assert_eq!(outcome.history.len(), 120, "patience 0 runs every epoch");
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let data = toy_dataset(60);
        let fold_idx = FoldIndices {
            train: (0..50).collect(),
            val: (50..60).collect(),
        };
        let cfg = TrainConfig {
            max_epochs: 5,
            patience: 0,
            adam: AdamConfig {
                lr: 0.0,
                ..AdamConfig::default()
            },
            seed: 5,
            ..TrainConfig::default()
        };
        let mut model = TokenModel::new(toy_model_cfg(), &mut Rng::seed_from(3));
        let before = model.params().data().to_vec();
        let outcome = train_fold(&mut model, &data, &fold_idx, &cfg, 0).unwrap();
        assert_eq!(model.params().data(), &before[..]);
        let flat: Vec<f64> = outcome.history.iter().map(|h| h.val_mae).collect();
        assert!(
            flat.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12),
            "history must be flat"
        );
    }

    #[test]
    fn best_epoch_matches_history_minimum() {
        let data = toy_dataset(80);
        let fold_idx = FoldIndices {
            train: (0..64).collect(),
            val: (64..80).collect(),
        };
        let cfg = TrainConfig {
            max_epochs: 60,
            patience: 0,
            seed: 9,
            ..TrainConfig::default()
        };
        let mut model = TokenModel::new(toy_model_cfg(), &mut Rng::seed_from(4));
        let outcome = train_fold(&mut model, &data, &fold_idx, &cfg, 0).unwrap();
        let min = outcome
            .history
            .iter()
            .map(|h| h.val_mae)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(outcome.val_mae, min);
        assert_eq!(outcome.history[outcome.best_epoch].val_mae, min);
        // restored parameters actually reproduce the reported val MAE
        let check = val_mae(&model, &data, &fold_idx.val);
        assert!((check - min).abs() < 1e-12);
    }

    #[test]
    fn ensembles_have_k_members_and_reproduce() {
        let data = toy_dataset(100);
        let spec = SplitSpec {
            holdout_fraction: 0.2,
            folds: 5,
            seed: 21,
        };
        let splits = make_splits(data.len(), &spec).unwrap();
        let cfg = TrainConfig {
            max_epochs: 10,
            patience: 0,
            seed: 21,
            ..TrainConfig::default()
        };
        let mut factory = |_fold: u32, rng: &mut Rng| -> Box<dyn Regressor> {
            Box::new(TokenModel::new(toy_model_cfg(), rng))
        };
        let a = train_ensemble(&mut factory, &data, &splits, &spec, &cfg, 777).unwrap();
        assert_eq!(a.members.len(), 5);
        let b = train_ensemble(&mut factory, &data, &splits, &spec, &cfg, 777).unwrap();
        for (ma, mb) in a.members.iter().zip(&b.members) {
            assert_eq!(ma.model.params().data(), mb.model.params().data());
            assert_eq!(ma.outcome.val_mae, mb.outcome.val_mae);
        }
        assert_eq!(a.model_hash(21), b.model_hash(21));
        // no holdout index leaks into any fold
        for fold in &a.splits.folds {
            for &i in &a.splits.holdout {
                assert!(!fold.train.contains(&i) && !fold.val.contains(&i));
            }
        }
    }

    #[test]
    fn divergence_reports_fold_id() {
        let data = toy_dataset(60);
        let fold_idx = FoldIndices {
            train: (0..50).collect(),
            val: (50..60).collect(),
        };
        // absurd learning rate forces non-finite loss quickly
        let cfg = TrainConfig {
            max_epochs: 200,
            patience: 0,
            adam: AdamConfig {
                lr: 1e150,
                ..AdamConfig::default()
            },
            seed: 5,
            ..TrainConfig::default()
        };
        let mut model = TokenModel::new(toy_model_cfg(), &mut Rng::seed_from(8));
        match train_fold(&mut model, &data, &fold_idx, &cfg, 3) {
            Err(TrainError::Diverged { fold: 3, .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
