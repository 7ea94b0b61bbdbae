//! Monte-Carlo-dropout prediction with uncertainty, ensemble aggregation,
//! and augmented-lexicon row emission.
//!
//! Each ensemble member contributes `samples_per_model` stochastic forward
//! passes with dropout in its training configuration; the pooled sample mean
//! is the predicted score and the pooled population standard deviation the
//! uncertainty estimate. Pooling over all members captures both
//! within-model (dropout) and between-model (fold) variance.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::eval::clip_to_scale;
use crate::lexicon::{normalize_word, Lexicon};
use crate::nn::{DropoutPlan, Regressor};
use crate::rng::{hash_hex, Rng};
use crate::tokenize::TokenSequence;
use crate::train::Ensemble;

/// Monte-Carlo sampling settings.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub samples_per_model: usize,
    /// Run dropout in its training configuration while sampling. Turning
    /// this off makes every sample a plain deterministic forward pass.
    pub train_mode_dropout: bool,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples_per_model: 100,
            train_mode_dropout: true,
            seed: 0,
        }
    }
}

/// A scored word with its uncertainty band.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub word: String,
    /// Raw pooled sample mean; clip at the report layer only.
    pub h_hat: f64,
    /// Population standard deviation of the pooled samples.
    pub sigma_hat: f64,
    pub n_samples: usize,
    pub model_folds: Vec<u32>,
}

impl Prediction {
    /// Score clipped to the happiness scale, for reports.
    pub fn reported_score(&self) -> f64 {
        clip_to_scale(self.h_hat)
    }

    /// Raw uncertainty interval `h_hat +/- sigma_hat`.
    pub fn interval(&self) -> (f64, f64) {
        (self.h_hat - self.sigma_hat, self.h_hat + self.sigma_hat)
    }

    /// Interval clipped to the happiness scale, for reports.
    pub fn reported_interval(&self) -> (f64, f64) {
        let (lo, hi) = self.interval();
        (clip_to_scale(lo), clip_to_scale(hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictError {
    EmptyWord,
    EmptyEnsemble,
    NoSamples,
}

impl fmt::Display for PredictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictError::EmptyWord => write!(f, "cannot predict an empty word"),
            PredictError::EmptyEnsemble => write!(f, "ensemble has no members"),
            PredictError::NoSamples => write!(f, "samples_per_model must be at least 1"),
        }
    }
}

impl core::error::Error for PredictError {}

/// Pool MC-dropout samples from every member for one encoded word.
///
/// Sampling streams derive from `(seed, word, member)`, so per-word and
/// per-member work can run in parallel without changing the result.
pub fn mc_predict(
    members: &[(u32, &dyn Regressor)],
    word: &str,
    seq: &TokenSequence,
    cfg: &McConfig,
) -> Result<Prediction, PredictError> {
    let word = normalize_word(word);
    if word.is_empty() {
        return Err(PredictError::EmptyWord);
    }
    if members.is_empty() {
        return Err(PredictError::EmptyEnsemble);
    }
    if cfg.samples_per_model == 0 {
        return Err(PredictError::NoSamples);
    }
    let mut samples = Vec::with_capacity(members.len() * cfg.samples_per_model);
    let mut model_folds = Vec::with_capacity(members.len());
    for (fold, model) in members {
        model_folds.push(*fold);
        let mut stream = Rng::derive(cfg.seed, &format!("mc.{word}.{fold}"));
        for _ in 0..cfg.samples_per_model {
            let mut plan = if cfg.train_mode_dropout {
                DropoutPlan::train(Rng::seed_from(stream.next_u64()))
            } else {
                DropoutPlan::infer()
            };
            samples.push(model.predict_one(seq, &mut plan));
        }
    }
    let n = samples.len();
    // A constant sample set must report exactly zero spread; summation
    // rounding would otherwise leak in at the 1e-19 level.
    let first = samples[0];
    let (mean, sigma) = if samples.iter().all(|&s| s == first) {
        (first, 0.0)
    } else {
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
        (mean, libm::sqrt(var))
    };
    Ok(Prediction {
        word,
        h_hat: mean,
        sigma_hat: sigma,
        n_samples: n,
        model_folds,
    })
}

/// Convenience wrapper over a trained [`Ensemble`].
pub fn mc_predict_ensemble(
    ensemble: &Ensemble,
    word: &str,
    seq: &TokenSequence,
    cfg: &McConfig,
) -> Result<Prediction, PredictError> {
    let members: Vec<(u32, &dyn Regressor)> = ensemble
        .members
        .iter()
        .map(|m| (m.outcome.fold, m.model.as_ref()))
        .collect();
    mc_predict(&members, word, seq, cfg)
}

/// Why a requested word produced no model row.
#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// The word already carries a human rating; rerun with force to rescore.
    AlreadyRated,
    /// The word could not be encoded (empty after normalization).
    Unencodable(String),
}

/// One augmentation outcome: a prediction, or the reason it was skipped.
#[derive(Debug, Clone)]
pub struct AugmentRow {
    pub word: String,
    pub prediction: Option<Prediction>,
    pub skipped: Option<SkipReason>,
}

/// Score a word list against the ensemble, skipping human-rated words
/// unless `force` is set. Per-word failures are recorded in the row, never
/// fatal.
pub fn augment_lexicon(
    ensemble: &Ensemble,
    encode: &mut dyn FnMut(&str) -> Option<TokenSequence>,
    lexicon: &Lexicon,
    words: &[String],
    cfg: &McConfig,
    force: bool,
) -> Vec<AugmentRow> {
    words
        .iter()
        .map(|raw| {
            let word = normalize_word(raw);
            if word.is_empty() {
                return AugmentRow {
                    word: raw.clone(),
                    prediction: None,
                    skipped: Some(SkipReason::Unencodable(
                        "empty after normalization".to_string(),
                    )),
                };
            }
            if !force && lexicon.contains(&word) {
                return AugmentRow {
                    word,
                    prediction: None,
                    skipped: Some(SkipReason::AlreadyRated),
                };
            }
            match encode(&word) {
                Some(seq) => match mc_predict_ensemble(ensemble, &word, &seq, cfg) {
                    Ok(prediction) => AugmentRow {
                        word,
                        prediction: Some(prediction),
                        skipped: None,
                    },
                    Err(e) => AugmentRow {
                        word,
                        prediction: None,
                        skipped: Some(SkipReason::Unencodable(format!("{e}"))),
                    },
                },
                None => AugmentRow {
                    word,
                    prediction: None,
                    skipped: Some(SkipReason::Unencodable("no encoding".to_string())),
                },
            }
        })
        .collect()
}

/// Render augmentation output as a labMT-compatible TSV with provenance
/// columns. `happiness_average` carries the clipped score so the file parses
/// as a lexicon; the raw score is preserved alongside.
pub fn augmented_tsv(rows: &[AugmentRow], model_hash: u64) -> String {
    let mut out = String::from(
        "word\thappiness_average\thappiness_standard_deviation\th_hat_raw\tsigma_hat\tn_samples\tprovenance\tmodel_hash\n",
    );
    let hash = hash_hex(model_hash);
    for row in rows {
        if let Some(p) = &row.prediction {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\tmodel\t{}\n",
                p.word,
                p.reported_score(),
                p.sigma_hat,
                p.h_hat,
                p.sigma_hat,
                p.n_samples,
                hash
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{ColumnMap, Lexicon};
    use crate::nn::{Regressor, TokenModel, TokenModelConfig};
    use crate::tokenize::TokenSequence;
    use alloc::boxed::Box;
    use alloc::vec;

    fn model_with_dropout(rate: f64, seed: u64) -> TokenModel {
        let cfg = TokenModelConfig {
            vocab_size: 10,
            embed_dim: 5,
            hidden: vec![6, 3],
            dropout: rate,
            train_embeddings: true,
        };
        TokenModel::new(cfg, &mut Rng::seed_from(seed))
    }

    fn seq() -> TokenSequence {
        TokenSequence::new(&[2, 4, 7], 6, 0)
    }

    #[test]
    fn zero_dropout_is_fully_deterministic() {
        // identical members, no dropout: every pooled sample coincides, so
        // the population sigma is exactly zero
        let m0 = model_with_dropout(0.0, 1);
        let m1 = model_with_dropout(0.0, 1);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0), (1, &m1)];
        let cfg = McConfig {
            samples_per_model: 50,
            ..McConfig::default()
        };
        let p = mc_predict(&members, "word", &seq(), &cfg).unwrap();
        assert_eq!(p.sigma_hat, 0.0);
        assert_eq!(p.n_samples, 100);
        assert_eq!(p.h_hat, m0.predict_one(&seq(), &mut DropoutPlan::infer()));
    }

    #[test]
    fn zero_dropout_pools_member_means_and_spread() {
        // distinct members, no dropout: the pooled mean is the mean of the
        // deterministic member outputs and sigma is pure between-model spread
        let m0 = model_with_dropout(0.0, 1);
        let m1 = model_with_dropout(0.0, 2);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0), (1, &m1)];
        let cfg = McConfig {
            samples_per_model: 50,
            ..McConfig::default()
        };
        let p = mc_predict(&members, "word", &seq(), &cfg).unwrap();
        let d0 = m0.predict_one(&seq(), &mut DropoutPlan::infer());
        let d1 = m1.predict_one(&seq(), &mut DropoutPlan::infer());
        assert!((p.h_hat - (d0 + d1) / 2.0).abs() < 1e-12);
        let mean = (d0 + d1) / 2.0;
        let between = libm::sqrt(((d0 - mean) * (d0 - mean) + (d1 - mean) * (d1 - mean)) / 2.0);
        assert!((p.sigma_hat - between).abs() < 1e-12);
    }

    #[test]
    fn active_dropout_gives_positive_sigma() {
        let m0 = model_with_dropout(0.5, 3);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0)];
        let cfg = McConfig {
            samples_per_model: 100,
            ..McConfig::default()
        };
        let p = mc_predict(&members, "word", &seq(), &cfg).unwrap();
        assert!(p.sigma_hat > 0.0);
        assert_eq!(p.n_samples, 100);
    }

    #[test]
    fn five_members_hundred_samples_each() {
        let models: Vec<TokenModel> = (0..5).map(|i| model_with_dropout(0.5, i)).collect();
        let members: Vec<(u32, &dyn Regressor)> = models
            .iter()
            .enumerate()
            .map(|(i, m)| (i as u32, m as &dyn Regressor))
            .collect();
        let p = mc_predict(&members, "word", &seq(), &McConfig::default()).unwrap();
        assert_eq!(p.n_samples, 500);
        assert_eq!(p.model_folds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn constant_model_predicts_its_bias() {
        let mut m = model_with_dropout(0.5, 4);
        let n = m.params().len();
        let bias_offset = {
            let spec = m
                .params()
                .specs()
                .iter()
                .find(|s| s.name == "head.out.b")
                .unwrap();
            spec.offset
        };
        let data = m.params_mut().data_mut();
        for v in data.iter_mut().take(n) {
            *v = 0.0;
        }
        data[bias_offset] = 4.25;
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m)];
        let p = mc_predict(&members, "word", &seq(), &McConfig::default()).unwrap();
        assert_eq!(p.h_hat, 4.25);
        assert_eq!(p.sigma_hat, 0.0);
    }

    #[test]
    fn pooled_mean_matches_recorded_samples() {
        // aggregate invariant: h_hat is exactly the arithmetic mean
        let m0 = model_with_dropout(0.5, 5);
        let m1 = model_with_dropout(0.5, 6);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0), (1, &m1)];
        let cfg = McConfig {
            samples_per_model: 40,
            seed: 9,
            ..McConfig::default()
        };
        let p = mc_predict(&members, "thing", &seq(), &cfg).unwrap();
        // reproduce the sampling by hand
        let mut samples = Vec::new();
        for (fold, model) in &members {
            let mut stream = Rng::derive(9, &format!("mc.thing.{fold}"));
            for _ in 0..40 {
                let mut plan = DropoutPlan::train(Rng::seed_from(stream.next_u64()));
                samples.push(model.predict_one(&seq(), &mut plan));
            }
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        assert_eq!(p.h_hat, mean);
        assert_eq!(p.n_samples, samples.len());
    }

    #[test]
    fn same_seed_reproduces_prediction() {
        let m0 = model_with_dropout(0.5, 7);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0)];
        let cfg = McConfig {
            samples_per_model: 30,
            seed: 11,
            ..McConfig::default()
        };
        let a = mc_predict(&members, "word", &seq(), &cfg).unwrap();
        let b = mc_predict(&members, "word", &seq(), &cfg).unwrap();
        assert_eq!(a, b);
        let other = McConfig { seed: 12, ..cfg };
        let c = mc_predict(&members, "word", &seq(), &other).unwrap();
        assert_ne!(a.h_hat, c.h_hat);
    }

    #[test]
    fn interval_examples() {
        let p = Prediction {
            word: "x".into(),
            h_hat: 5.0,
            sigma_hat: 1.0,
            n_samples: 1,
            model_folds: vec![0],
        };
        assert_eq!(p.interval(), (4.0, 6.0));
        let p = Prediction {
            h_hat: 8.9,
            sigma_hat: 0.5,
            ..p
        };
        assert_eq!(p.interval(), (8.4, 9.4));
        assert_eq!(p.reported_interval(), (8.4, 9.0));
        let p = Prediction {
            sigma_hat: 0.0,
            ..p
        };
        assert_eq!(p.interval(), (8.9, 8.9));
    }

    #[test]
    fn empty_word_is_rejected() {
        let m0 = model_with_dropout(0.5, 8);
        let members: Vec<(u32, &dyn Regressor)> = vec![(0, &m0)];
        assert_eq!(
            mc_predict(&members, "  ", &seq(), &McConfig::default()).unwrap_err(),
            PredictError::EmptyWord
        );
    }

    fn tiny_ensemble() -> Ensemble {
        use crate::train::{EnsembleMember, FoldOutcome, SplitSpec, Splits};
        let members = (0..2)
            .map(|i| EnsembleMember {
                model: Box::new(model_with_dropout(0.5, 20 + i)) as Box<dyn Regressor>,
                outcome: FoldOutcome {
                    fold: i as u32,
                    best_epoch: 0,
                    val_mae: 0.5,
                    history: vec![],
                },
            })
            .collect();
        Ensemble {
            members,
            splits: Splits {
                holdout: vec![],
                folds: vec![],
            },
            spec: SplitSpec::default(),
            vocab_hash: 1,
        }
    }

    #[test]
    fn augment_skips_rated_words_and_records_failures() {
        let lex = Lexicon::parse_tsv(
            "word\thappiness_average\thappiness_standard_deviation\nknown\t5.0\t1.0\n",
            &ColumnMap::default(),
            "t",
        )
        .unwrap();
        let ensemble = tiny_ensemble();
        let words = vec!["known".to_string(), "fresh".to_string(), "".to_string()];
        let mut encode = |_w: &str| Some(TokenSequence::new(&[2, 3], 6, 0));
        let rows = augment_lexicon(
            &ensemble,
            &mut encode,
            &lex,
            &words,
            &McConfig::default(),
            false,
        );
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].skipped, Some(SkipReason::AlreadyRated));
        assert!(rows[1].prediction.is_some());
        assert!(matches!(rows[2].skipped, Some(SkipReason::Unencodable(_))));
        // forcing rescoring includes the known word
        let rows = augment_lexicon(
            &ensemble,
            &mut encode,
            &lex,
            &words,
            &McConfig::default(),
            true,
        );
        assert!(rows[0].prediction.is_some());
        // empty input produces empty output
        let rows = augment_lexicon(
            &ensemble,
            &mut encode,
            &lex,
            &[],
            &McConfig::default(),
            false,
        );
        assert!(rows.is_empty());
    }

    #[test]
    fn augmented_tsv_parses_back_as_lexicon() {
        let ensemble = tiny_ensemble();
        let lex = Lexicon::parse_tsv(
            "word\thappiness_average\thappiness_standard_deviation\n",
            &ColumnMap::default(),
            "t",
        )
        .unwrap();
        let words = vec!["alpha".to_string(), "beta".to_string()];
        let mut encode = |_w: &str| Some(TokenSequence::new(&[2, 3, 4], 6, 0));
        let rows = augment_lexicon(
            &ensemble,
            &mut encode,
            &lex,
            &words,
            &McConfig::default(),
            false,
        );
        let tsv = augmented_tsv(&rows, 0xabc);
        let parsed = Lexicon::parse_tsv(&tsv, &ColumnMap::default(), "aug").unwrap();
        assert_eq!(parsed.len(), 2);
        for e in parsed.entries() {
            assert!((1.0..=9.0).contains(&e.h_avg));
            assert!(e.sigma >= 0.0);
        }
        assert!(tsv.contains("\tmodel\t"));
        assert!(tsv.contains("0000000000000abc"));
    }
}
