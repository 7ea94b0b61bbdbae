//! Evaluation metrics and report assembly: MAE with percentiles, polarity
//! group breakdowns, top-error tables, interval IOU against human rating
//! bands, and the human-variability baseline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::{Lexicon, SentimentGroup, SCALE_MAX, SCALE_MIN};

/// Percentile ranks reported throughout: 25th, 50th, 75th, 85th, 95th.
pub const REPORT_RANKS: [f64; 5] = [25.0, 50.0, 75.0, 85.0, 95.0];

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    EmptyInput,
    LengthMismatch { left: usize, right: usize },
    BadRank { rank: f64 },
    MalformedInterval { lo: f64, hi: f64 },
    MissingTruth { word: String },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyInput => write!(f, "empty input"),
            EvalError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            EvalError::BadRank { rank } => write!(f, "percentile rank {rank} outside [0, 100]"),
            EvalError::MalformedInterval { lo, hi } => write!(f, "malformed interval [{lo}, {hi}]"),
            EvalError::MissingTruth { word } => write!(f, "no lexicon entry for '{word}'"),
        }
    }
}

impl core::error::Error for EvalError {}

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Linear-interpolation percentile: the value at fractional position
/// `rank/100 * (n-1)` of the sorted sample. Rank 0 is the minimum, 100 the
/// maximum.
pub fn percentile(values: &[f64], rank: f64) -> Result<f64, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if !(0.0..=100.0).contains(&rank) || !rank.is_finite() {
        return Err(EvalError::BadRank { rank });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    if sorted.len() == 1 {
        return Ok(sorted[0]);
    }
    let pos = rank / 100.0 * (sorted.len() - 1) as f64;
    let lo = (pos as usize).min(sorted.len() - 2);
    let frac = pos - lo as f64;
    // land exactly on order statistics at integral positions
    if frac == 0.0 {
        return Ok(sorted[lo]);
    }
    if frac == 1.0 {
        return Ok(sorted[lo + 1]);
    }
    Ok(sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac)
}

/// Percentiles at several ranks in one pass.
pub fn percentiles(values: &[f64], ranks: &[f64]) -> Result<Vec<(f64, f64)>, EvalError> {
    ranks
        .iter()
        .map(|&r| percentile(values, r).map(|v| (r, v)))
        .collect()
}

/// Intersection-over-union of two closed intervals.
///
/// Identical zero-width intervals score 1; disjoint or merely touching
/// intervals with positive union score 0.
pub fn interval_iou(a: (f64, f64), b: (f64, f64)) -> Result<f64, EvalError> {
    if a.0 > a.1 || !a.0.is_finite() || !a.1.is_finite() {
        return Err(EvalError::MalformedInterval { lo: a.0, hi: a.1 });
    }
    if b.0 > b.1 || !b.0.is_finite() || !b.1.is_finite() {
        return Err(EvalError::MalformedInterval { lo: b.0, hi: b.1 });
    }
    let overlap = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - overlap;
    if union == 0.0 {
        // both zero-width: identical points overlap fully
        return Ok(if a.0 == b.0 { 1.0 } else { 0.0 });
    }
    Ok(overlap / union)
}

/// Clip a value to the happiness scale; used only at the reporting layer.
pub fn clip_to_scale(v: f64) -> f64 {
    v.clamp(SCALE_MIN, SCALE_MAX)
}

/// One model prediction headed into a report.
#[derive(Debug, Clone)]
pub struct WordPrediction {
    pub word: String,
    pub h_raw: f64,
    pub sigma_hat: f64,
}

/// Fully-resolved evaluation row for one word.
#[derive(Debug, Clone)]
pub struct WordEval {
    pub word: String,
    pub pred_raw: f64,
    pub pred: f64,
    pub sigma_hat: f64,
    pub truth: f64,
    pub truth_sigma: f64,
    pub abs_err: f64,
    pub group: SentimentGroup,
    pub iou: f64,
}

#[derive(Debug, Clone)]
pub struct GroupStats {
    pub group: SentimentGroup,
    pub n: usize,
    pub mae: f64,
    pub errors: Vec<f64>,
}

/// The full evaluation summary the report files are rendered from.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub n: usize,
    pub mae: f64,
    pub mae_percentiles: Vec<(f64, f64)>,
    pub groups: Vec<GroupStats>,
    pub human_mean_sigma: f64,
    pub human_mean_var: f64,
    pub human_sigma_percentiles: Vec<(f64, f64)>,
    pub human_var_percentiles: Vec<(f64, f64)>,
    pub mean_iou: f64,
    pub iou_percentiles: Vec<(f64, f64)>,
    pub top_errors: Vec<WordEval>,
    pub per_word: Vec<WordEval>,
}

/// Resolve predictions against the lexicon truth.
///
/// Predictions and human bands are both clipped to the scale before interval
/// comparison; absolute errors use the clipped prediction.
pub fn resolve_predictions(
    preds: &[WordPrediction],
    lexicon: &Lexicon,
) -> Result<Vec<WordEval>, EvalError> {
    preds
        .iter()
        .map(|p| {
            let entry = lexicon
                .get(&p.word)
                .ok_or_else(|| EvalError::MissingTruth {
                    word: p.word.clone(),
                })?;
            let pred = clip_to_scale(p.h_raw);
            let pred_band = (
                clip_to_scale(p.h_raw - p.sigma_hat),
                clip_to_scale(p.h_raw + p.sigma_hat),
            );
            let human_band = (
                clip_to_scale(entry.h_avg - entry.sigma),
                clip_to_scale(entry.h_avg + entry.sigma),
            );
            Ok(WordEval {
                word: p.word.clone(),
                pred_raw: p.h_raw,
                pred,
                sigma_hat: p.sigma_hat,
                truth: entry.h_avg,
                truth_sigma: entry.sigma,
                abs_err: (pred - entry.h_avg).abs(),
                group: entry.group(),
                iou: interval_iou(pred_band, human_band)?,
            })
        })
        .collect()
}

/// Split evaluation rows into the three polarity groups (by truth score).
pub fn group_errors(evals: &[WordEval]) -> Vec<GroupStats> {
    SentimentGroup::ALL
        .iter()
        .map(|&group| {
            let errors: Vec<f64> = evals
                .iter()
                .filter(|e| e.group == group)
                .map(|e| e.abs_err)
                .collect();
            let n = errors.len();
            let mae = if n == 0 {
                0.0
            } else {
                errors.iter().sum::<f64>() / n as f64
            };
            GroupStats {
                group,
                n,
                mae,
                errors,
            }
        })
        .collect()
}

/// Highest-|error| rows first, ties broken lexicographically by word,
/// clamped to `k` rows.
pub fn top_errors(evals: &[WordEval], k: usize) -> Vec<WordEval> {
    let mut rows = evals.to_vec();
    rows.sort_by(|a, b| {
        b.abs_err
            .partial_cmp(&a.abs_err)
            .expect("finite errors")
            .then_with(|| a.word.cmp(&b.word))
    });
    rows.truncate(k);
    rows
}

/// Mean human rating deviation and variance over the given sigmas.
pub fn human_baseline(sigmas: &[f64]) -> Result<(f64, f64), EvalError> {
    if sigmas.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = sigmas.len() as f64;
    let mean_sigma = sigmas.iter().sum::<f64>() / n;
    let mean_var = sigmas.iter().map(|s| s * s).sum::<f64>() / n;
    Ok((mean_sigma, mean_var))
}

/// Assemble the full report for a prediction set.
pub fn build_report(
    preds: &[WordPrediction],
    lexicon: &Lexicon,
    top_k: usize,
) -> Result<ErrorReport, EvalError> {
    let evals = resolve_predictions(preds, lexicon)?;
    if evals.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let errors: Vec<f64> = evals.iter().map(|e| e.abs_err).collect();
    let ious: Vec<f64> = evals.iter().map(|e| e.iou).collect();
    let sigmas: Vec<f64> = evals.iter().map(|e| e.truth_sigma).collect();
    let vars: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
    let (human_mean_sigma, human_mean_var) = human_baseline(&sigmas)?;
    Ok(ErrorReport {
        n: evals.len(),
        mae: errors.iter().sum::<f64>() / errors.len() as f64,
        mae_percentiles: percentiles(&errors, &REPORT_RANKS)?,
        groups: group_errors(&evals),
        human_mean_sigma,
        human_mean_var,
        human_sigma_percentiles: percentiles(&sigmas, &REPORT_RANKS)?,
        human_var_percentiles: percentiles(&vars, &REPORT_RANKS)?,
        mean_iou: ious.iter().sum::<f64>() / ious.len() as f64,
        iou_percentiles: percentiles(&ious, &REPORT_RANKS)?,
        top_errors: top_errors(&evals, top_k),
        per_word: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{ColumnMap, Lexicon};
    use crate::rng::Rng;
    use alloc::format;
    use alloc::string::ToString;

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[4.0, 6.0], &[5.0, 6.0]).unwrap(), 0.5);
        assert_eq!(mae(&[3.3, 7.7], &[3.3, 7.7]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0], &[9.0]).unwrap(), 8.0);
        assert!(mae(&[], &[]).is_err());
        assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn percentile_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 50.0).unwrap(), 3.0);
        assert_eq!(percentile(&[7.5], 25.0).unwrap(), 7.5);
        assert_eq!(percentile(&[0.0, 10.0], 25.0).unwrap(), 2.5);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 100.0).unwrap(), 5.0);
        assert!(percentile(&v, 101.0).is_err());
        assert!(percentile(&[], 50.0).is_err());
    }

    #[test]
    fn percentile_matches_independent_oracle_and_is_monotone() {
        // oracle: explicit sort + linear interpolation, written separately
        fn oracle(values: &[f64], rank: f64) -> f64 {
            let mut s = values.to_vec();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if s.len() == 1 {
                return s[0];
            }
            let pos = rank / 100.0 * (s.len() as f64 - 1.0);
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < s.len() {
                s[i] * (1.0 - frac) + s[i + 1] * frac
            } else {
                s[i]
            }
        }
        let mut rng = Rng::seed_from(55);
        for _ in 0..100 {
            let n = 1 + rng.below(40);
            let values: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let mut prev = f64::NEG_INFINITY;
            for rank in [0.0, 10.0, 25.0, 50.0, 75.0, 85.0, 95.0, 100.0] {
                let got = percentile(&values, rank).unwrap();
                let want = oracle(&values, rank);
                assert!((got - want).abs() < 1e-12, "rank {rank}: {got} vs {want}");
                assert!(got >= prev - 1e-12, "not monotone at {rank}");
                prev = got;
            }
        }
    }

    #[test]
    fn iou_examples() {
        assert!((interval_iou((4.0, 6.0), (5.0, 7.0)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(interval_iou((2.0, 3.0), (2.0, 3.0)).unwrap(), 1.0);
        assert_eq!(interval_iou((1.0, 2.0), (3.0, 4.0)).unwrap(), 0.0);
        assert_eq!(interval_iou((1.0, 2.0), (2.0, 4.0)).unwrap(), 0.0); // touching
        assert_eq!(interval_iou((5.0, 5.0), (5.0, 5.0)).unwrap(), 1.0);
        assert_eq!(interval_iou((5.0, 5.0), (6.0, 6.0)).unwrap(), 0.0);
        assert_eq!(interval_iou((5.0, 5.0), (4.0, 6.0)).unwrap(), 0.0); // zero overlap length
        assert!(interval_iou((3.0, 2.0), (1.0, 2.0)).is_err());
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let mut rng = Rng::seed_from(77);
        for _ in 0..500 {
            let a0 = rng.uniform(0.0, 9.0);
            let a = (a0, a0 + rng.uniform(0.0, 3.0));
            let b0 = rng.uniform(0.0, 9.0);
            let b = (b0, b0 + rng.uniform(0.0, 3.0));
            let ab = interval_iou(a, b).unwrap();
            let ba = interval_iou(b, a).unwrap();
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    fn test_lexicon(rows: &[(&str, f64, f64)]) -> Lexicon {
        let mut text = "word\thappiness_average\thappiness_standard_deviation\n".to_string();
        for (w, h, s) in rows {
            text.push_str(&format!("{w}\t{h}\t{s}\n"));
        }
        Lexicon::parse_tsv(&text, &ColumnMap::default(), "test").unwrap()
    }

    #[test]
    fn groups_partition_and_recombine() {
        let lex = test_lexicon(&[
            ("gloom", 2.0, 1.0),
            ("meh", 5.0, 1.0),
            ("blah", 5.5, 1.2),
            ("yay", 8.0, 1.5),
        ]);
        let preds = vec![
            WordPrediction {
                word: "gloom".into(),
                h_raw: 2.5,
                sigma_hat: 0.5,
            },
            WordPrediction {
                word: "meh".into(),
                h_raw: 5.0,
                sigma_hat: 0.4,
            },
            WordPrediction {
                word: "blah".into(),
                h_raw: 6.0,
                sigma_hat: 0.4,
            },
            WordPrediction {
                word: "yay".into(),
                h_raw: 7.0,
                sigma_hat: 0.6,
            },
        ];
        let evals = resolve_predictions(&preds, &lex).unwrap();
        let groups = group_errors(&evals);
        let total_n: usize = groups.iter().map(|g| g.n).sum();
        assert_eq!(total_n, evals.len());
        // weighted recombination equals the overall MAE exactly
        let overall = evals.iter().map(|e| e.abs_err).sum::<f64>() / evals.len() as f64;
        let recombined: f64 =
            groups.iter().map(|g| g.n as f64 * g.mae).sum::<f64>() / total_n as f64;
        assert!((overall - recombined).abs() < 1e-15);
        assert_eq!(groups[0].n, 1);
        assert_eq!(groups[1].n, 2);
        assert_eq!(groups[2].n, 1);
    }

    #[test]
    fn all_neutral_leaves_other_groups_empty() {
        let lex = test_lexicon(&[("a1", 4.5, 1.0), ("b2", 5.5, 1.0)]);
        let preds: Vec<WordPrediction> = ["a1", "b2"]
            .iter()
            .map(|w| WordPrediction {
                word: w.to_string(),
                h_raw: 5.0,
                sigma_hat: 0.1,
            })
            .collect();
        let evals = resolve_predictions(&preds, &lex).unwrap();
        let groups = group_errors(&evals);
        assert_eq!(groups[0].n, 0);
        assert_eq!(groups[2].n, 0);
    }

    #[test]
    fn missing_truth_is_an_error() {
        let lex = test_lexicon(&[("known", 5.0, 1.0)]);
        let preds = vec![WordPrediction {
            word: "unknown".into(),
            h_raw: 5.0,
            sigma_hat: 0.1,
        }];
        assert!(matches!(
            resolve_predictions(&preds, &lex),
            Err(EvalError::MissingTruth { .. })
        ));
    }

    #[test]
    fn top_errors_orders_and_clamps() {
        let lex = test_lexicon(&[("aa", 5.0, 1.0), ("bb", 5.0, 1.0), ("cc", 5.0, 1.0)]);
        let preds = vec![
            WordPrediction {
                word: "aa".into(),
                h_raw: 5.5,
                sigma_hat: 0.1,
            },
            WordPrediction {
                word: "bb".into(),
                h_raw: 5.5,
                sigma_hat: 0.1,
            },
            WordPrediction {
                word: "cc".into(),
                h_raw: 8.0,
                sigma_hat: 0.1,
            },
        ];
        let evals = resolve_predictions(&preds, &lex).unwrap();
        let top = top_errors(&evals, 50);
        assert_eq!(top.len(), 3); // k clamps to the set size
        assert_eq!(top[0].word, "cc"); // outlier first
        assert_eq!(top[1].word, "aa"); // lexicographic tie-break
        assert_eq!(top[2].word, "bb");
        assert_eq!(top_errors(&evals, 1).len(), 1);
    }

    #[test]
    fn human_baseline_examples() {
        let (ms, mv) = human_baseline(&[1.0, 2.0]).unwrap();
        assert_eq!((ms, mv), (1.5, 2.5));
        let (ms, mv) = human_baseline(&[0.7, 0.7, 0.7]).unwrap();
        assert!((ms - 0.7).abs() < 1e-12);
        assert!((mv - 0.49).abs() < 1e-12);
        assert!(human_baseline(&[]).is_err());
    }

    #[test]
    fn report_is_deterministic_and_clips_predictions() {
        let lex = test_lexicon(&[("up", 8.9, 0.5), ("down", 1.2, 0.4)]);
        let preds = vec![
            WordPrediction {
                word: "up".into(),
                h_raw: 9.4,
                sigma_hat: 0.5,
            },
            WordPrediction {
                word: "down".into(),
                h_raw: 0.5,
                sigma_hat: 0.2,
            },
        ];
        let a = build_report(&preds, &lex, 10).unwrap();
        let b = build_report(&preds, &lex, 10).unwrap();
        assert_eq!(a.mae, b.mae);
        assert_eq!(a.per_word[0].pred, 9.0); // clipped
        assert_eq!(a.per_word[0].pred_raw, 9.4); // raw preserved
        assert_eq!(a.per_word[1].pred, 1.0);
        assert!(a.mae_percentiles.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
