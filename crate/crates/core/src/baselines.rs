//! Linear baseline regressors over pooled pre-trained embeddings: exact
//! ridge via a Cholesky solve on centered data, and lasso / elastic net via
//! cyclic coordinate descent with soft-thresholding on standardized columns.
//!
//! The elastic-net objective follows the usual convention:
//! `(1/2N) ||y - Xw - b||^2 + lambda * (alpha ||w||_1 + (1-alpha)/2 ||w||^2)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::eval::{mae, percentiles, REPORT_RANKS};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    None,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
    ElasticNet { lambda: f64, alpha: f64 },
}

impl Regularizer {
    pub fn label(&self) -> String {
        match self {
            Regularizer::None => "ols".into(),
            Regularizer::Ridge { .. } => "ridge".into(),
            Regularizer::Lasso { .. } => "lasso".into(),
            Regularizer::ElasticNet { .. } => "elasticnet".into(),
        }
    }
}

/// Fitted linear regressor.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub regularizer: Regularizer,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Coordinate-descent convergence summary; non-convergence is reported, not
/// silent.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub converged: bool,
    pub sweeps: usize,
    pub max_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineError {
    EmptyData,
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    LengthMismatch {
        rows: usize,
        targets: usize,
    },
    Singular,
    BadParameter {
        reason: String,
    },
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::EmptyData => write!(f, "empty design matrix"),
            BaselineError::RaggedRows {
                row,
                expected,
                found,
            } => {
                write!(f, "row {row} has {found} features, expected {expected}")
            }
            BaselineError::LengthMismatch { rows, targets } => {
                write!(f, "{rows} rows vs {targets} targets")
            }
            BaselineError::Singular => write!(
                f,
                "singular system (rank-deficient X with no ridge penalty)"
            ),
            BaselineError::BadParameter { reason } => write!(f, "bad parameter: {reason}"),
        }
    }
}

impl core::error::Error for BaselineError {}

fn validate(x: &[Vec<f64>], y: &[f64]) -> Result<usize, BaselineError> {
    if x.is_empty() || x[0].is_empty() {
        return Err(BaselineError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(BaselineError::LengthMismatch {
            rows: x.len(),
            targets: y.len(),
        });
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(BaselineError::RaggedRows {
                row: i,
                expected: d,
                found: row.len(),
            });
        }
    }
    Ok(d)
}

fn column_means(x: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut means = vec![0.0; d];
    for row in x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= x.len() as f64;
    }
    means
}

/// Cholesky solve of the SPD system `a x = b` (a is `d x d` row-major).
fn cholesky_solve(a: &mut [f64], b: &mut [f64], d: usize) -> Result<(), BaselineError> {
    // decompose in place: a = L L^T
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if diag <= 1e-12 {
            return Err(BaselineError::Singular);
        }
        let diag = libm::sqrt(diag);
        a[j * d + j] = diag;
        for i in (j + 1)..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / diag;
        }
    }
    // forward substitution: L z = b
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * d + k] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    // back substitution: L^T x = z
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in (i + 1)..d {
            v -= a[k * d + i] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    Ok(())
}

/// Exact ridge regression: solve `(Xc^T Xc + lambda I) w = Xc^T yc` on
/// centered data; the intercept restores the means. The intercept is never
/// penalized.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<LinearModel, BaselineError> {
    let d = validate(x, y)?;
    if lambda < 0.0 {
        return Err(BaselineError::BadParameter {
            reason: format!("lambda {lambda} < 0"),
        });
    }
    let n = x.len();
    let x_means = column_means(x, d);
    let y_mean: f64 = y.iter().sum::<f64>() / n as f64;

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for (row, &yi) in x.iter().zip(y) {
        let yc = yi - y_mean;
        for j in 0..d {
            let xj = row[j] - x_means[j];
            rhs[j] += xj * yc;
            for k in j..d {
                gram[j * d + k] += xj * (row[k] - x_means[k]);
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            gram[j * d + k] = gram[k * d + j];
        }
        gram[j * d + j] += lambda;
    }
    cholesky_solve(&mut gram, &mut rhs, d)?;
    let weights = rhs;
    let intercept = y_mean
        - weights
            .iter()
            .zip(&x_means)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    Ok(LinearModel {
        weights,
        intercept,
        regularizer: if lambda == 0.0 {
            Regularizer::None
        } else {
            Regularizer::Ridge { lambda }
        },
    })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent for lasso (`alpha = 1`) and elastic net.
///
/// Columns are standardized internally; sweeps run until the largest
/// coefficient change (standardized scale) drops below `tol` or `max_iter`
/// sweeps elapse.
pub fn fit_coordinate_descent(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    alpha: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(LinearModel, FitReport), BaselineError> {
    let d = validate(x, y)?;
    if lambda < 0.0 || !(0.0..=1.0).contains(&alpha) {
        return Err(BaselineError::BadParameter {
            reason: format!("lambda {lambda} must be >= 0 and alpha {alpha} in [0, 1]"),
        });
    }
    let n = x.len();
    let x_means = column_means(x, d);
    let y_mean: f64 = y.iter().sum::<f64>() / n as f64;
    let mut stds = vec![0.0; d];
    for row in x {
        for j in 0..d {
            let c = row[j] - x_means[j];
            stds[j] += c * c;
        }
    }
    for s in &mut stds {
        *s = libm::sqrt(*s / n as f64);
    }

    // standardized design, constant columns dropped from updates
    let xs: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            (0..d)
                .map(|j| {
                    if stds[j] > 0.0 {
                        (row[j] - x_means[j]) / stds[j]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut w = vec![0.0; d];
    let mut residual = yc.clone();
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let mut sweeps = 0usize;
    let mut max_delta = f64::INFINITY;
    while sweeps < max_iter {
        max_delta = 0.0;
        for j in 0..d {
            if stds[j] == 0.0 {
                continue;
            }
            let old = w[j];
            // rho = (1/N) x_j . (residual + x_j * w_j); column variance is 1
            let mut rho = 0.0;
            for (row, r) in xs.iter().zip(&residual) {
                rho += row[j] * r;
            }
            rho = rho / n as f64 + old;
            let new = soft_threshold(rho, l1) / (1.0 + l2);
            if new != old {
                let delta = new - old;
                for (row, r) in xs.iter().zip(residual.iter_mut()) {
                    *r -= delta * row[j];
                }
                let change = delta.abs();
                if change > max_delta {
                    max_delta = change;
                }
                w[j] = new;
            }
        }
        sweeps += 1;
        if max_delta < tol {
            break;
        }
    }
    let converged = max_delta < tol;

    // map back to the original scale
    let mut weights = vec![0.0; d];
    for j in 0..d {
        if stds[j] > 0.0 {
            weights[j] = w[j] / stds[j];
        }
    }
    let intercept = y_mean
        - weights
            .iter()
            .zip(&x_means)
            .map(|(wv, m)| wv * m)
            .sum::<f64>();
    let regularizer = if alpha >= 1.0 {
        Regularizer::Lasso { lambda }
    } else {
        Regularizer::ElasticNet { lambda, alpha }
    };
    Ok((
        LinearModel {
            weights,
            intercept,
            regularizer,
        },
        FitReport {
            converged,
            sweeps,
            max_delta,
        },
    ))
}

/// Elastic-net objective value, for monotonicity checks and diagnostics.
pub fn elastic_net_objective(
    x: &[Vec<f64>],
    y: &[f64],
    model: &LinearModel,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let n = x.len() as f64;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let e = yi - model.predict(row);
            e * e
        })
        .sum();
    let l1: f64 = model.weights.iter().map(|w| w.abs()).sum();
    let l2: f64 = model.weights.iter().map(|w| w * w).sum();
    rss / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) / 2.0 * l2)
}

/// MAE of a fitted model on a holdout set.
pub fn eval_baseline(model: &LinearModel, x: &[Vec<f64>], y: &[f64]) -> Result<f64, BaselineError> {
    validate(x, y)?;
    let preds: Vec<f64> = x.iter().map(|row| model.predict(row)).collect();
    mae(&preds, y).map_err(|_| BaselineError::EmptyData)
}

/// Per-trial statistics: MAE plus percentiles of per-word absolute error.
#[derive(Debug, Clone)]
pub struct TrialStats {
    pub mae: f64,
    pub percentiles: Vec<(f64, f64)>,
}

/// Multi-trial baseline evaluation: each trial re-splits the data with its
/// own seed, fits, and scores the holdout; statistics are averaged over
/// trials.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub label: String,
    pub trials: Vec<TrialStats>,
    pub mean_mae: f64,
    pub mean_percentiles: Vec<(f64, f64)>,
}

pub fn run_baseline_trials(
    x: &[Vec<f64>],
    y: &[f64],
    reg: &Regularizer,
    n_trials: usize,
    holdout_fraction: f64,
    seed: u64,
) -> Result<BaselineRun, BaselineError> {
    validate(x, y)?;
    if n_trials == 0 {
        return Err(BaselineError::BadParameter {
            reason: "need at least one trial".into(),
        });
    }
    if !(0.0..1.0).contains(&holdout_fraction) || holdout_fraction == 0.0 {
        return Err(BaselineError::BadParameter {
            reason: format!("holdout fraction {holdout_fraction} outside (0, 1)"),
        });
    }
    let n = x.len();
    let n_holdout = ((n as f64) * holdout_fraction) as usize;
    if n_holdout == 0 || n_holdout == n {
        return Err(BaselineError::BadParameter {
            reason: "holdout would be empty or total".into(),
        });
    }
    let mut trials = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let mut rng = Rng::derive(seed, &format!("baseline.trial.{trial}"));
        let order = rng.permutation(n);
        let (test_idx, train_idx) = order.split_at(n_holdout);
        let take = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
            (
                idx.iter().map(|&i| x[i].clone()).collect(),
                idx.iter().map(|&i| y[i]).collect(),
            )
        };
        let (train_x, train_y) = take(train_idx);
        let (test_x, test_y) = take(test_idx);
        let model = match reg {
            Regularizer::None => fit_ridge(&train_x, &train_y, 0.0)?,
            Regularizer::Ridge { lambda } => fit_ridge(&train_x, &train_y, *lambda)?,
            Regularizer::Lasso { lambda } => {
                fit_coordinate_descent(&train_x, &train_y, *lambda, 1.0, 10_000, 1e-7)?.0
            }
            Regularizer::ElasticNet { lambda, alpha } => {
                fit_coordinate_descent(&train_x, &train_y, *lambda, *alpha, 10_000, 1e-7)?.0
            }
        };
        let errors: Vec<f64> = test_x
            .iter()
            .zip(&test_y)
            .map(|(row, &t)| (model.predict(row) - t).abs())
            .collect();
        trials.push(TrialStats {
            mae: errors.iter().sum::<f64>() / errors.len() as f64,
            percentiles: percentiles(&errors, &REPORT_RANKS)
                .map_err(|_| BaselineError::EmptyData)?,
        });
    }
    let mean_mae = trials.iter().map(|t| t.mae).sum::<f64>() / trials.len() as f64;
    let mean_percentiles = REPORT_RANKS
        .iter()
        .enumerate()
        .map(|(i, &rank)| {
            let mean = trials.iter().map(|t| t.percentiles[i].1).sum::<f64>() / trials.len() as f64;
            (rank, mean)
        })
        .collect();
    Ok(BaselineRun {
        label: reg.label(),
        trials,
        mean_mae,
        mean_percentiles,
    })
}
