//! Report emission: machine JSON with full distributions, a summary CSV
//! table, and long-format plot data for error histograms and top-error
//! charts.
//!
//! Published benchmark MAEs for this lexicon (linear, random-forest, SVR,
//! and the two model families, plus the human-variability rows) are embedded
//! as labeled reference constants so every report carries the comparison
//! context. They are never used as test ground truth for retrained models.

use lexaug_core::baselines::BaselineRun;
use lexaug_core::eval::ErrorReport;
use serde_json::json;

/// One published benchmark row: label, average MAE, then the 25/50/75/85/95
/// percentiles.
pub struct ReferenceRow {
    pub label: &'static str,
    pub average: f64,
    pub percentiles: [f64; 5],
}

/// Published evaluation results on the full human-rated lexicon, reported
/// for models trained with large-scale pre-trained embeddings. Reference
/// context only.
pub const PUBLISHED_REFERENCE: &[ReferenceRow] = &[
    ReferenceRow {
        label: "elasticnet+word2vec",
        average: 0.81,
        percentiles: [0.82, 0.81, 0.82, 0.82, 0.83],
    },
    ReferenceRow {
        label: "elasticnet+glove",
        average: 0.81,
        percentiles: [0.82, 0.81, 0.82, 0.82, 0.82],
    },
    ReferenceRow {
        label: "elasticnet+fasttext",
        average: 0.81,
        percentiles: [0.82, 0.81, 0.82, 0.82, 0.82],
    },
    ReferenceRow {
        label: "lasso+word2vec",
        average: 0.81,
        percentiles: [0.81, 0.81, 0.81, 0.82, 0.83],
    },
    ReferenceRow {
        label: "lasso+glove",
        average: 0.81,
        percentiles: [0.81, 0.82, 0.82, 0.82, 0.82],
    },
    ReferenceRow {
        label: "lasso+fasttext",
        average: 0.81,
        percentiles: [0.80, 0.81, 0.81, 0.81, 0.82],
    },
    ReferenceRow {
        label: "ridge+word2vec",
        average: 0.73,
        percentiles: [0.73, 0.73, 0.74, 0.74, 0.75],
    },
    ReferenceRow {
        label: "ridge+glove",
        average: 0.75,
        percentiles: [0.74, 0.75, 0.75, 0.77, 0.79],
    },
    ReferenceRow {
        label: "ridge+fasttext",
        average: 0.73,
        percentiles: [0.73, 0.73, 0.74, 0.74, 0.74],
    },
    ReferenceRow {
        label: "rf+word2vec",
        average: 0.69,
        percentiles: [0.69, 0.70, 0.70, 0.71, 0.78],
    },
    ReferenceRow {
        label: "rf+glove",
        average: 0.70,
        percentiles: [0.70, 0.70, 0.71, 0.71, 0.71],
    },
    ReferenceRow {
        label: "rf+fasttext",
        average: 0.68,
        percentiles: [0.67, 0.68, 0.68, 0.68, 0.69],
    },
    ReferenceRow {
        label: "svr+word2vec",
        average: 0.65,
        percentiles: [0.65, 0.65, 0.66, 0.66, 0.67],
    },
    ReferenceRow {
        label: "svr+glove",
        average: 0.67,
        percentiles: [0.68, 0.67, 0.66, 0.68, 0.69],
    },
    ReferenceRow {
        label: "svr+fasttext",
        average: 0.64,
        percentiles: [0.64, 0.64, 0.65, 0.66, 0.66],
    },
    ReferenceRow {
        label: "token-model-single",
        average: 0.62,
        percentiles: [0.60, 0.61, 0.64, 0.65, 0.66],
    },
    ReferenceRow {
        label: "token-model-ensemble",
        average: 0.57,
        percentiles: [0.29, 0.44, 0.66, 0.72, 0.77],
    },
    ReferenceRow {
        label: "dictionary-model-single",
        average: 0.50,
        percentiles: [0.49, 0.50, 0.51, 0.51, 0.52],
    },
    ReferenceRow {
        label: "dictionary-model-ensemble",
        average: 0.45,
        percentiles: [0.15, 0.31, 0.40, 0.52, 0.59],
    },
    ReferenceRow {
        label: "human-ratings-sigma",
        average: 1.38,
        percentiles: [1.18, 1.36, 1.56, 1.69, 1.90],
    },
    ReferenceRow {
        label: "human-ratings-variance",
        average: 1.99,
        percentiles: [1.39, 1.85, 2.43, 2.86, 3.61],
    },
];

fn fmt(v: f64) -> String {
    // full round-trip precision keeps deterministic reruns byte-identical
    format!("{v}")
}

fn percentile_object(pairs: &[(f64, f64)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (rank, value) in pairs {
        map.insert(format!("p{rank}"), json!(value));
    }
    serde_json::Value::Object(map)
}

/// Full machine-readable report.
pub fn report_json(report: &ErrorReport, model_label: &str, model_hash: &str) -> String {
    let per_word: Vec<serde_json::Value> = report
        .per_word
        .iter()
        .map(|w| {
            json!({
                "word": w.word,
                "pred": w.pred,
                "pred_raw": w.pred_raw,
                "sigma_hat": w.sigma_hat,
                "truth": w.truth,
                "truth_sigma": w.truth_sigma,
                "abs_err": w.abs_err,
                "group": w.group.label(),
                "iou": w.iou,
            })
        })
        .collect();
    let groups: Vec<serde_json::Value> = report
        .groups
        .iter()
        .map(|g| {
            json!({
                "group": g.group.label(),
                "n": g.n,
                "mae": g.mae,
                "errors": g.errors,
            })
        })
        .collect();
    let top: Vec<serde_json::Value> = report
        .top_errors
        .iter()
        .enumerate()
        .map(|(rank, w)| {
            json!({
                "rank": rank + 1,
                "word": w.word,
                "pred": w.pred,
                "truth": w.truth,
                "truth_sigma": w.truth_sigma,
                "abs_err": w.abs_err,
                "iou": w.iou,
            })
        })
        .collect();
    let reference: Vec<serde_json::Value> = PUBLISHED_REFERENCE
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "average": r.average,
                "p25": r.percentiles[0],
                "p50": r.percentiles[1],
                "p75": r.percentiles[2],
                "p85": r.percentiles[3],
                "p95": r.percentiles[4],
                "source": "published",
            })
        })
        .collect();
    let value = json!({
        "model": model_label,
        "model_hash": model_hash,
        "n": report.n,
        "mae": report.mae,
        "mae_percentiles": percentile_object(&report.mae_percentiles),
        "groups": groups,
        "human": {
            "mean_sigma": report.human_mean_sigma,
            "mean_variance": report.human_mean_var,
            "sigma_percentiles": percentile_object(&report.human_sigma_percentiles),
            "variance_percentiles": percentile_object(&report.human_var_percentiles),
        },
        "iou": {
            "mean": report.mean_iou,
            "percentiles": percentile_object(&report.iou_percentiles),
        },
        "top_errors": top,
        "per_word": per_word,
        "reference": reference,
    });
    serde_json::to_string_pretty(&value).expect("report serialization")
}

/// Summary CSV: this run's row, the human-variability rows computed from the
/// evaluated subset, then the published reference rows.
pub fn report_table_csv(report: &ErrorReport, model_label: &str) -> String {
    let mut out = String::from("model,average,p25,p50,p75,p85,p95,source\n");
    let row = |label: &str, avg: f64, ps: &[(f64, f64)], source: &str| -> String {
        format!(
            "{label},{},{},{},{},{},{},{source}\n",
            fmt(avg),
            fmt(ps[0].1),
            fmt(ps[1].1),
            fmt(ps[2].1),
            fmt(ps[3].1),
            fmt(ps[4].1),
        )
    };
    out.push_str(&row(
        model_label,
        report.mae,
        &report.mae_percentiles,
        "this-run",
    ));
    out.push_str(&row(
        "human-ratings-sigma",
        report.human_mean_sigma,
        &report.human_sigma_percentiles,
        "this-run",
    ));
    out.push_str(&row(
        "human-ratings-variance",
        report.human_mean_var,
        &report.human_var_percentiles,
        "this-run",
    ));
    for r in PUBLISHED_REFERENCE {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},published\n",
            r.label,
            fmt(r.average),
            fmt(r.percentiles[0]),
            fmt(r.percentiles[1]),
            fmt(r.percentiles[2]),
            fmt(r.percentiles[3]),
            fmt(r.percentiles[4]),
        ));
    }
    out
}

/// Long-format per-word error rows for group error histograms.
pub fn group_errors_csv(report: &ErrorReport) -> String {
    let mut out = String::from("word,group,abs_err,truth,pred\n");
    for w in &report.per_word {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            w.word,
            w.group.label(),
            fmt(w.abs_err),
            fmt(w.truth),
            fmt(w.pred),
        ));
    }
    out
}

/// Plot data for the top-error chart: predictions next to human bands.
pub fn top_errors_csv(report: &ErrorReport) -> String {
    let mut out = String::from("rank,word,pred,sigma_hat,truth,truth_sigma,abs_err,iou\n");
    for (rank, w) in report.top_errors.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            rank + 1,
            w.word,
            fmt(w.pred),
            fmt(w.sigma_hat),
            fmt(w.truth),
            fmt(w.truth_sigma),
            fmt(w.abs_err),
            fmt(w.iou),
        ));
    }
    out
}

/// Baseline table mirroring the summary layout, with computed rows first
/// and published linear-model rows for context.
pub fn baseline_table_csv(runs: &[BaselineRun]) -> String {
    let mut out = String::from("model,average,p25,p50,p75,p85,p95,source\n");
    for run in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},this-run\n",
            run.label,
            fmt(run.mean_mae),
            fmt(run.mean_percentiles[0].1),
            fmt(run.mean_percentiles[1].1),
            fmt(run.mean_percentiles[2].1),
            fmt(run.mean_percentiles[3].1),
            fmt(run.mean_percentiles[4].1),
        ));
    }
    for r in PUBLISHED_REFERENCE {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},published\n",
            r.label,
            fmt(r.average),
            fmt(r.percentiles[0]),
            fmt(r.percentiles[1]),
            fmt(r.percentiles[2]),
            fmt(r.percentiles[3]),
            fmt(r.percentiles[4]),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexaug_core::eval::{build_report, WordPrediction};
    use lexaug_core::lexicon::{ColumnMap, Lexicon};

    fn sample_report() -> ErrorReport {
        let lex = Lexicon::parse_tsv(
            "word\thappiness_average\thappiness_standard_deviation\n\
             good\t7.0\t1.1\n\
             bad\t2.5\t1.3\n\
             table\t5.1\t0.9\n",
            &ColumnMap::default(),
            "t",
        )
        .unwrap();
        let preds = vec![
            WordPrediction {
                word: "good".into(),
                h_raw: 6.4,
                sigma_hat: 0.7,
            },
            WordPrediction {
                word: "bad".into(),
                h_raw: 3.4,
                sigma_hat: 0.9,
            },
            WordPrediction {
                word: "table".into(),
                h_raw: 5.0,
                sigma_hat: 0.3,
            },
        ];
        build_report(&preds, &lex, 2).unwrap()
    }

    #[test]
    fn json_report_has_all_sections_and_is_deterministic() {
        let report = sample_report();
        let a = report_json(&report, "token-ensemble", "abc123");
        let b = report_json(&report, "token-ensemble", "abc123");
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(value["n"], 3);
        assert_eq!(value["per_word"].as_array().unwrap().len(), 3);
        assert_eq!(value["top_errors"].as_array().unwrap().len(), 2);
        assert_eq!(value["groups"].as_array().unwrap().len(), 3);
        assert!(value["human"]["mean_sigma"].as_f64().unwrap() > 0.0);
        let refs = value["reference"].as_array().unwrap();
        assert_eq!(refs.len(), PUBLISHED_REFERENCE.len());
        assert!(refs.iter().all(|r| r["source"] == "published"));
    }

    #[test]
    fn csv_table_places_run_rows_before_reference() {
        let report = sample_report();
        let csv = report_table_csv(&report, "token-ensemble");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "model,average,p25,p50,p75,p85,p95,source");
        assert!(lines[1].starts_with("token-ensemble,"));
        assert!(lines[1].ends_with("this-run"));
        assert!(lines[2].starts_with("human-ratings-sigma,"));
        assert!(csv.contains("token-model-single,0.62,0.6,0.61,0.64,0.65,0.66,published"));
        assert!(csv.contains("human-ratings-variance,1.99,"));
        assert_eq!(lines.len(), 1 + 3 + PUBLISHED_REFERENCE.len());
    }

    #[test]
    fn plot_csvs_cover_every_word() {
        let report = sample_report();
        let groups = group_errors_csv(&report);
        assert_eq!(groups.lines().count(), 1 + 3);
        assert!(groups.contains("bad,negative,"));
        let top = top_errors_csv(&report);
        assert_eq!(top.lines().count(), 1 + 2);
        assert!(top.lines().nth(1).unwrap().starts_with("1,"));
    }
}
