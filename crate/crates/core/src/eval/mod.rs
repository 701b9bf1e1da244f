//! Detection metrics and the interpretability benchmarks built on them.

mod ranking;
mod selection;
mod sweep;
mod table;

pub use ranking::{ndcg, parse_relevance_csv, RelevanceVector};
pub use selection::{auc_fs, feature_selection_curves, FeatureSelectionCurve, SelectionOrder};
pub use sweep::{
    contamination_sweep, lfi_score_correlation, pearson, timing_benchmark, SweepRow, TimingRow,
};
pub use table::{MetricRecord, MetricTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ModelKind;
use crate::util::argsort_desc;

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidMetricInput(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidMetricInput("scores must be finite".into()));
    }
    Ok(())
}

/// Mean over positives of the precision at each positive's rank, ranking by
/// descending score with ties broken by index.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::InvalidMetricInput(
            "average precision needs a positive label".into(),
        ));
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, i) in argsort_desc(scores).into_iter().enumerate() {
        if labels[i] {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / positives as f64)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidMetricInput(
            "ROC AUC needs both classes".into(),
        ));
    }
    // midranks in ascending order
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        rank_sum_pos += midrank * idx[start..end].iter().filter(|&&i| labels[i]).count() as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Precision among the `round(contamination * n)` highest scores.
pub fn precision_at_contamination(
    scores: &[f64],
    labels: &[bool],
    contamination: f64,
) -> Result<f64> {
    check_lengths(scores, labels)?;
    let predicted = crate::forest::threshold_top(scores, contamination)?;
    let k = predicted.iter().filter(|&&p| p).count();
    if k == 0 {
        return Err(Error::InvalidMetricInput(format!(
            "contamination {contamination} selects no points out of {}",
            scores.len()
        )));
    }
    let tp = predicted
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| p && l)
        .count();
    Ok(tp as f64 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub avg_precision: f64,
    pub precision: f64,
    pub roc_auc: f64,
}

impl DetectionMetrics {
    pub fn compute(scores: &[f64], labels: &[bool], contamination: f64) -> Result<Self> {
        Ok(Self {
            avg_precision: average_precision(scores, labels)?,
            precision: precision_at_contamination(scores, labels, contamination)?,
            roc_auc: roc_auc(scores, labels)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelKind,
    #[serde(flatten)]
    pub metrics: DetectionMetrics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predict_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub scenario: String,
    pub contamination: f64,
    pub models: Vec<ModelReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub auc_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ndcg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correlation: Option<f64>,
}
