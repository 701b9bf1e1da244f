use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth relevance per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RelevanceVector {
    gains: Vec<f64>,
}

impl RelevanceVector {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidMetricInput(
                "relevance gains must be finite and nonnegative".into(),
            ));
        }
        if !gains.iter().any(|&g| g > 0.0) {
            return Err(Error::InvalidMetricInput(
                "relevance needs at least one positive gain".into(),
            ));
        }
        if !gains.iter().sum::<f64>().is_finite() {
            return Err(Error::InvalidMetricInput(
                "relevance gains overflow when summed".into(),
            ));
        }
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

impl TryFrom<Vec<f64>> for RelevanceVector {
    type Error = Error;

    fn try_from(gains: Vec<f64>) -> Result<Self> {
        Self::new(gains)
    }
}

impl From<RelevanceVector> for Vec<f64> {
    fn from(r: RelevanceVector) -> Self {
        r.gains
    }
}

fn dcg(gains: impl Iterator<Item = f64>) -> f64 {
    gains
        .enumerate()
        .map(|(i, g)| g / ((i + 2) as f64).log2())
        .sum()
}

/// Normalised discounted cumulative gain of a predicted feature order.
/// Position `i` (1-based) is discounted by `log2(i + 1)`.
pub fn ndcg(predicted: &[usize], relevance: &RelevanceVector) -> Result<f64> {
    let p = relevance.len();
    let mut seen = vec![false; p];
    if predicted.len() != p
        || predicted
            .iter()
            .any(|&f| f >= p || std::mem::replace(&mut seen[f], true))
    {
        return Err(Error::InvalidMetricInput(format!(
            "predicted ranking is not a permutation of 0..{p}"
        )));
    }
    let mut ideal = relevance.gains.clone();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let actual = dcg(predicted.iter().map(|&f| relevance.gains[f]));
    Ok(actual / dcg(ideal.into_iter()))
}

/// Reads relevance from a headed CSV with a `relevance` column, one row per
/// feature. An optional `feature` column gives each row's feature index;
/// without it rows are taken in feature order.
pub fn parse_relevance_csv<R: Read>(reader: R) -> Result<RelevanceVector> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let gain_col = find("relevance").ok_or_else(|| {
        Error::InvalidMetricInput("relevance file needs a 'relevance' column".into())
    })?;
    let feature_col = find("feature");

    let mut entries = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let gain: f64 = field(gain_col).parse().map_err(|_| {
            Error::InvalidMetricInput(format!(
                "row {}: bad relevance '{}'",
                k + 2,
                field(gain_col)
            ))
        })?;
        let feature = match feature_col {
            Some(c) => field(c).parse::<usize>().map_err(|_| {
                Error::InvalidMetricInput(format!(
                    "row {}: bad feature index '{}'",
                    k + 2,
                    field(c)
                ))
            })?,
            None => k,
        };
        entries.push((feature, gain));
    }
    let p = entries.len();
    let mut gains = vec![f64::NAN; p];
    for (feature, gain) in entries {
        if feature >= p || !gains[feature].is_nan() {
            return Err(Error::InvalidMetricInput(format!(
                "feature indices must cover 0..{p} exactly once"
            )));
        }
        gains[feature] = gain;
    }
    RelevanceVector::new(gains)
}
