use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::average_precision;
use crate::data::{split_scenario, Dataset, Scenario};
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::util::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionOrder {
    /// Drop the most important feature first.
    Direct,
    /// Drop the least important feature first.
    Inverse,
    /// Drop features in a seeded random order.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelectionCurve {
    pub order: SelectionOrder,
    /// `ap_values[i]`: average precision with `i` features dropped.
    pub ap_values: Vec<f64>,
}

fn check_permutation(ranking: &[usize], p: usize) -> Result<()> {
    let mut seen = vec![false; p];
    if ranking.len() != p {
        return Err(Error::InvalidMetricInput(format!(
            "ranking has {} entries for {p} features",
            ranking.len()
        )));
    }
    for &f in ranking {
        if f >= p || std::mem::replace(&mut seen[f], true) {
            return Err(Error::InvalidMetricInput(format!(
                "ranking is not a permutation of 0..{p}"
            )));
        }
    }
    Ok(())
}

/// Average precision as features are removed one at a time, in three orders.
///
/// At every step a fresh evaluator forest is fitted on the training split
/// restricted to the surviving features and scored on the matching
/// evaluation columns. Step `i` uses the same forest seed in all three
/// curves, so reversing `ranking` swaps the direct and inverse curves.
pub fn feature_selection_curves(
    ds: &Dataset,
    ranking: &[usize],
    evaluator: &ForestConfig,
    scenario: Scenario,
    seed: u64,
) -> Result<[FeatureSelectionCurve; 3]> {
    let p = ds.p();
    if p == 0 {
        return Err(Error::InvalidMetricInput("dataset has no features".into()));
    }
    check_permutation(ranking, p)?;
    let split = split_scenario(ds, scenario, seed)?;
    let labels = split.eval.require_labels()?.to_vec();

    let mut random: Vec<usize> = (0..p).collect();
    random.shuffle(&mut rng_from_seed(derive_seed(seed, u64::MAX)));
    let drop_orders = [
        ranking.to_vec(),
        ranking.iter().rev().copied().collect::<Vec<_>>(),
        random,
    ];

    let jobs: Vec<(usize, usize)> = (0..3).flat_map(|c| (0..p).map(move |i| (c, i))).collect();
    let aps = jobs
        .par_iter()
        .map(|&(c, step)| {
            let mut keep = drop_orders[c][step..].to_vec();
            keep.sort_unstable();
            let cfg = ForestConfig {
                seed: derive_seed(seed, step as u64),
                ..evaluator.clone()
            };
            let forest = Forest::fit(&split.train.select_columns(&keep)?, &cfg)?;
            let scores = forest.score_dataset(&split.eval.select_columns(&keep)?)?;
            average_precision(&scores, &labels)
        })
        .collect::<Result<Vec<f64>>>()?;

    let curve = |c: usize, order| FeatureSelectionCurve {
        order,
        ap_values: aps[c * p..(c + 1) * p].to_vec(),
    };
    Ok([
        curve(0, SelectionOrder::Direct),
        curve(1, SelectionOrder::Inverse),
        curve(2, SelectionOrder::Random),
    ])
}

fn trapezoid(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum()
}

/// Area under the inverse curve minus area under the direct curve, both by
/// the trapezoid rule over unit steps.
pub fn auc_fs(inverse: &[f64], direct: &[f64]) -> Result<f64> {
    if inverse.len() != direct.len() || inverse.is_empty() {
        return Err(Error::InvalidMetricInput(format!(
            "curve lengths {} and {} must match and be nonzero",
            inverse.len(),
            direct.len()
        )));
    }
    Ok(trapezoid(inverse) - trapezoid(direct))
}
