use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{diffi_gfi, exiffi_gfi, Explainer, ImportanceVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, ModelKind};
use crate::util::{derive_seed, mean, std_dev};

/// Aggregate of global importances over repeated fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfiReport {
    pub explainer: Explainer,
    pub model: ModelKind,
    pub per_feature_mean: Vec<f64>,
    pub per_feature_std: Vec<f64>,
    /// `rank_histogram[f][k]`: runs that placed feature `f` at rank `k`
    /// (rank 0 is the most important).
    pub rank_histogram: Vec<Vec<usize>>,
    pub n_runs: usize,
    pub runs: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    feature: usize,
    name: &'a str,
    rank: usize,
    count: usize,
}

impl GfiReport {
    /// Features ordered by mean importance; ties go to the lower index.
    pub fn mean_ranking(&self) -> Vec<usize> {
        ImportanceVector::from_vec(self.per_feature_mean.clone()).ranking()
    }

    /// Long-format histogram: `feature,name,rank,count`.
    pub fn write_histogram_csv<W: Write>(&self, w: W, names: &[String]) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (f, row) in self.rank_histogram.iter().enumerate() {
            for (rank, &count) in row.iter().enumerate() {
                out.serialize(HistogramRow {
                    feature: f,
                    name: names.get(f).map_or("", String::as_str),
                    rank,
                    count,
                })?;
            }
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Feature order for one importance vector.
pub fn rank_features(gfi: &ImportanceVector) -> Vec<usize> {
    gfi.ranking()
}

/// Fits `n_runs` forests on `train` with seeds derived from `base_seed`,
/// computes the global importance of each on `eval`, and aggregates.
pub fn gfi_over_runs(
    train: &Dataset,
    eval: &Dataset,
    config: &ForestConfig,
    explainer: Explainer,
    n_runs: usize,
    contamination: f64,
    base_seed: u64,
) -> Result<GfiReport> {
    if n_runs == 0 {
        return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
    }
    if explainer == Explainer::Diffi && config.model != ModelKind::If {
        return Err(Error::NotAxisAligned("DIFFI"));
    }
    let runs: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let cfg = ForestConfig {
                seed: derive_seed(base_seed, r as u64),
                ..config.clone()
            };
            let forest = Forest::fit(train, &cfg)?;
            let gfi = match explainer {
                Explainer::Exiffi => exiffi_gfi(&forest, eval, contamination)?,
                Explainer::Diffi => diffi_gfi(&forest, eval, contamination)?,
            };
            Ok(gfi.into_vec())
        })
        .collect::<Result<_>>()?;

    let p = train.p();
    let mut rank_histogram = vec![vec![0usize; p]; p];
    for run in &runs {
        for (rank, f) in ImportanceVector::from_vec(run.clone())
            .ranking()
            .into_iter()
            .enumerate()
        {
            rank_histogram[f][rank] += 1;
        }
    }
    let column = |j: usize| runs.iter().map(|r| r[j]).collect::<Vec<_>>();
    Ok(GfiReport {
        explainer,
        model: config.model,
        per_feature_mean: (0..p).map(|j| mean(&column(j))).collect(),
        per_feature_std: (0..p).map(|j| std_dev(&column(j))).collect(),
        rank_histogram,
        n_runs,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_preset, split_scenario, Preset, Scenario};

    #[test]
    fn single_run_has_zero_spread() {
        let ds = make_preset(Preset::Bisect, 0).unwrap();
        let cfg = ForestConfig::new(ModelKind::Eif).with_trees(20);
        let r = gfi_over_runs(&ds, &ds, &cfg, Explainer::Exiffi, 1, 0.1, 3).unwrap();
        assert!(r.per_feature_std.iter().all(|&s| s == 0.0));
        assert_eq!(r.n_runs, 1);
    }

    #[test]
    fn histogram_rows_sum_to_runs() {
        let ds = make_preset(Preset::Xaxis, 2).unwrap();
        let split = split_scenario(&ds, Scenario::II, 0).unwrap();
        let cfg = ForestConfig::new(ModelKind::If).with_trees(30);
        let r =
            gfi_over_runs(&split.train, &split.eval, &cfg, Explainer::Diffi, 5, 0.1, 1).unwrap();
        for row in &r.rank_histogram {
            assert_eq!(row.iter().sum::<usize>(), 5);
        }
        for k in 0..ds.p() {
            assert_eq!(r.rank_histogram.iter().map(|row| row[k]).sum::<usize>(), 5);
        }
        let mut buf = Vec::new();
        r.write_histogram_csv(&mut buf, ds.feature_names()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 36);
        assert!(text.starts_with("feature,name,rank,count\n"));
    }

    #[test]
    fn diffi_needs_if_config() {
        let ds = make_preset(Preset::Bisect, 0).unwrap();
        let cfg = ForestConfig::new(ModelKind::Eif);
        assert!(matches!(
            gfi_over_runs(&ds, &ds, &cfg, Explainer::Diffi, 2, 0.1, 0),
            Err(Error::NotAxisAligned(_))
        ));
    }
}
