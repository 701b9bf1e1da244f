use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::average_precision;
use crate::data::{split_scenario, Dataset, Matrix, Scenario};
use crate::error::{Error, Result};
use crate::explain::exiffi_lfi_all;
use crate::forest::{Forest, ForestConfig, ModelKind};
use crate::util::{derive_seed, rng_from_seed};

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidMetricInput(format!(
            "correlation needs two equal series of length >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if sbb == 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// Pearson correlation between the summed local importance of each row and
/// its anomaly score.
pub fn lfi_score_correlation(forest: &Forest, ds: &Dataset) -> Result<f64> {
    if ds.n() < 3 {
        return Err(Error::InvalidMetricInput(
            "correlation needs at least 3 rows".into(),
        ));
    }
    let lfi: Vec<f64> = exiffi_lfi_all(forest, ds)?
        .iter()
        .map(|v| v.sum())
        .collect();
    let scores = forest.score_dataset(ds)?;
    pearson(&lfi, &scores).map_err(|e| match e {
        Error::ZeroVariance(_) => Error::ZeroVariance(if lfi.iter().all(|&v| v == lfi[0]) {
            "local importance sums"
        } else {
            "anomaly scores"
        }),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: ModelKind,
    pub level: f64,
    pub seed: u64,
    pub avg_precision: f64,
}

/// Average precision on the full dataset for every configuration,
/// training contamination level, and seed. Seed `k` of a cell uses
/// `derive_seed(base_seed, k)` for both the split and the forest.
pub fn contamination_sweep(
    ds: &Dataset,
    configs: &[ForestConfig],
    levels: &[f64],
    n_seeds: usize,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    let labels = ds.require_labels()?;
    let mut jobs = Vec::new();
    for cfg in configs {
        for &level in levels {
            for k in 0..n_seeds {
                jobs.push((cfg, level, derive_seed(base_seed, k as u64)));
            }
        }
    }
    jobs.par_iter()
        .map(|&(cfg, level, seed)| {
            let split = split_scenario(ds, Scenario::Contaminated(level), seed)?;
            let forest = Forest::fit(
                &split.train,
                &ForestConfig {
                    seed,
                    ..cfg.clone()
                },
            )?;
            let scores = forest.score_dataset(&split.eval)?;
            Ok(SweepRow {
                model: cfg.model,
                level,
                seed,
                avg_precision: average_precision(&scores, labels)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub model: ModelKind,
    pub n: usize,
    pub p: usize,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub importance_seconds: f64,
}

fn median3(mut t: [f64; 3]) -> f64 {
    t.sort_by(f64::total_cmp);
    t[1]
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Median-of-three wall times for fitting, scoring, and computing local
/// importances on standard-normal data of every `(n, p)` shape.
pub fn timing_benchmark(
    sizes: &[usize],
    dims: &[usize],
    config: &ForestConfig,
    base_seed: u64,
) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for &p in dims {
            let mut rng = rng_from_seed(derive_seed(base_seed, (n as u64) << 20 | p as u64));
            let data: Vec<f64> = (0..n * p)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let ds = Dataset::with_default_names("gaussian", Matrix::new(n, p, data)?, None)?;
            let (mut fit, mut predict, mut importance) = ([0.0; 3], [0.0; 3], [0.0; 3]);
            for rep in 0..3 {
                let (forest, t) = timed(|| Forest::fit(&ds, config))?;
                fit[rep] = t;
                predict[rep] = timed(|| forest.score_dataset(&ds))?.1;
                importance[rep] = timed(|| exiffi_lfi_all(&forest, &ds))?.1;
            }
            rows.push(TimingRow {
                model: config.model,
                n,
                p,
                fit_seconds: median3(fit),
                predict_seconds: median3(predict),
                importance_seconds: median3(importance),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_preset, Preset};

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson(&x, &[1.0; 4]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn constant_data_has_no_correlation() {
        let m = Matrix::from_rows(2, &[[1.0, 1.0]; 5]).unwrap();
        let ds = Dataset::with_default_names("c", m, None).unwrap();
        let f = Forest::fit(&ds, &ForestConfig::new(ModelKind::Eif).with_trees(5)).unwrap();
        assert!(matches!(
            lfi_score_correlation(&f, &ds),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn sweep_is_seed_deterministic() {
        let ds = make_preset(Preset::Bisect, 0).unwrap();
        let cfgs = [ForestConfig::new(ModelKind::Eif).with_trees(10)];
        let a = contamination_sweep(&ds, &cfgs, &[0.0, 0.05], 2, 7).unwrap();
        let b = contamination_sweep(&ds, &cfgs, &[0.0, 0.05], 2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn timing_shapes() {
        let cfg = ForestConfig::new(ModelKind::If).with_trees(5);
        let rows = timing_benchmark(&[50, 100], &[2], &cfg, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.fit_seconds >= 0.0));
    }
}
