use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exiffi_lfi, node_lambda};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::util::{mean, stable_sum};

/// Local importance over a 2-D slice of feature space.
///
/// Layers are indexed `[iy][ix]`: rows follow `ys` (feature `feat_j`),
/// columns follow `xs` (feature `feat_i`). All other coordinates sit at the
/// dataset's feature means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoremapGrid {
    pub feat_i: usize,
    pub feat_j: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub winner: Vec<Vec<usize>>,
    pub magnitude: Vec<Vec<f64>>,
    pub anomaly: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    y: f64,
    winner: usize,
    magnitude: f64,
    anomaly: f64,
}

impl ScoremapGrid {
    /// Long format: `x,y,winner,magnitude,anomaly`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (iy, &y) in self.ys.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                out.serialize(GridRow {
                    x,
                    y,
                    winner: self.winner[iy][ix],
                    magnitude: self.magnitude[iy][ix],
                    anomaly: self.anomaly[iy][ix],
                })?;
            }
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }
}

fn axis(ds: &Dataset, feature: usize, resolution: usize, padding: f64) -> Vec<f64> {
    let (lo, hi) = ds
        .features()
        .column(feature)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (lo, hi) = (lo - padding * span, hi + padding * span);
    let step = (hi - lo) / (resolution - 1) as f64;
    (0..resolution)
        .map(|k| {
            if k + 1 == resolution {
                hi
            } else {
                lo + k as f64 * step
            }
        })
        .collect()
}

/// Evaluates LFI and anomaly score on a `resolution x resolution` grid over
/// features `feat_i` and `feat_j`, padded by `padding` times each range.
/// The winner is whichever of the two features has the larger LFI; ties go
/// to the lower feature index.
pub fn scoremap_grid(
    forest: &Forest,
    ds: &Dataset,
    feat_i: usize,
    feat_j: usize,
    resolution: usize,
    padding: f64,
) -> Result<ScoremapGrid> {
    let p = ds.p();
    if p != forest.n_features {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features,
            found: p,
        });
    }
    if feat_i >= p || feat_j >= p {
        return Err(Error::InvalidConfig(format!(
            "feature index out of range for {p} features: ({feat_i}, {feat_j})"
        )));
    }
    if feat_i == feat_j {
        return Err(Error::InvalidConfig(
            "scoremap needs two distinct features".into(),
        ));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    if !(padding >= 0.0 && padding.is_finite()) {
        return Err(Error::InvalidConfig(format!("invalid padding {padding}")));
    }

    let base: Vec<f64> = (0..p)
        .map(|j| mean(&ds.features().column(j).collect::<Vec<_>>()))
        .collect();
    let xs = axis(ds, feat_i, resolution, padding);
    let ys = axis(ds, feat_j, resolution, padding);

    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let mut point = base.clone();
            point[feat_i] = xs[k % resolution];
            point[feat_j] = ys[k / resolution];
            let lfi = exiffi_lfi(forest, &point)?;
            let (a, b) = (lfi[feat_i], lfi[feat_j]);
            let winner = if a > b || (a == b && feat_i < feat_j) {
                feat_i
            } else {
                feat_j
            };
            Ok((winner, lfi[winner], forest.anomaly_score(&point)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut grid = ScoremapGrid {
        feat_i,
        feat_j,
        xs,
        ys,
        winner: Vec::with_capacity(resolution),
        magnitude: Vec::with_capacity(resolution),
        anomaly: Vec::with_capacity(resolution),
    };
    for row in cells.chunks(resolution) {
        grid.winner.push(row.iter().map(|c| c.0).collect());
        grid.magnitude.push(row.iter().map(|c| c.1).collect());
        grid.anomaly.push(row.iter().map(|c| c.2).collect());
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthLevel {
    pub depth: usize,
    /// Mean L1 norm of the node importance over all visits at this depth.
    pub mean_lambda: f64,
    pub visits: usize,
}

/// Average node importance magnitude by node depth, over every path of
/// every dataset point.
pub fn depth_profile(forest: &Forest, ds: &Dataset) -> Result<Vec<DepthLevel>> {
    if ds.p() != forest.n_features {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features,
            found: ds.p(),
        });
    }
    let per_point: Vec<Vec<(usize, f64)>> = (0..ds.n())
        .into_par_iter()
        .map(|r| {
            let x = ds.row(r);
            forest
                .trees
                .iter()
                .flat_map(|t| t.path(x).map(|n| (n.depth, node_lambda(n, x).l1_norm())))
                .collect()
        })
        .collect();
    let mut by_depth: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (depth, value) in per_point.into_iter().flatten() {
        by_depth.entry(depth).or_default().push(value);
    }
    Ok(by_depth
        .into_iter()
        .map(|(depth, mut values)| {
            let visits = values.len();
            DepthLevel {
                depth,
                mean_lambda: stable_sum(&mut values) / visits as f64,
                visits,
            }
        })
        .collect())
}
