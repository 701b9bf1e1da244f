use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{class_ratio, ImportanceVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{Forest, InternalNode};

/// How split normals are accumulated into the normalising vector `V`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalAccumulation {
    /// `|v|` componentwise.
    #[default]
    Abs,
    /// Raw `v`; components can cancel or turn negative.
    Signed,
}

/// Importance contributed by one split to a point:
/// `|X| / max(|side|, 1) * |v|`, where `side` is the child `x` is routed to.
pub fn node_lambda(node: &InternalNode, x: &[f64]) -> ImportanceVector {
    let (_, side_count) = node.side(x);
    let ratio = node.size as f64 / side_count.max(1) as f64;
    ImportanceVector::from_vec(node.plane.normal.iter().map(|v| ratio * v.abs()).collect())
}

pub fn exiffi_point(forest: &Forest, x: &[f64]) -> Result<(ImportanceVector, ImportanceVector)> {
    exiffi_point_with(forest, x, NormalAccumulation::Abs)
}

/// Accumulated importance `I(x)` and normaliser `V(x)` over every tree.
pub fn exiffi_point_with(
    forest: &Forest,
    x: &[f64],
    mode: NormalAccumulation,
) -> Result<(ImportanceVector, ImportanceVector)> {
    forest.check_dim(x)?;
    let p = forest.n_features;
    let mut per_i = vec![0.0; forest.trees.len() * p];
    let mut per_v = vec![0.0; forest.trees.len() * p];
    for (t, tree) in forest.trees.iter().enumerate() {
        let (i, v) = (
            &mut per_i[t * p..(t + 1) * p],
            &mut per_v[t * p..(t + 1) * p],
        );
        for node in tree.path(x) {
            let (_, side_count) = node.side(x);
            let ratio = node.size as f64 / side_count.max(1) as f64;
            for (k, n) in node.plane.normal.iter().enumerate() {
                i[k] += ratio * n.abs();
                v[k] += match mode {
                    NormalAccumulation::Abs => n.abs(),
                    NormalAccumulation::Signed => *n,
                };
            }
        }
    }
    Ok((
        ImportanceVector::stable_total(&per_i, p),
        ImportanceVector::stable_total(&per_v, p),
    ))
}

/// Local feature importance `I(x) / V(x)`, with unused features at 0.
pub fn exiffi_lfi(forest: &Forest, x: &[f64]) -> Result<ImportanceVector> {
    let (i, v) = exiffi_point(forest, x)?;
    Ok(i.ratio(&v))
}

pub fn exiffi_lfi_all(forest: &Forest, ds: &Dataset) -> Result<Vec<ImportanceVector>> {
    (0..ds.n())
        .into_par_iter()
        .map(|r| exiffi_lfi(forest, ds.row(r)))
        .collect()
}

pub fn exiffi_gfi(forest: &Forest, ds: &Dataset, contamination: f64) -> Result<ImportanceVector> {
    exiffi_gfi_with(forest, ds, contamination, NormalAccumulation::Abs)
}

/// Global feature importance: normalised importance over predicted
/// outliers divided by that over predicted inliers.
pub fn exiffi_gfi_with(
    forest: &Forest,
    ds: &Dataset,
    contamination: f64,
    mode: NormalAccumulation,
) -> Result<ImportanceVector> {
    if ds.p() != forest.n_features {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features,
            found: ds.p(),
        });
    }
    let predicted = forest.predict_labels(ds, contamination)?;
    let per_point = (0..ds.n())
        .into_par_iter()
        .map(|r| exiffi_point_with(forest, ds.row(r), mode))
        .collect::<Result<Vec<_>>>()?;
    class_ratio(&per_point, &predicted, forest.n_features)
}
