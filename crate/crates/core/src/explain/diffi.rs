use rayon::prelude::*;

use super::{class_ratio, ImportanceVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{Forest, InternalNode, ModelKind};

/// Induced imbalance of an axis-aligned split, in `{0} ∪ [0.5, 1]`.
///
/// With `a = max(n_l, n_r) / n`, the score rescales `a` from
/// `[ceil(n/2)/n, (n-1)/n]` onto `[0.5, 1]`. Splits with an empty side score
/// 0. For `n <= 3` that interval collapses to a point and the only possible
/// nonempty split is also the most isolating one, so it scores 1.
pub fn diffi_node_lambda(node: &InternalNode) -> Result<f64> {
    if node.plane.axis_feature().is_none() {
        return Err(Error::NotAxisAligned("DIFFI"));
    }
    let (nl, nr, n) = (node.left_size, node.right_size, node.size);
    if nl == 0 || nr == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let a = nl.max(nr) as f64 / nf;
    let lo = n.div_ceil(2) as f64 / nf;
    let hi = (n - 1) as f64 / nf;
    if hi <= lo {
        return Ok(1.0);
    }
    Ok((a - lo) / (2.0 * (hi - lo)) + 0.5)
}

/// Per-point DIFFI accumulators: `I` gains `lambda / h_t(x)` on the split
/// feature of every node on the path, `V` counts the visits.
pub fn diffi_point(forest: &Forest, x: &[f64]) -> Result<(ImportanceVector, ImportanceVector)> {
    forest.check_dim(x)?;
    let p = forest.n_features;
    let mut per_i = vec![0.0; forest.trees.len() * p];
    let mut per_v = vec![0.0; forest.trees.len() * p];
    for (t, tree) in forest.trees.iter().enumerate() {
        let h = tree.depth_h(x).max(1.0);
        let (i, v) = (
            &mut per_i[t * p..(t + 1) * p],
            &mut per_v[t * p..(t + 1) * p],
        );
        for node in tree.path(x) {
            let j = node
                .plane
                .axis_feature()
                .ok_or(Error::NotAxisAligned("DIFFI"))?;
            i[j] += diffi_node_lambda(node)? / h;
            v[j] += 1.0;
        }
    }
    Ok((
        ImportanceVector::stable_total(&per_i, p),
        ImportanceVector::stable_total(&per_v, p),
    ))
}

/// DIFFI global importance `(I_O / V_O) / (I_I / V_I)` over predicted classes.
pub fn diffi_gfi(forest: &Forest, ds: &Dataset, contamination: f64) -> Result<ImportanceVector> {
    if forest.model() != ModelKind::If {
        return Err(Error::NotAxisAligned("DIFFI"));
    }
    if ds.p() != forest.n_features {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features,
            found: ds.p(),
        });
    }
    let predicted = forest.predict_labels(ds, contamination)?;
    let per_point = (0..ds.n())
        .into_par_iter()
        .map(|r| diffi_point(forest, ds.row(r)))
        .collect::<Result<Vec<_>>>()?;
    class_ratio(&per_point, &predicted, forest.n_features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::SplitPlane;

    fn node(n: usize, nl: usize) -> InternalNode {
        InternalNode {
            plane: SplitPlane::axis(2, 0, 0.0),
            size: n,
            left_size: nl,
            right_size: n - nl,
            left: 1,
            right: 2,
            depth: 0,
        }
    }

    #[test]
    fn imbalance_examples() {
        assert!((diffi_node_lambda(&node(10, 9)).unwrap() - 1.0).abs() < 1e-12);
        assert!((diffi_node_lambda(&node(10, 1)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(diffi_node_lambda(&node(10, 5)).unwrap(), 0.5);
        assert_eq!(diffi_node_lambda(&node(10, 0)).unwrap(), 0.0);
        assert_eq!(diffi_node_lambda(&node(10, 10)).unwrap(), 0.0);
        assert_eq!(diffi_node_lambda(&node(2, 1)).unwrap(), 1.0);
        assert_eq!(diffi_node_lambda(&node(3, 2)).unwrap(), 1.0);
    }

    #[test]
    fn imbalance_range() {
        for n in 2..40 {
            for nl in 0..=n {
                let g = diffi_node_lambda(&node(n, nl)).unwrap();
                assert!(
                    g == 0.0 || (0.5 - 1e-12..=1.0 + 1e-12).contains(&g),
                    "n={n} nl={nl} g={g}"
                );
            }
        }
    }

    #[test]
    fn oblique_node_is_rejected() {
        let mut n = node(4, 2);
        n.plane.normal = vec![0.6, 0.8];
        assert!(matches!(
            diffi_node_lambda(&n),
            Err(Error::NotAxisAligned(_))
        ));
    }
}
