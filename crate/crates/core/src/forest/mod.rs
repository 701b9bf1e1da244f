//! Isolation-tree ensembles with three split families:
//!
//! * `If`: axis-aligned cuts, feature chosen uniformly, threshold uniform over
//!   the node's range of that feature.
//! * `Eif`: oblique cuts with a random unit normal and an intercept drawn
//!   uniformly over the node's projections.
//! * `EifPlus`: oblique cuts with the intercept drawn from a normal centred on
//!   the mean projection with spread `eta * std`.
//!
//! Every tree gets its own generator seeded with
//! `seed ^ mix64(tree_index)` ([`crate::util::derive_seed`]), so trees can be
//! grown in any order or in parallel and still produce the same forest.

mod model_io;
mod split;
mod tree;

pub use model_io::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use split::{sample_intercept, sample_normal_vector, SplitPlane};
pub use tree::{InternalNode, IsolationTree, LeafNode, PathIter, TreeNode};

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::util::{derive_seed, rng_from_seed, stable_sum};

const EULER_GAMMA: f64 = 0.5772156649;

/// Average unsuccessful-search path length in a BST of `n` nodes,
/// `2 H(n-1) - 2 (n-1) / n` with `H(i) ~ ln i + gamma`. Zero for `n <= 1`.
pub fn c_factor(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let m = (n - 1) as f64;
    2.0 * (m.ln() + EULER_GAMMA) - 2.0 * m / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "IF")]
    If,
    #[serde(rename = "EIF")]
    Eif,
    #[serde(rename = "EIF+")]
    EifPlus,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::If, ModelKind::Eif, ModelKind::EifPlus];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::If => "IF",
            ModelKind::Eif => "EIF",
            ModelKind::EifPlus => "EIF+",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "if" => Ok(ModelKind::If),
            "eif" => Ok(ModelKind::Eif),
            "eif+" | "eifplus" | "eif_plus" | "eifp" => Ok(ModelKind::EifPlus),
            _ => Err(Error::UnknownModel(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub model: ModelKind,
    pub n_trees: usize,
    /// Requested subsample size; capped at the number of training rows.
    pub subsample: usize,
    /// Defaults to `ceil(log2(psi))` for the effective subsample size.
    pub max_depth: Option<usize>,
    /// Intercept spread multiplier, EIF+ only.
    pub eta: f64,
    /// Nonzero components per normal (EIF/EIF+). Defaults to `p`; ignored by IF.
    pub dof: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::EifPlus,
            n_trees: 100,
            subsample: 256,
            max_depth: None,
            eta: 1.5,
            dof: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn new(model: ModelKind) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
        }
        if self.subsample < 2 {
            return Err(Error::InvalidConfig("subsample must be at least 2".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if self.dof == Some(0) {
            return Err(Error::InvalidConfig("dof must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective degrees of freedom for `p` features.
    pub fn resolved_dof(&self, p: usize) -> Result<usize> {
        match (self.model, self.dof) {
            (ModelKind::If, _) => Ok(1),
            (_, None) => Ok(p),
            (_, Some(d)) if (1..=p).contains(&d) => Ok(d),
            (_, Some(d)) => Err(Error::InvalidConfig(format!("dof {d} outside [1, {p}]"))),
        }
    }

    pub fn resolved_max_depth(&self, psi: usize) -> usize {
        self.max_depth
            .unwrap_or_else(|| (psi as f64).log2().ceil().max(1.0) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub config: ForestConfig,
    /// Effective subsample size, `min(config.subsample, n)`.
    pub psi: usize,
    pub n_features: usize,
    pub max_depth: usize,
    pub trees: Vec<IsolationTree>,
    /// Fingerprint of the training data.
    pub fitted_on: String,
}

impl Forest {
    pub fn fit(ds: &Dataset, config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        let n = ds.n();
        if n < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 rows to fit, got {n}"
            )));
        }
        let p = ds.p();
        let dof = config.resolved_dof(p)?;
        let psi = config.subsample.min(n);
        let max_depth = config.resolved_max_depth(psi);
        let grower = TreeGrower {
            data: ds.features(),
            model: config.model,
            eta: config.eta,
            dof,
            max_depth,
        };
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(config.seed, t as u64));
                grower.grow(psi, &mut rng)
            })
            .collect();
        let mut config = config.clone();
        if config.model == ModelKind::If {
            config.dof = None;
        }
        Ok(Self {
            config,
            psi,
            n_features: p,
            max_depth,
            trees,
            fitted_on: ds.fingerprint(),
        })
    }

    pub fn model(&self) -> ModelKind {
        self.config.model
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Mean leaf-adjusted path length over all trees.
    pub fn mean_depth(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut depths: Vec<f64> = self.trees.iter().map(|t| t.depth_h(x)).collect();
        Ok(stable_sum(&mut depths) / self.trees.len() as f64)
    }

    /// `2^(-E[h(x)] / c(psi))`.
    pub fn anomaly_score(&self, x: &[f64]) -> Result<f64> {
        Ok(score_from_depth(self.mean_depth(x)?, self.psi))
    }

    pub fn score_matrix(&self, m: &Matrix) -> Result<Vec<f64>> {
        if m.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: m.cols(),
            });
        }
        (0..m.rows())
            .into_par_iter()
            .map(|i| self.anomaly_score(m.row(i)))
            .collect()
    }

    pub fn score_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.score_matrix(ds.features())
    }

    /// Labels the `round(contamination * n)` highest-scoring rows as outliers.
    pub fn predict_labels(&self, ds: &Dataset, contamination: f64) -> Result<Vec<bool>> {
        let scores = self.score_dataset(ds)?;
        threshold_top(&scores, contamination)
    }
}

pub fn score_from_depth(mean_depth: f64, psi: usize) -> f64 {
    2f64.powf(-mean_depth / c_factor(psi))
}

/// Flags the `round(contamination * n)` largest scores; ties go to the lower
/// index.
pub fn threshold_top(scores: &[f64], contamination: f64) -> Result<Vec<bool>> {
    if !(contamination > 0.0 && contamination < 1.0) {
        return Err(Error::ContaminationOutOfRange(contamination));
    }
    let k = (contamination * scores.len() as f64).round() as usize;
    let mut labels = vec![false; scores.len()];
    for i in crate::util::argsort_desc(scores).into_iter().take(k) {
        labels[i] = true;
    }
    Ok(labels)
}

struct TreeGrower<'a> {
    data: &'a Matrix,
    model: ModelKind,
    eta: f64,
    dof: usize,
    max_depth: usize,
}

impl TreeGrower<'_> {
    fn grow<R: Rng + ?Sized>(&self, psi: usize, rng: &mut R) -> IsolationTree {
        let mut rows = index::sample(rng, self.data.rows(), psi).into_vec();
        let mut nodes = Vec::new();
        self.build(&mut nodes, &mut rows, 0, rng);
        IsolationTree { psi, nodes }
    }

    fn build<R: Rng + ?Sized>(
        &self,
        nodes: &mut Vec<TreeNode>,
        rows: &mut [usize],
        depth: usize,
        rng: &mut R,
    ) -> usize {
        let id = nodes.len();
        let size = rows.len();
        let leaf = TreeNode::Leaf(LeafNode { size, depth });
        if depth >= self.max_depth || size <= 1 {
            nodes.push(leaf);
            return id;
        }
        let Some(plane) = self.draw_plane(rows, rng) else {
            nodes.push(leaf);
            return id;
        };

        // partition in place: left side (v.x <= alpha) first
        let mut split = 0;
        for k in 0..rows.len() {
            if !plane.goes_right(self.data.row(rows[k])) {
                rows.swap(split, k);
                split += 1;
            }
        }
        nodes.push(leaf); // placeholder, replaced below
        let (l_rows, r_rows) = rows.split_at_mut(split);
        let left = self.build(nodes, l_rows, depth + 1, rng);
        let right = self.build(nodes, r_rows, depth + 1, rng);
        nodes[id] = TreeNode::Internal(InternalNode {
            plane,
            size,
            left_size: split,
            right_size: size - split,
            left,
            right,
            depth,
        });
        id
    }

    /// `None` when every row in the node is identical.
    fn draw_plane<R: Rng + ?Sized>(&self, rows: &[usize], rng: &mut R) -> Option<SplitPlane> {
        let p = self.data.cols();
        match self.model {
            ModelKind::If => {
                let ranges = feature_ranges(self.data, rows);
                let usable: Vec<usize> = (0..p).filter(|&j| ranges[j].0 < ranges[j].1).collect();
                if usable.is_empty() {
                    return None;
                }
                let q = usable[rng.random_range(0..usable.len())];
                let (lo, hi) = ranges[q];
                Some(SplitPlane::axis(p, q, split::uniform_in(lo, hi, rng)))
            }
            ModelKind::Eif | ModelKind::EifPlus => {
                let first = self.data.row(rows[0]);
                if rows.iter().all(|&r| self.data.row(r) == first) {
                    return None;
                }
                let normal = sample_normal_vector(p, self.dof, rng);
                let mut plane = SplitPlane {
                    normal,
                    intercept: 0.0,
                };
                let projections: Vec<f64> = rows
                    .iter()
                    .map(|&r| plane.project(self.data.row(r)))
                    .collect();
                plane.intercept = sample_intercept(&projections, self.model, self.eta, rng);
                Some(plane)
            }
        }
    }
}

fn feature_ranges(data: &Matrix, rows: &[usize]) -> Vec<(f64, f64)> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); data.cols()];
    for &r in rows {
        for (range, &v) in ranges.iter_mut().zip(data.row(r)) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    ranges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_preset, split_scenario, Preset, Scenario};

    fn grid(n: usize, p: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..p)
                    .map(|j| ((i * 7 + j * 3) % 11) as f64 + i as f64 * 0.01)
                    .collect()
            })
            .collect();
        Dataset::with_default_names("grid", Matrix::from_rows(p, &rows).unwrap(), None).unwrap()
    }

    #[test]
    fn c_factor_values() {
        assert_eq!(c_factor(0), 0.0);
        assert_eq!(c_factor(1), 0.0);
        assert!((c_factor(2) - 0.154_431_329_8).abs() < 1e-10);
        assert!((c_factor(256) - 10.2445).abs() < 1e-3);
    }

    #[test]
    fn score_reference_points() {
        assert_eq!(score_from_depth(c_factor(256), 256), 0.5);
        assert_eq!(score_from_depth(0.0, 256), 1.0);
        assert!((score_from_depth(1.0, 256) - 0.934_579_455_1).abs() < 1e-9);
    }

    #[test]
    fn if_on_one_feature_uses_unit_axis() {
        let ds = grid(50, 1);
        let f = Forest::fit(&ds, &ForestConfig::new(ModelKind::If).with_trees(10)).unwrap();
        for t in &f.trees {
            for n in t.internal_nodes() {
                assert_eq!(n.plane.normal, vec![1.0]);
            }
        }
    }

    #[test]
    fn depth_cap_one_gives_single_split() {
        let ds = grid(64, 3);
        let cfg = ForestConfig {
            max_depth: Some(1),
            ..ForestConfig::new(ModelKind::Eif).with_trees(20)
        };
        let f = Forest::fit(&ds, &cfg).unwrap();
        for t in &f.trees {
            assert_eq!(t.internal_nodes().count(), 1);
        }
    }

    #[test]
    fn two_points_isolated_at_depth_one() {
        let m = Matrix::from_rows(2, &[[0.0, 0.0], [1.0, 2.0]]).unwrap();
        let ds = Dataset::with_default_names("two", m, None).unwrap();
        for model in [ModelKind::If, ModelKind::Eif] {
            for seed in 0..200 {
                let cfg = ForestConfig::new(model).with_trees(1).with_seed(seed);
                let f = Forest::fit(&ds, &cfg).unwrap();
                let t = &f.trees[0];
                assert_eq!(t.nodes.len(), 3, "{model} seed {seed}");
                for i in 0..2 {
                    let leaf = t.leaf_of(ds.row(i));
                    assert_eq!((leaf.size, leaf.depth), (1, 1));
                }
            }
        }
    }

    #[test]
    fn identical_points_stop_recursion() {
        let m = Matrix::from_rows(2, &[[1.0, 1.0]; 10]).unwrap();
        let ds = Dataset::with_default_names("same", m, None).unwrap();
        for model in ModelKind::ALL {
            let f = Forest::fit(&ds, &ForestConfig::new(model).with_trees(3)).unwrap();
            for t in &f.trees {
                assert_eq!(t.nodes.len(), 1);
                assert_eq!(t.root().size(), 10);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let one = Dataset::with_default_names("one", Matrix::from_rows(1, &[[1.0]]).unwrap(), None)
            .unwrap();
        assert!(Forest::fit(&one, &ForestConfig::default()).is_err());
        let ds = grid(10, 2);
        let bad_eta = ForestConfig {
            eta: 0.0,
            ..ForestConfig::default()
        };
        assert!(matches!(
            Forest::fit(&ds, &bad_eta),
            Err(Error::InvalidConfig(_))
        ));
        let bad_dof = ForestConfig {
            dof: Some(3),
            ..ForestConfig::new(ModelKind::Eif)
        };
        assert!(Forest::fit(&ds, &bad_dof).is_err());
        let small_psi = ForestConfig {
            subsample: 1,
            ..ForestConfig::default()
        };
        assert!(Forest::fit(&ds, &small_psi).is_err());
    }

    #[test]
    fn dimension_mismatch_on_score() {
        let ds = grid(20, 2);
        let f = Forest::fit(&ds, &ForestConfig::default().with_trees(5)).unwrap();
        assert!(matches!(
            f.anomaly_score(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn predict_labels_examples() {
        let labels = threshold_top(&[0.9, 0.1, 0.8, 0.2], 0.5).unwrap();
        assert_eq!(labels, vec![true, false, true, false]);
        let labels = threshold_top(&[0.3; 4], 0.25).unwrap();
        assert_eq!(labels, vec![true, false, false, false]);
        assert!(threshold_top(&[0.3; 4], 0.1).unwrap().iter().all(|&l| !l));
        assert!(threshold_top(&[0.3; 4], 0.0).is_err());
        assert!(threshold_top(&[0.3; 4], 1.0).is_err());
    }

    #[test]
    fn stored_counts_replay_on_training_subsample() {
        let ds = grid(300, 4);
        for model in ModelKind::ALL {
            let f = Forest::fit(&ds, &ForestConfig::new(model).with_trees(5).with_seed(9)).unwrap();
            for t in &f.trees {
                for n in t.internal_nodes() {
                    assert_eq!(n.left_size + n.right_size, n.size);
                }
                assert_eq!(t.root().size(), 256);
            }
        }
    }

    #[test]
    fn xaxis_outliers_score_higher_under_oblique_models() {
        let ds = make_preset(Preset::Xaxis, 0).unwrap();
        let split = split_scenario(&ds, Scenario::II, 0).unwrap();
        for model in [ModelKind::Eif, ModelKind::EifPlus] {
            let f = Forest::fit(&split.train, &ForestConfig::new(model).with_seed(1)).unwrap();
            let s = f.score_dataset(&ds).unwrap();
            let labels = ds.labels().unwrap();
            let mean = |want: bool| {
                let v: Vec<f64> = (0..ds.n())
                    .filter(|&i| labels[i] == want)
                    .map(|i| s[i])
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            assert!(mean(true) > mean(false), "{model}");
        }
    }

    #[test]
    fn model_names_parse() {
        assert_eq!("eif+".parse::<ModelKind>().unwrap(), ModelKind::EifPlus);
        assert_eq!("IF".parse::<ModelKind>().unwrap(), ModelKind::If);
        assert!("rf".parse::<ModelKind>().is_err());
    }
}
