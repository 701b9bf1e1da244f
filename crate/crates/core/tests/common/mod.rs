//! Brute-force reference implementations used by the oracle and acceptance
//! tests. Nothing here calls the library's traversal, scoring or importance
//! code; it re-derives every quantity from the raw node arena.

#![allow(dead_code)]

use isoexplain::data::{Dataset, Matrix};
use isoexplain::forest::{Forest, ForestConfig, IsolationTree, ModelKind, TreeNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c_ref(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let h = ((n - 1) as f64).ln() + 0.5772156649;
    2.0 * h - 2.0 * (n as f64 - 1.0) / n as f64
}

/// One step of a root-to-leaf route: node index and the side taken.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub node: usize,
    pub went_right: bool,
}

/// Every root-to-leaf route of a tree, found by exhaustive recursion.
pub fn all_routes(tree: &IsolationTree) -> Vec<(Vec<Step>, usize)> {
    fn walk(
        tree: &IsolationTree,
        i: usize,
        prefix: &mut Vec<Step>,
        out: &mut Vec<(Vec<Step>, usize)>,
    ) {
        match &tree.nodes[i] {
            TreeNode::Leaf(_) => out.push((prefix.clone(), i)),
            TreeNode::Internal(n) => {
                for (child, right) in [(n.left, false), (n.right, true)] {
                    prefix.push(Step {
                        node: i,
                        went_right: right,
                    });
                    walk(tree, child, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, &mut Vec::new(), &mut out);
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// The unique route whose every condition `x` satisfies.
pub fn route_of(tree: &IsolationTree, x: &[f64]) -> (Vec<Step>, usize) {
    let mut matching: Vec<_> = all_routes(tree)
        .into_iter()
        .filter(|(steps, _)| {
            steps.iter().all(|s| match &tree.nodes[s.node] {
                TreeNode::Internal(n) => {
                    (dot(&n.plane.normal, x) > n.plane.intercept) == s.went_right
                }
                TreeNode::Leaf(_) => unreachable!(),
            })
        })
        .collect();
    assert_eq!(matching.len(), 1, "routes must partition space");
    matching.pop().unwrap()
}

fn internal(tree: &IsolationTree, i: usize) -> &isoexplain::forest::InternalNode {
    match &tree.nodes[i] {
        TreeNode::Internal(n) => n,
        TreeNode::Leaf(_) => panic!("not internal"),
    }
}

pub fn h_ref(tree: &IsolationTree, x: &[f64]) -> f64 {
    let (steps, leaf) = route_of(tree, x);
    steps.len() as f64 + c_ref(tree.nodes[leaf].size())
}

pub fn score_ref(forest: &Forest, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for t in &forest.trees {
        total += h_ref(t, x);
    }
    let mean = total / forest.trees.len() as f64;
    (2.0f64).powf(-mean / c_ref(forest.psi))
}

/// `(I, V)` for ExIFFI with absolute normals.
pub fn exiffi_ref(forest: &Forest, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = forest.n_features;
    let mut i_acc = vec![0.0; p];
    let mut v_acc = vec![0.0; p];
    for t in &forest.trees {
        let (steps, _) = route_of(t, x);
        for s in steps {
            let n = internal(t, s.node);
            let side = if s.went_right {
                n.right_size
            } else {
                n.left_size
            };
            let ratio = n.size as f64 / if side == 0 { 1.0 } else { side as f64 };
            for k in 0..p {
                i_acc[k] += ratio * n.plane.normal[k].abs();
                v_acc[k] += n.plane.normal[k].abs();
            }
        }
    }
    (i_acc, v_acc)
}

fn div0(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

pub fn lfi_ref(forest: &Forest, x: &[f64]) -> Vec<f64> {
    let (i, v) = exiffi_ref(forest, x);
    i.iter().zip(&v).map(|(a, b)| div0(*a, *b)).collect()
}

/// Predicted outlier flags: the `round(c*n)` largest scores, lower index first on ties.
pub fn predict_ref(forest: &Forest, ds: &Dataset, contamination: f64) -> Vec<bool> {
    let scores: Vec<f64> = (0..ds.n()).map(|r| score_ref(forest, ds.row(r))).collect();
    let k = (contamination * ds.n() as f64).round() as usize;
    let mut flags = vec![false; ds.n()];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for r in 0..ds.n() {
            if flags[r] {
                continue;
            }
            if best.is_none_or(|b| scores[r] > scores[b]) {
                best = Some(r);
            }
        }
        flags[best.unwrap()] = true;
    }
    flags
}

fn class_gfi(per_point: &[(Vec<f64>, Vec<f64>)], flags: &[bool], p: usize) -> Vec<f64> {
    let mut acc = [vec![0.0; p], vec![0.0; p], vec![0.0; p], vec![0.0; p]];
    for ((i, v), &out) in per_point.iter().zip(flags) {
        let base = if out { 0 } else { 2 };
        for k in 0..p {
            acc[base][k] += i[k];
            acc[base + 1][k] += v[k];
        }
    }
    (0..p)
        .map(|k| div0(div0(acc[0][k], acc[1][k]), div0(acc[2][k], acc[3][k])))
        .collect()
}

pub fn gfi_ref(forest: &Forest, ds: &Dataset, contamination: f64) -> Vec<f64> {
    let flags = predict_ref(forest, ds, contamination);
    let per: Vec<_> = (0..ds.n()).map(|r| exiffi_ref(forest, ds.row(r))).collect();
    class_gfi(&per, &flags, forest.n_features)
}

pub fn diffi_lambda_ref(n: usize, nl: usize, nr: usize) -> f64 {
    if nl == 0 || nr == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let a = nl.max(nr) as f64 / nf;
    let lo = (nf / 2.0).ceil() / nf;
    let hi = (nf - 1.0) / nf;
    if hi <= lo {
        1.0
    } else {
        (a - lo) / (2.0 * (hi - lo)) + 0.5
    }
}

pub fn diffi_gfi_ref(forest: &Forest, ds: &Dataset, contamination: f64) -> Vec<f64> {
    let p = forest.n_features;
    let flags = predict_ref(forest, ds, contamination);
    let per: Vec<_> = (0..ds.n())
        .map(|r| {
            let x = ds.row(r);
            let mut i_acc = vec![0.0; p];
            let mut v_acc = vec![0.0; p];
            for t in &forest.trees {
                let h = h_ref(t, x).max(1.0);
                let (steps, _) = route_of(t, x);
                for s in steps {
                    let n = internal(t, s.node);
                    let j = n.plane.normal.iter().position(|&v| v != 0.0).unwrap();
                    i_acc[j] += diffi_lambda_ref(n.size, n.left_size, n.right_size) / h;
                    v_acc[j] += 1.0;
                }
            }
            (i_acc, v_acc)
        })
        .collect();
    class_gfi(&per, &flags, p)
}

/// Random tiny fitted instance: 4..=8 points, 1..=3 features, 1..=3 trees,
/// depth cap 1..=3. Values are drawn on a coarse grid so ties occur.
pub fn tiny_instance(seed: u64) -> (Forest, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=8);
    let p = rng.random_range(1..=3);
    let data: Vec<f64> = (0..n * p)
        .map(|_| rng.random_range(0..6) as f64 * 0.5)
        .collect();
    let ds = Dataset::with_default_names("tiny", Matrix::new(n, p, data).unwrap(), None).unwrap();
    let model = [ModelKind::If, ModelKind::Eif, ModelKind::EifPlus][rng.random_range(0..3)];
    let cfg = ForestConfig {
        model,
        n_trees: rng.random_range(1..=3),
        subsample: rng.random_range(2..=n),
        max_depth: Some(rng.random_range(1..=3)),
        eta: 1.5,
        dof: None,
        seed: rng.random(),
    };
    (Forest::fit(&ds, &cfg).unwrap(), ds)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

pub fn all_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y))
}

/// Runs every oracle comparison on one instance; `Err` names the mismatch.
pub fn check_instance(seed: u64) -> Result<(), String> {
    use isoexplain::explain::{diffi_gfi, exiffi_gfi, exiffi_lfi, exiffi_point};

    let (forest, ds) = tiny_instance(seed);
    for r in 0..ds.n() {
        let x = ds.row(r);
        let s = forest.anomaly_score(x).unwrap();
        if !close(s, score_ref(&forest, x)) {
            return Err(format!(
                "seed {seed} row {r}: score {s} vs {}",
                score_ref(&forest, x)
            ));
        }
        let (i, v) = exiffi_point(&forest, x).unwrap();
        let (ir, vr) = exiffi_ref(&forest, x);
        if !all_close(i.values(), &ir) || !all_close(v.values(), &vr) {
            return Err(format!(
                "seed {seed} row {r}: I/V {:?}/{:?} vs {ir:?}/{vr:?}",
                i, v
            ));
        }
        let lfi = exiffi_lfi(&forest, x).unwrap();
        if !all_close(lfi.values(), &lfi_ref(&forest, x)) {
            return Err(format!("seed {seed} row {r}: LFI mismatch"));
        }
    }
    // 0.3 selects 1 or 2 of 4..=8 points, leaving both classes nonempty
    let c = 0.3;
    let gfi = exiffi_gfi(&forest, &ds, c).unwrap();
    if !all_close(gfi.values(), &gfi_ref(&forest, &ds, c)) {
        return Err(format!(
            "seed {seed}: GFI {:?} vs {:?}",
            gfi,
            gfi_ref(&forest, &ds, c)
        ));
    }
    if forest.model() == ModelKind::If {
        let d = diffi_gfi(&forest, &ds, c).unwrap();
        if !all_close(d.values(), &diffi_gfi_ref(&forest, &ds, c)) {
            return Err(format!(
                "seed {seed}: DIFFI {:?} vs {:?}",
                d,
                diffi_gfi_ref(&forest, &ds, c)
            ));
        }
    }
    Ok(())
}
