use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ModelKind;
use crate::util::{mean, std_dev};

/// Hyperplane `normal · x = intercept`.
///
/// Points with `normal · x <= intercept` belong to the left child, points with
/// `normal · x > intercept` to the right child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlane {
    pub normal: Vec<f64>,
    pub intercept: f64,
}

impl SplitPlane {
    /// Axis-aligned plane `x[feature] = threshold`.
    pub fn axis(p: usize, feature: usize, threshold: f64) -> Self {
        let mut normal = vec![0.0; p];
        normal[feature] = 1.0;
        Self {
            normal,
            intercept: threshold,
        }
    }

    pub fn project(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(v, xi)| v * xi).sum()
    }

    /// `true` when `x` falls on the right (strictly greater) side.
    pub fn goes_right(&self, x: &[f64]) -> bool {
        self.project(x) > self.intercept
    }

    /// Feature index if the normal is `±e_j`.
    pub fn axis_feature(&self) -> Option<usize> {
        let mut found = None;
        for (j, &v) in self.normal.iter().enumerate() {
            if v != 0.0 {
                if found.is_some() || v.abs() != 1.0 {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }
}

/// Random unit normal with exactly `dof` nonzero, standard-normal components
/// at positions drawn uniformly without replacement.
pub fn sample_normal_vector<R: Rng + ?Sized>(p: usize, dof: usize, rng: &mut R) -> Vec<f64> {
    assert!(dof >= 1 && dof <= p, "dof must lie in [1, p]");
    let components = index::sample(rng, p, dof).into_vec();
    let mut draws = vec![0.0; dof];
    loop {
        for z in draws.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        let norm = draws.iter().map(|z| z * z).sum::<f64>().sqrt();
        // a zero draw in any component would leave fewer than `dof` nonzeros
        if norm > 0.0 && draws.iter().all(|&z| z != 0.0) {
            let mut v = vec![0.0; p];
            for (&j, z) in components.iter().zip(&draws) {
                v[j] = z / norm;
            }
            return v;
        }
    }
}

/// `lo + u * (hi - lo)` with `u ~ U[0, 1)`; `lo` when the interval is empty.
pub(crate) fn uniform_in<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if hi > lo {
        lo + rng.random::<f64>() * (hi - lo)
    } else {
        lo
    }
}

/// Intercept for a split with the given point projections.
///
/// IF and EIF draw uniformly over the projection range; EIF+ draws from a
/// normal centred on the projection mean with spread `eta` times the
/// population standard deviation, so it may land outside the range.
pub fn sample_intercept<R: Rng + ?Sized>(
    projections: &[f64],
    model: ModelKind,
    eta: f64,
    rng: &mut R,
) -> f64 {
    assert!(!projections.is_empty(), "projections must be nonempty");
    match model {
        ModelKind::If | ModelKind::Eif => {
            let (lo, hi) = projections
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
                    (lo.min(a), hi.max(a))
                });
            uniform_in(lo, hi, rng)
        }
        ModelKind::EifPlus => {
            let m = mean(projections);
            let s = std_dev(projections);
            if s > 0.0 {
                Normal::new(m, eta * s).expect("finite spread").sample(rng)
            } else {
                m
            }
        }
    }
}
