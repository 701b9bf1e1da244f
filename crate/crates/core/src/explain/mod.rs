//! Feature importance for isolation forests.
//!
//! ExIFFI works on any hyperplane forest: each internal node on a point's
//! path contributes `|X| / |side| * |v|`, and the local importance is that sum
//! normalised by the accumulated `|v|`. DIFFI is restricted to axis-aligned
//! forests and weighs each split by its induced imbalance over path depth.

mod diffi;
mod exiffi;
mod report;
mod scoremap;

pub use diffi::{diffi_gfi, diffi_node_lambda, diffi_point};
pub use exiffi::{
    exiffi_gfi, exiffi_gfi_with, exiffi_lfi, exiffi_lfi_all, exiffi_point, exiffi_point_with,
    node_lambda, NormalAccumulation,
};
pub use report::{gfi_over_runs, rank_features, GfiReport};
pub use scoremap::{depth_profile, scoremap_grid, DepthLevel, ScoremapGrid};

use std::fmt;
use std::ops::{Index, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{argsort_desc, safe_div, stable_sum_columns};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImportanceVector {
    values: Vec<f64>,
}

impl ImportanceVector {
    pub fn zeros(p: usize) -> Self {
        Self {
            values: vec![0.0; p],
        }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add_assign(&mut self, other: &ImportanceVector) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// Componentwise quotient with `x / 0 = 0`.
    pub fn ratio(&self, den: &ImportanceVector) -> ImportanceVector {
        let values = self
            .values
            .iter()
            .zip(&den.values)
            .map(|(&n, &d)| safe_div(n, d))
            .collect();
        Self { values }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// Feature indices from most to least important; ties go to the lower index.
    pub fn ranking(&self) -> Vec<usize> {
        argsort_desc(&self.values)
    }

    pub fn argmax(&self) -> Option<usize> {
        self.ranking().first().copied()
    }

    /// Order-independent sum of equally sized vectors.
    pub fn stable_total(flat: &[f64], p: usize) -> ImportanceVector {
        Self::from_vec(stable_sum_columns(flat, p))
    }
}

impl Index<usize> for ImportanceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl Mul<f64> for &ImportanceVector {
    type Output = ImportanceVector;

    fn mul(self, k: f64) -> ImportanceVector {
        ImportanceVector::from_vec(self.values.iter().map(|v| v * k).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Explainer {
    Exiffi,
    Diffi,
}

impl Explainer {
    pub fn as_str(self) -> &'static str {
        match self {
            Explainer::Exiffi => "exiffi",
            Explainer::Diffi => "diffi",
        }
    }
}

impl fmt::Display for Explainer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Explainer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exiffi" => Ok(Explainer::Exiffi),
            "diffi" => Ok(Explainer::Diffi),
            _ => Err(Error::InvalidConfig(format!("unknown explainer '{s}'"))),
        }
    }
}

/// Splits class sums into `(outliers, inliers)` and forms
/// `(I_O / V_O) / (I_I / V_I)`.
pub(crate) fn class_ratio(
    per_point: &[(ImportanceVector, ImportanceVector)],
    predicted: &[bool],
    p: usize,
) -> Result<ImportanceVector> {
    let (mut i_out, mut v_out, mut i_in, mut v_in) = (vec![], vec![], vec![], vec![]);
    for ((i, v), &is_out) in per_point.iter().zip(predicted) {
        if is_out {
            i_out.extend_from_slice(&i.values);
            v_out.extend_from_slice(&v.values);
        } else {
            i_in.extend_from_slice(&i.values);
            v_in.extend_from_slice(&v.values);
        }
    }
    if i_out.is_empty() {
        return Err(Error::EmptyClass("outlier"));
    }
    if i_in.is_empty() {
        return Err(Error::EmptyClass("inlier"));
    }
    let total = |flat: &[f64]| ImportanceVector::stable_total(flat, p);
    let hat_out = total(&i_out).ratio(&total(&v_out));
    let hat_in = total(&i_in).ratio(&total(&v_in));
    Ok(hat_out.ratio(&hat_in))
}
