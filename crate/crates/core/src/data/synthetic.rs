//! Synthetic benchmarks: inliers uniform in a p-ball, outliers displaced
//! along a fixed direction `u` with Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::util::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_inliers: usize,
    pub n_outliers: usize,
    pub p: usize,
    /// Radius of the inlier ball.
    pub r: f64,
    /// Offset of the outliers along `u`.
    pub d: f64,
    /// Direction weights; nonzero entries mark the anomalous features.
    pub u_raw: Vec<f64>,
    /// Bounds of the uniform per-row displacement.
    pub value_range: [f64; 2],
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidSpec("p must be at least 1".into()));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "radius must be positive, got {}",
                self.r
            )));
        }
        if !self.d.is_finite() {
            return Err(Error::InvalidSpec("distance must be finite".into()));
        }
        if self.u_raw.len() != self.p {
            return Err(Error::InvalidSpec(format!(
                "direction has {} entries for p = {}",
                self.u_raw.len(),
                self.p
            )));
        }
        if self.u_raw.iter().any(|v| !v.is_finite()) || self.u_raw.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidSpec(
                "direction must have a nonzero finite entry".into(),
            ));
        }
        let [lo, hi] = self.value_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidSpec(format!(
                "invalid value range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// `u_raw` scaled to unit Euclidean norm.
    pub fn unit_direction(&self) -> Vec<f64> {
        let norm = self.u_raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.u_raw.iter().map(|v| v / norm).collect()
    }
}

/// Rejection-samples `n_inliers` points from the cube `[-r, r]^p`, keeping
/// those whose Euclidean norm is at most `r`.
pub fn generate_inliers<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Matrix {
    let mut out = Matrix::empty(spec.p);
    let mut point = vec![0.0; spec.p];
    let r2 = spec.r * spec.r;
    while out.rows() < spec.n_inliers {
        for v in point.iter_mut() {
            *v = rng.random_range(-spec.r..=spec.r);
        }
        if point.iter().map(|v| v * v).sum::<f64>() <= r2 {
            out.push_row(&point).expect("row width matches p");
        }
    }
    out
}

/// One outlier row: `d*u_i + x*u_i + noise()` on anomalous features and
/// `noise()` elsewhere. `x` is shared by all anomalous features of the row.
pub fn outlier_row(u: &[f64], d: f64, x: f64, mut noise: impl FnMut() -> f64) -> Vec<f64> {
    u.iter()
        .map(|&ui| {
            if ui != 0.0 {
                d * ui + x * ui + noise()
            } else {
                noise()
            }
        })
        .collect()
}

pub fn generate_outliers<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Matrix> {
    spec.validate()?;
    let u = spec.unit_direction();
    let [lo, hi] = spec.value_range;
    let mut out = Matrix::empty(spec.p);
    for _ in 0..spec.n_outliers {
        let x = if lo < hi {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        let row = outlier_row(&u, spec.d, x, || StandardNormal.sample(rng));
        out.push_row(&row)?;
    }
    Ok(out)
}

/// Named synthetic benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Xaxis,
    Bisect,
    Bisect3d,
    Bisect3dSkewed,
    Bisect6d,
    Bimodal,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Xaxis,
        Preset::Bisect,
        Preset::Bisect3d,
        Preset::Bisect3dSkewed,
        Preset::Bisect6d,
        Preset::Bimodal,
    ];

    /// The five six-dimensional ball benchmarks.
    pub const BALL: [Preset; 5] = [
        Preset::Xaxis,
        Preset::Bisect,
        Preset::Bisect3d,
        Preset::Bisect3dSkewed,
        Preset::Bisect6d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Xaxis => "xaxis",
            Preset::Bisect => "bisect",
            Preset::Bisect3d => "bisect3d",
            Preset::Bisect3dSkewed => "bisect3d_skewed",
            Preset::Bisect6d => "bisect6d",
            Preset::Bimodal => "bimodal",
        }
    }

    fn direction(self) -> Option<[f64; 6]> {
        match self {
            Preset::Xaxis => Some([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Preset::Bisect => Some([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            Preset::Bisect3d => Some([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
            Preset::Bisect3dSkewed => Some([4.0, 3.0, 2.0, 0.0, 0.0, 0.0]),
            Preset::Bisect6d => Some([1.0; 6]),
            Preset::Bimodal => None,
        }
    }

    /// Generator parameters for the ball presets; `None` for `bimodal`.
    pub fn spec(self, seed: u64) -> Option<SyntheticSpec> {
        self.direction().map(|u| SyntheticSpec {
            n_inliers: 1000,
            n_outliers: 100,
            p: 6,
            r: 5.0,
            d: 5.0,
            u_raw: u.to_vec(),
            value_range: [0.0, 5.0],
            seed,
        })
    }

    /// Ground-truth feature relevance, `|u_raw|`.
    pub fn relevance(self) -> Vec<f64> {
        match self.direction() {
            Some(u) => u.iter().map(|v| v.abs()).collect(),
            // outliers deviate along the anti-bisector, equally in both features
            None => vec![1.0, 1.0],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect();
        match key.as_str() {
            "xaxis" => Ok(Preset::Xaxis),
            "bisect" | "bisec" => Ok(Preset::Bisect),
            "bisect3d" | "bisec3d" => Ok(Preset::Bisect3d),
            "bisect3dskewed" | "bisec3dskewed" => Ok(Preset::Bisect3dSkewed),
            "bisect6d" | "bisec6d" => Ok(Preset::Bisect6d),
            "bimodal" => Ok(Preset::Bimodal),
            _ => Err(Error::UnknownPreset(s.to_owned())),
        }
    }
}

/// Builds the labeled dataset for `preset`: inlier rows first, then outliers.
pub fn make_preset(preset: Preset, seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let (features, n_out) = match preset.spec(seed) {
        Some(spec) => {
            let inliers = generate_inliers(&spec, &mut rng);
            let outliers = generate_outliers(&spec, &mut rng)?;
            (inliers.vstack(&outliers)?, spec.n_outliers)
        }
        None => bimodal(&mut rng)?,
    };
    let n_in = features.rows() - n_out;
    let labels = (0..features.rows()).map(|i| i >= n_in).collect();
    Dataset::with_default_names(preset.as_str(), features, Some(labels))
}

/// Two unit-variance clusters at (4,4) and (-4,-4), outliers near (5,-5) and
/// (-5,5). 1000 inliers, 26 outliers.
fn bimodal<R: Rng + ?Sized>(rng: &mut R) -> Result<(Matrix, usize)> {
    const PER_CLUSTER: usize = 500;
    const PER_TAIL: usize = 13;
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut m = Matrix::empty(2);
    for centre in [[4.0, 4.0], [-4.0, -4.0]] {
        for _ in 0..PER_CLUSTER {
            m.push_row(&[centre[0] + unit.sample(rng), centre[1] + unit.sample(rng)])?;
        }
    }
    for centre in [[5.0, -5.0], [-5.0, 5.0]] {
        for _ in 0..PER_TAIL {
            m.push_row(&[centre[0] + unit.sample(rng), centre[1] + unit.sample(rng)])?;
        }
    }
    Ok((m, 2 * PER_TAIL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n_in: usize, n_out: usize, p: usize, u: Vec<f64>) -> SyntheticSpec {
        SyntheticSpec {
            n_inliers: n_in,
            n_outliers: n_out,
            p,
            r: 5.0,
            d: 5.0,
            u_raw: u,
            value_range: [0.0, 5.0],
            seed: 1,
        }
    }

    #[test]
    fn zero_inliers_gives_empty_matrix() {
        let m = generate_inliers(&spec(0, 0, 3, vec![1.0, 0.0, 0.0]), &mut rng_from_seed(3));
        assert_eq!(m.rows(), 0);
        assert_eq!(m.cols(), 3);
    }

    #[test]
    fn one_dimensional_ball_is_interval() {
        let m = generate_inliers(&spec(500, 0, 1, vec![1.0]), &mut rng_from_seed(9));
        assert!(m.as_slice().iter().all(|v| (-5.0..=5.0).contains(v)));
    }

    #[test]
    fn inliers_lie_in_ball_and_are_centred() {
        let m = generate_inliers(&spec(1000, 0, 6, vec![1.0; 6]), &mut rng_from_seed(2024));
        assert_eq!(m.rows(), 1000);
        for r in m.iter_rows() {
            assert!(r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 5.0);
        }
        for j in 0..6 {
            let mean = m.column(j).sum::<f64>() / 1000.0;
            assert!(mean.abs() <= 0.3, "coordinate {j} mean {mean}");
        }
    }

    #[test]
    fn zero_direction_rejected() {
        let s = spec(1, 1, 2, vec![0.0, 0.0]);
        assert!(matches!(
            generate_outliers(&s, &mut rng_from_seed(0)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn noise_free_outlier_is_scaled_direction() {
        let s = spec(0, 1, 6, vec![4.0, 3.0, 2.0, 0.0, 0.0, 0.0]);
        let u = s.unit_direction();
        let row = outlier_row(&u, s.d, 0.0, || 0.0);
        for (got, ui) in row.iter().zip(&u) {
            assert_eq!(*got, s.d * ui);
        }
        // magnitudes keep the 4:3:2 proportion before noise
        let row = outlier_row(&u, 5.0, 2.5, || 0.0);
        assert!((row[0] / row[1] - 4.0 / 3.0).abs() < 1e-12);
        assert!((row[1] / row[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn xaxis_outlier_columns() {
        let s = Preset::Xaxis.spec(5).unwrap();
        let m = generate_outliers(&s, &mut rng_from_seed(5)).unwrap();
        assert_eq!(m.rows(), 100);
        assert!(m.column(0).all(|v| (5.0 - 4.0..=10.0 + 4.0).contains(&v)));
        for j in 1..6 {
            let mean = m.column(j).sum::<f64>() / 100.0;
            assert!(mean.abs() < 0.5);
        }
    }

    #[test]
    fn preset_shapes() {
        let x = make_preset(Preset::Xaxis, 1).unwrap();
        assert_eq!(x.n(), 1100);
        assert!((x.contamination().unwrap() - 0.0909).abs() < 1e-3);
        let b = make_preset(Preset::Bisect6d, 1).unwrap();
        assert_eq!(b.outlier_count(), Some(100));
        let bm = make_preset(Preset::Bimodal, 1).unwrap();
        assert_eq!(bm.p(), 2);
        let frac = bm.contamination().unwrap();
        assert!((frac - 0.025).abs() <= 1.0 / bm.n() as f64);
    }

    #[test]
    fn preset_names_are_case_insensitive() {
        assert_eq!("XAxis".parse::<Preset>().unwrap(), Preset::Xaxis);
        assert_eq!(
            "Bisect3D_Skewed".parse::<Preset>().unwrap(),
            Preset::Bisect3dSkewed
        );
        assert!(matches!(
            "nope".parse::<Preset>(),
            Err(Error::UnknownPreset(_))
        ));
        for p in Preset::ALL {
            assert_eq!(p.as_str().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn presets_are_seed_deterministic() {
        for p in Preset::ALL {
            let a = make_preset(p, 77).unwrap();
            let b = make_preset(p, 77).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, make_preset(p, 78).unwrap());
        }
    }

    #[test]
    fn xaxis_anomalous_column_separable() {
        let ds = make_preset(Preset::Xaxis, 11).unwrap();
        let labels = ds.labels().unwrap();
        let mean_abs = |j: usize| {
            let (s, c) = (0..ds.n())
                .filter(|&i| labels[i])
                .fold((0.0, 0usize), |(s, c), i| (s + ds.row(i)[j].abs(), c + 1));
            s / c as f64
        };
        let noise = (1..6).map(mean_abs).fold(0.0, f64::max);
        assert!(mean_abs(0) >= 3.0 * noise);
    }
}
