//! Dataset representation, CSV ingestion, synthetic benchmark generation and
//! train/evaluation scenario splitting.

mod csv_io;
mod scenario;
mod synthetic;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use scenario::{split_scenario, Scenario, ScenarioSplit};
pub use synthetic::{
    generate_inliers, generate_outliers, make_preset, outlier_row, Preset, SyntheticSpec,
};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDataset(format!(
                "matrix buffer has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::empty(cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.iter_rows().map(move |r| r[j])
    }

    /// Stacks `other` below `self`.
    pub fn vstack(mut self, other: &Matrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        self.data.extend_from_slice(&other.data);
        self.rows += other.rows;
        Ok(self)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for r in self.iter_rows() {
            data.extend(columns.iter().map(|&j| r[j]));
        }
        Self {
            rows: self.rows,
            cols: columns.len(),
            data,
        }
    }
}

/// A named numeric table with optional binary anomaly labels
/// (`true` = outlier).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Matrix,
    feature_names: Vec<String>,
    labels: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        feature_names: Vec<String>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        if features.cols() == 0 {
            return Err(Error::InvalidDataset(
                "dataset needs at least one feature".into(),
            ));
        }
        if features.rows() == 0 {
            return Err(Error::InvalidDataset(
                "dataset needs at least one row".into(),
            ));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / features.cols(),
                pos % features.cols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != features.rows() {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {} rows",
                    l.len(),
                    features.rows()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            features,
            feature_names,
            labels,
        })
    }

    /// Dataset with generated feature names `x0 .. x{p-1}`.
    pub fn with_default_names(
        name: impl Into<String>,
        features: Matrix,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let names = default_feature_names(features.cols());
        Self::new(name, features, names, labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn require_labels(&self) -> Result<&[bool]> {
        self.labels().ok_or(Error::MissingLabels)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn outlier_count(&self) -> Option<usize> {
        self.labels().map(|l| l.iter().filter(|&&y| y).count())
    }

    pub fn contamination(&self) -> Option<f64> {
        self.outlier_count().map(|k| k as f64 / self.n() as f64)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(
            self.name.clone(),
            self.features.select_rows(indices),
            self.feature_names.clone(),
            labels,
        )
    }

    /// Keeps only `columns`, in the order given.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.p()) {
            return Err(Error::InvalidConfig(format!(
                "feature index {bad} out of range for p = {}",
                self.p()
            )));
        }
        Self::new(
            self.name.clone(),
            self.features.select_columns(columns),
            columns
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
            self.labels.clone(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// FNV-1a over shape and value bits. Used to tag fitted models with the
    /// data they were trained on.
    pub fn fingerprint(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(&(self.n() as u64).to_le_bytes());
        feed(&(self.p() as u64).to_le_bytes());
        for v in self.features.as_slice() {
            feed(&v.to_bits().to_le_bytes());
        }
        format!("{h:016x}")
    }
}

pub fn default_feature_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}
