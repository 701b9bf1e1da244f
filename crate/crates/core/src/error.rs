use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column {column} ('{name}'): cannot parse '{value}' as a number")]
    NonNumericCell {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("row {row}: label value '{value}' is not 0 or 1")]
    InvalidLabel { row: usize, value: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dataset has no labels")]
    MissingLabels,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("requested {requested} training outliers but only {available} are available")]
    InsufficientOutliers { requested: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contamination {0} must lie strictly between 0 and 1")]
    ContaminationOutOfRange(f64),

    #[error("thresholding left the {0} set empty; global importance is undefined")]
    EmptyClass(&'static str),

    #[error("{0} requires an axis-aligned (IF) forest")]
    NotAxisAligned(&'static str),

    #[error("unsupported model file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("invalid metric input: {0}")]
    InvalidMetricInput(String),

    #[error("zero variance in {0}; correlation undefined")]
    ZeroVariance(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::NonNumericCell { .. } => "non_numeric_cell",
            Error::InvalidLabel { .. } => "invalid_label",
            Error::RaggedRow { .. } => "ragged_row",
            Error::MissingLabelColumn(_) => "missing_label_column",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::MissingLabels => "missing_labels",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::UnknownModel(_) => "unknown_model",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InsufficientOutliers { .. } => "insufficient_outliers",
            Error::InvalidConfig(_) => "invalid_config",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ContaminationOutOfRange(_) => "contamination_out_of_range",
            Error::EmptyClass(_) => "empty_class",
            Error::NotAxisAligned(_) => "not_axis_aligned",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::MalformedModel(_) => "malformed_model",
            Error::InvalidMetricInput(_) => "invalid_metric_input",
            Error::ZeroVariance(_) => "zero_variance",
        }
    }
}
