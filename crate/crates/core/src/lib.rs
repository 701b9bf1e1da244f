//! Isolation-based anomaly detection (IF, EIF, EIF+) with model-specific
//! feature importance (ExIFFI, DIFFI) and the evaluation pipeline used to
//! benchmark both.

pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod forest;
pub mod util;

pub use data::{Dataset, Matrix, Preset, Scenario};
pub use error::{Error, Result};
pub use explain::{Explainer, ImportanceVector};
pub use forest::{Forest, ForestConfig, ModelKind};
