use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::util::rng_from_seed;

/// Which rows a model is trained on. Evaluation always uses the full dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Train on the full dataset.
    I,
    /// Train on labeled inliers only.
    II,
    /// Train on all inliers plus enough outliers to reach the given fraction.
    Contaminated(f64),
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::I => f.write_str("I"),
            Scenario::II => f.write_str("II"),
            Scenario::Contaminated(c) => write!(f, "contaminated:{c}"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "i" | "1" | "s1" => Ok(Scenario::I),
            "ii" | "2" | "s2" => Ok(Scenario::II),
            _ => {
                let frac = t
                    .strip_prefix("contaminated:")
                    .or_else(|| t.strip_prefix("c:"))
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario '{s}'")))?;
                Ok(Scenario::Contaminated(frac))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSplit {
    pub scenario: Scenario,
    pub train: Dataset,
    pub eval: Dataset,
    pub seed: u64,
}

/// Number of training outliers for a target fraction `f` next to `n_in`
/// inliers: `f*n_in/(1-f)` rounded to nearest, halves rounded down.
pub(crate) fn contaminated_outlier_count(fraction: f64, n_in: usize) -> usize {
    let target = fraction * n_in as f64 / (1.0 - fraction);
    (target - 0.5).ceil().max(0.0) as usize
}

pub fn split_scenario(ds: &Dataset, scenario: Scenario, seed: u64) -> Result<ScenarioSplit> {
    let labels = ds.require_labels()?;
    let inliers: Vec<usize> = (0..ds.n()).filter(|&i| !labels[i]).collect();
    let outliers: Vec<usize> = (0..ds.n()).filter(|&i| labels[i]).collect();

    let train = match scenario {
        Scenario::I => ds.clone(),
        Scenario::II => ds.select_rows(&inliers)?,
        Scenario::Contaminated(f) => {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "contamination level {f} must lie in [0, 1)"
                )));
            }
            let wanted = contaminated_outlier_count(f, inliers.len());
            if wanted > outliers.len() {
                return Err(Error::InsufficientOutliers {
                    requested: wanted,
                    available: outliers.len(),
                });
            }
            let mut rng = rng_from_seed(seed);
            let mut rows = inliers.clone();
            rows.extend(
                index::sample(&mut rng, outliers.len(), wanted)
                    .into_iter()
                    .map(|k| outliers[k]),
            );
            rows.sort_unstable();
            ds.select_rows(&rows)?
        }
    };

    Ok(ScenarioSplit {
        scenario,
        train,
        eval: ds.clone(),
        seed,
    })
}
