use std::path::PathBuf;

use clap::ValueEnum;
use isoexplain::{Explainer, ForestConfig, ModelKind, Preset, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Generate,
    Fit,
    Score,
    Explain,
    Eval,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExplainMode {
    #[default]
    Gfi,
    Lfi,
    Scoremap,
    DepthProfile,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    #[default]
    Sweep,
    FeatureSelection,
    Ndcg,
    Correlation,
    Timing,
}

/// Every setting a command reads. Written back as `resolved_config.json`;
/// passing that file to `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    /// Seeds data generation, splits and forests.
    pub seed: u64,
    pub preset: Option<Preset>,
    pub data: Option<PathBuf>,
    /// Label column of `data`; `null` for unlabeled files.
    pub label_column: Option<String>,
    /// The forest seed is always taken from `seed`.
    pub forest: ForestConfig,
    pub scenario: String,
    pub model_file: Option<PathBuf>,
    pub explain_mode: ExplainMode,
    pub eval_mode: EvalMode,
    pub explainer: Explainer,
    pub runs: usize,
    /// Fraction flagged as outliers; defaults to the labeled fraction.
    pub contamination: Option<f64>,
    pub row: Option<usize>,
    pub all_rows: bool,
    pub features: [usize; 2],
    pub resolution: usize,
    pub padding: f64,
    pub levels: Vec<f64>,
    pub n_seeds: usize,
    pub models: Vec<ModelKind>,
    pub evaluator: ModelKind,
    pub relevance: Option<PathBuf>,
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            preset: None,
            data: None,
            label_column: Some("label".into()),
            forest: ForestConfig::default(),
            scenario: "II".into(),
            model_file: None,
            explain_mode: ExplainMode::default(),
            eval_mode: EvalMode::default(),
            explainer: Explainer::Exiffi,
            runs: 40,
            contamination: None,
            row: None,
            all_rows: false,
            features: [0, 1],
            resolution: 50,
            padding: 0.1,
            levels: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.1],
            n_seeds: 10,
            models: ModelKind::ALL.to_vec(),
            evaluator: ModelKind::EifPlus,
            relevance: None,
            sizes: vec![1000, 2000, 4000],
            dims: vec![6],
        }
    }
}

fn fraction_ok(c: f64) -> bool {
    c > 0.0 && c < 1.0
}

impl RunConfig {
    /// Decodes a config without normalising or validating it.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(self.scenario.parse::<Scenario>()?)
    }

    /// Forest settings for `model`, seeded with `seed`; `dof` is dropped for IF.
    pub fn forest_for(&self, model: ModelKind, seed: u64) -> ForestConfig {
        let mut cfg = ForestConfig {
            model,
            seed,
            ..self.forest.clone()
        };
        if model == ModelKind::If {
            cfg.dof = None;
        }
        cfg
    }

    /// Canonicalises derived fields and checks every value.
    pub fn finish(mut self) -> Result<Self> {
        self.forest = self.forest_for(self.forest.model, self.seed);
        self.scenario = self.scenario()?.to_string();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        if let Scenario::Contaminated(f) = self.scenario()? {
            if !(0.0..1.0).contains(&f) {
                return Err(isoexplain::Error::ContaminationOutOfRange(f).into());
            }
        }
        let bad = |msg: &str| Err(CliError::Config(msg.into()));
        if self.preset.is_some() && self.data.is_some() {
            return bad("give either preset or data, not both");
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.n_seeds == 0 {
            return bad("n_seeds must be at least 1");
        }
        if self.resolution < 2 {
            return bad("resolution must be at least 2");
        }
        if !(self.padding.is_finite() && self.padding >= 0.0) {
            return bad("padding must be finite and nonnegative");
        }
        if self.features[0] == self.features[1] {
            return bad("scoremap features must differ");
        }
        if self.contamination.is_some_and(|c| !fraction_ok(c)) {
            return bad("contamination must lie in (0, 1)");
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(0.0..1.0).contains(l)) {
            return bad("levels must be nonempty fractions in [0, 1)");
        }
        if self.models.is_empty() {
            return bad("models must not be empty");
        }
        if self.sizes.is_empty()
            || self.dims.is_empty()
            || self.sizes.contains(&0)
            || self.dims.contains(&0)
        {
            return bad("sizes and dims must be nonempty and positive");
        }
        Ok(())
    }
}

/// Decodes, normalises and validates a run-config document.
pub fn parse_run_config(bytes: &[u8]) -> Result<RunConfig> {
    RunConfig::from_json(bytes)?.finish()
}
