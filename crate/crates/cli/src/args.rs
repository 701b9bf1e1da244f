use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isoexplain::{Explainer, ModelKind, Preset};

use crate::config::{CommandName, EvalMode, ExplainMode, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "isoexplain",
    version,
    about = "Isolation forests with ExIFFI and DIFFI feature importance"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for data generation, splits and forests.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Run-config JSON; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic preset as CSV.
    Generate {
        #[arg(long)]
        preset: Option<Preset>,
    },
    /// Fit a forest and report detection metrics.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Score a dataset with a saved model.
    Score {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// Feature importance reports.
    Explain(ExplainArgs),
    /// Evaluation tables.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV dataset with a header row.
    #[arg(long, conflicts_with = "preset")]
    pub data: Option<PathBuf>,
    /// Synthetic preset generated from --seed.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub label_column: Option<String>,
    /// Treat every CSV column as a feature.
    #[arg(long, conflicts_with = "label_column")]
    pub unlabeled: bool,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    /// if, eif or eif+.
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Nonzero normal components (ignored by IF).
    #[arg(long)]
    pub dof: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long)]
    pub scenario: Option<String>,
    /// Saved model to explain instead of fitting one.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ExplainMode>,
    /// exiffi or diffi.
    #[arg(long)]
    pub explainer: Option<Explainer>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub contamination: Option<f64>,
    #[arg(long, conflicts_with = "all")]
    pub row: Option<usize>,
    #[arg(long)]
    pub all: bool,
    /// Two feature indices, `i,j`.
    #[arg(long, value_parser = parse_pair)]
    pub features: Option<[usize; 2]>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Grid margin as a fraction of each feature's range.
    #[arg(long)]
    pub padding: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<EvalMode>,
    #[arg(long)]
    pub explainer: Option<Explainer>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub contamination: Option<f64>,
    /// Training contamination levels for the sweep.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub n_seeds: Option<usize>,
    /// Models compared by the sweep.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ModelKind>>,
    /// Model refitted at each feature-selection step.
    #[arg(long)]
    pub evaluator: Option<ModelKind>,
    /// Relevance CSV for datasets without a preset.
    #[arg(long)]
    pub relevance: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

fn parse_pair(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts[..] {
        [a, b] => Ok([
            a.parse().map_err(|_| format!("bad index '{a}'"))?,
            b.parse().map_err(|_| format!("bad index '{b}'"))?,
        ]),
        _ => Err(format!("expected two indices 'i,j', got '{s}'")),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_some<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(path) = &self.data {
            cfg.data = Some(path.clone());
            cfg.preset = None;
        }
        if let Some(p) = self.preset {
            cfg.preset = Some(p);
            cfg.data = None;
        }
        set_some(&mut cfg.label_column, self.label_column.clone());
        if self.unlabeled {
            cfg.label_column = None;
        }
    }
}

impl ForestArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let f = &mut cfg.forest;
        set(&mut f.model, self.model);
        set(&mut f.n_trees, self.trees);
        set(&mut f.subsample, self.subsample);
        set_some(&mut f.max_depth, self.max_depth);
        set(&mut f.eta, self.eta);
        set_some(&mut f.dof, self.dof);
    }
}

impl Cli {
    pub fn command_name(&self) -> CommandName {
        match self.command {
            Command::Generate { .. } => CommandName::Generate,
            Command::Fit { .. } => CommandName::Fit,
            Command::Score { .. } => CommandName::Score,
            Command::Explain(_) => CommandName::Explain,
            Command::Eval(_) => CommandName::Eval,
        }
    }

    /// Loads `--config` if given, applies explicit flags on top, then
    /// normalises and validates.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.global.config {
            Some(path) => {
                RunConfig::from_json(&fs::read(path).map_err(|e| CliError::io(path, e))?)?
            }
            None => RunConfig::default(),
        };
        let name = self.command_name();
        if cfg.command.is_some_and(|c| c != name) {
            return Err(CliError::Config(format!(
                "config was resolved for {:?}, not {name:?}",
                cfg.command.unwrap()
            )));
        }
        cfg.command = Some(name);
        set(&mut cfg.seed, self.global.seed);
        match &self.command {
            Command::Generate { preset } => {
                if preset.is_some() {
                    cfg.preset = *preset;
                    cfg.data = None;
                }
            }
            Command::Fit {
                data,
                forest,
                scenario,
            } => {
                data.apply(&mut cfg);
                forest.apply(&mut cfg);
                set(&mut cfg.scenario, scenario.clone());
            }
            Command::Score { data, model_file } => {
                data.apply(&mut cfg);
                set_some(&mut cfg.model_file, model_file.clone());
            }
            Command::Explain(a) => {
                a.data.apply(&mut cfg);
                a.forest.apply(&mut cfg);
                set(&mut cfg.scenario, a.scenario.clone());
                set_some(&mut cfg.model_file, a.model_file.clone());
                set(&mut cfg.explain_mode, a.mode);
                set(&mut cfg.explainer, a.explainer);
                set(&mut cfg.runs, a.runs);
                set_some(&mut cfg.contamination, a.contamination);
                if let Some(r) = a.row {
                    cfg.row = Some(r);
                    cfg.all_rows = false;
                }
                if a.all {
                    cfg.all_rows = true;
                    cfg.row = None;
                }
                set(&mut cfg.features, a.features);
                set(&mut cfg.resolution, a.resolution);
                set(&mut cfg.padding, a.padding);
            }
            Command::Eval(a) => {
                a.data.apply(&mut cfg);
                a.forest.apply(&mut cfg);
                set(&mut cfg.scenario, a.scenario.clone());
                set(&mut cfg.eval_mode, a.mode);
                set(&mut cfg.explainer, a.explainer);
                set(&mut cfg.runs, a.runs);
                set_some(&mut cfg.contamination, a.contamination);
                set(&mut cfg.levels, a.levels.clone());
                set(&mut cfg.n_seeds, a.n_seeds);
                set(&mut cfg.models, a.models.clone());
                set(&mut cfg.evaluator, a.evaluator);
                set_some(&mut cfg.relevance, a.relevance.clone());
                set(&mut cfg.sizes, a.sizes.clone());
                set(&mut cfg.dims, a.dims.clone());
            }
        }
        cfg.finish()
    }
}
