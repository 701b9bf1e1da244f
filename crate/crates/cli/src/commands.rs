use std::collections::BTreeMap;
use std::fs::File;
use std::time::Instant;

use isoexplain::data::{load_csv, make_preset, split_scenario, write_csv, ScenarioSplit};
use isoexplain::eval::{
    auc_fs, contamination_sweep, feature_selection_curves, lfi_score_correlation, ndcg,
    parse_relevance_csv, timing_benchmark, DetectionMetrics, EvaluationReport, MetricTable,
    ModelReport, RelevanceVector,
};
use isoexplain::explain::{depth_profile, diffi_point, exiffi_lfi, gfi_over_runs, scoremap_grid};
use isoexplain::forest::{load_model, save_model};
use isoexplain::util::{derive_seed, mean, std_dev};
use isoexplain::{Dataset, Explainer, Forest, ForestConfig, ImportanceVector, Scenario};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommandName, EvalMode, ExplainMode, RunConfig};
use crate::error::{CliError, Result};
use crate::output::OutputDir;

const RESOLVED: &str = "resolved_config.json";
const TIMINGS: &str = "timings.json";

/// Wall-clock phases, written to `timings.json` apart from the
/// reproducible outputs.
#[derive(Default)]
struct Timings(BTreeMap<&'static str, f64>);

impl Timings {
    fn time<T>(&mut self, phase: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        *self.0.entry(phase).or_default() += start.elapsed().as_secs_f64();
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Core(e.into())
}

/// Runs the command named in `cfg`, writing into `out`. Returns a one-line
/// JSON summary for stdout.
pub fn run(cfg: &RunConfig, out: &OutputDir) -> Result<Value> {
    let command = cfg
        .command
        .ok_or_else(|| CliError::Config("no command in run config".into()))?;
    let mut files = match command {
        CommandName::Generate => vec!["dataset.csv"],
        CommandName::Fit => vec!["model.json", "report.json"],
        CommandName::Score => vec!["scores.csv", "metrics.json"],
        CommandName::Explain => explain_files(cfg),
        CommandName::Eval => eval_files(cfg),
    };
    files.extend([RESOLVED, TIMINGS]);
    out.claim(&files)?;
    out.write_json(RESOLVED, cfg)?;

    let mut timings = Timings::default();
    let start = Instant::now();
    let mut summary = match command {
        CommandName::Generate => generate(cfg, out)?,
        CommandName::Fit => fit(cfg, out, &mut timings)?,
        CommandName::Score => score(cfg, out, &mut timings)?,
        CommandName::Explain => explain(cfg, out, &mut timings)?,
        CommandName::Eval => eval(cfg, out, &mut timings)?,
    };
    timings.0.insert("total", start.elapsed().as_secs_f64());
    out.write_json(TIMINGS, &timings.0)?;
    summary["command"] = json!(command);
    summary["out"] = json!(out.root());
    Ok(summary)
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    match (&cfg.preset, &cfg.data) {
        (Some(p), None) => Ok(make_preset(*p, cfg.seed)?),
        (None, Some(path)) => Ok(load_csv(path, cfg.label_column.as_deref())?),
        _ => Err(CliError::Config(
            "exactly one of preset or data is required".into(),
        )),
    }
}

fn split(cfg: &RunConfig, ds: &Dataset, seed: u64) -> Result<ScenarioSplit> {
    match cfg.scenario()? {
        // unlabeled data can still be trained on in full
        Scenario::I if ds.labels().is_none() => Ok(ScenarioSplit {
            scenario: Scenario::I,
            train: ds.clone(),
            eval: ds.clone(),
            seed,
        }),
        s => Ok(split_scenario(ds, s, seed)?),
    }
}

/// Explicit contamination, else the labeled outlier fraction.
fn contamination(cfg: &RunConfig, ds: &Dataset) -> Result<f64> {
    cfg.contamination
        .or_else(|| ds.contamination())
        .ok_or_else(|| CliError::Config("contamination is required for unlabeled data".into()))
}

fn generate(cfg: &RunConfig, out: &OutputDir) -> Result<Value> {
    let preset = cfg
        .preset
        .ok_or_else(|| CliError::Config("generate needs a preset".into()))?;
    let ds = make_preset(preset, cfg.seed)?;
    out.write_with("dataset.csv", |w| Ok(write_csv(&ds, w)?))?;
    Ok(json!({ "n": ds.n(), "p": ds.p(), "contamination": ds.contamination() }))
}

fn fit(cfg: &RunConfig, out: &OutputDir, t: &mut Timings) -> Result<Value> {
    let ds = load_dataset(cfg)?;
    let sp = split(cfg, &ds, cfg.seed)?;
    let forest = t.time("fit", || Ok(Forest::fit(&sp.train, &cfg.forest)?))?;
    save_model(&forest, &out.path("model.json"))?;
    let mut summary =
        json!({ "n_train": sp.train.n(), "n_trees": forest.trees.len(), "psi": forest.psi });
    if let Some(labels) = sp.eval.labels() {
        let scores = t.time("predict", || Ok(forest.score_dataset(&sp.eval)?))?;
        let c = contamination(cfg, &sp.eval)?;
        let metrics = DetectionMetrics::compute(&scores, labels, c)?;
        let report = EvaluationReport {
            dataset: ds.name().to_owned(),
            scenario: cfg.scenario.clone(),
            contamination: c,
            models: vec![ModelReport {
                model: cfg.forest.model,
                metrics,
                fit_seconds: None,
                predict_seconds: None,
            }],
            auc_fs: None,
            ndcg: None,
            correlation: None,
        };
        out.write_json("report.json", &report)?;
        summary["metrics"] = json!(metrics);
    }
    Ok(summary)
}

fn model_file(cfg: &RunConfig) -> Result<Forest> {
    let path = cfg
        .model_file
        .as_ref()
        .ok_or_else(|| CliError::Config("a model file is required".into()))?;
    Ok(load_model(path)?)
}

fn score(cfg: &RunConfig, out: &OutputDir, t: &mut Timings) -> Result<Value> {
    let forest = model_file(cfg)?;
    let ds = load_dataset(cfg)?;
    let scores = t.time("predict", || Ok(forest.score_dataset(&ds)?))?;
    out.write_with("scores.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        match ds.labels() {
            Some(labels) => {
                csv.write_record(["row", "score", "label"])
                    .map_err(csv_err)?;
                for (r, (s, l)) in scores.iter().zip(labels).enumerate() {
                    csv.serialize((r, s, u8::from(*l))).map_err(csv_err)?;
                }
            }
            None => {
                csv.write_record(["row", "score"]).map_err(csv_err)?;
                for (r, s) in scores.iter().enumerate() {
                    csv.serialize((r, s)).map_err(csv_err)?;
                }
            }
        }
        csv.flush()
            .map_err(|e| CliError::io(out.path("scores.csv"), e))
    })?;
    let mut summary = json!({ "n": ds.n() });
    if let Some(labels) = ds.labels() {
        let metrics = DetectionMetrics::compute(&scores, labels, contamination(cfg, &ds)?)?;
        out.write_json("metrics.json", &metrics)?;
        summary["metrics"] = json!(metrics);
    }
    Ok(summary)
}

fn explain_files(cfg: &RunConfig) -> Vec<&'static str> {
    let mut files = match cfg.explain_mode {
        ExplainMode::Gfi => vec!["gfi_report.json", "gfi.csv", "rank_histogram.csv"],
        ExplainMode::Lfi => vec!["lfi.csv"],
        ExplainMode::Scoremap => vec!["scoremap.csv"],
        ExplainMode::DepthProfile => vec!["depth_profile.csv"],
    };
    if cfg.explain_mode != ExplainMode::Gfi && cfg.model_file.is_none() {
        files.push("model.json");
    }
    files
}

/// The loaded model, or a forest fitted on the scenario training rows.
fn explained_forest(
    cfg: &RunConfig,
    sp: &ScenarioSplit,
    out: &OutputDir,
    t: &mut Timings,
) -> Result<Forest> {
    if cfg.model_file.is_some() {
        return model_file(cfg);
    }
    let forest = t.time("fit", || Ok(Forest::fit(&sp.train, &cfg.forest)?))?;
    save_model(&forest, &out.path("model.json"))?;
    Ok(forest)
}

fn local_importance(forest: &Forest, explainer: Explainer, x: &[f64]) -> Result<ImportanceVector> {
    Ok(match explainer {
        Explainer::Exiffi => exiffi_lfi(forest, x)?,
        Explainer::Diffi => {
            let (i, v) = diffi_point(forest, x)?;
            i.ratio(&v)
        }
    })
}

#[derive(Serialize)]
struct GfiRow<'a> {
    feature: usize,
    name: &'a str,
    mean: f64,
    std: f64,
}

fn explain(cfg: &RunConfig, out: &OutputDir, t: &mut Timings) -> Result<Value> {
    let ds = load_dataset(cfg)?;
    let sp = split(cfg, &ds, cfg.seed)?;
    let names = ds.feature_names();
    if cfg.explainer == Explainer::Diffi
        && matches!(
            cfg.explain_mode,
            ExplainMode::Scoremap | ExplainMode::DepthProfile
        )
    {
        return Err(CliError::Config(
            "scoremap and depth-profile use ExIFFI".into(),
        ));
    }
    match cfg.explain_mode {
        ExplainMode::Gfi => {
            let base = match cfg.model_file {
                Some(_) => model_file(cfg)?.config,
                None => cfg.forest.clone(),
            };
            let c = contamination(cfg, &sp.eval)?;
            let report = t.time("importance", || {
                Ok(gfi_over_runs(
                    &sp.train,
                    &sp.eval,
                    &base,
                    cfg.explainer,
                    cfg.runs,
                    c,
                    cfg.seed,
                )?)
            })?;
            out.write_json("gfi_report.json", &report)?;
            out.write_with("gfi.csv", |w| {
                let mut csv = csv::Writer::from_writer(w);
                for (f, name) in names.iter().enumerate() {
                    csv.serialize(GfiRow {
                        feature: f,
                        name,
                        mean: report.per_feature_mean[f],
                        std: report.per_feature_std[f],
                    })
                    .map_err(csv_err)?;
                }
                csv.flush()
                    .map_err(|e| CliError::io(out.path("gfi.csv"), e))
            })?;
            out.write_with("rank_histogram.csv", |w| {
                Ok(report.write_histogram_csv(w, names)?)
            })?;
            let ranking: Vec<&str> = report
                .mean_ranking()
                .iter()
                .map(|&f| names[f].as_str())
                .collect();
            Ok(json!({ "runs": cfg.runs, "contamination": c, "ranking": ranking }))
        }
        ExplainMode::Lfi => {
            let rows: Vec<usize> = match (cfg.row, cfg.all_rows) {
                (Some(r), false) if r < ds.n() => vec![r],
                (Some(r), false) => {
                    return Err(CliError::Config(format!(
                        "row {r} out of range for {} rows",
                        ds.n()
                    )))
                }
                (None, true) => (0..ds.n()).collect(),
                _ => {
                    return Err(CliError::Config(
                        "lfi needs either a row or all rows".into(),
                    ))
                }
            };
            let forest = explained_forest(cfg, &sp, out, t)?;
            let lfi = t.time("importance", || {
                rows.iter()
                    .map(|&r| local_importance(&forest, cfg.explainer, ds.row(r)))
                    .collect::<Result<Vec<_>>>()
            })?;
            out.write_with("lfi.csv", |w| {
                let mut csv = csv::Writer::from_writer(w);
                let mut header = vec!["row"];
                header.extend(names.iter().map(String::as_str));
                header.push("score");
                csv.write_record(&header).map_err(csv_err)?;
                for (&r, v) in rows.iter().zip(&lfi) {
                    let mut rec = vec![r.to_string()];
                    rec.extend(v.values().iter().map(|x| format!("{x:?}")));
                    rec.push(format!("{:?}", forest.anomaly_score(ds.row(r))?));
                    csv.write_record(&rec).map_err(csv_err)?;
                }
                csv.flush()
                    .map_err(|e| CliError::io(out.path("lfi.csv"), e))
            })?;
            Ok(json!({ "rows": rows.len() }))
        }
        ExplainMode::Scoremap => {
            let forest = explained_forest(cfg, &sp, out, t)?;
            let [i, j] = cfg.features;
            let grid = t.time("importance", || {
                Ok(scoremap_grid(
                    &forest,
                    &ds,
                    i,
                    j,
                    cfg.resolution,
                    cfg.padding,
                )?)
            })?;
            out.write_with("scoremap.csv", |w| Ok(grid.write_csv(w)?))?;
            Ok(json!({ "features": [i, j], "resolution": cfg.resolution }))
        }
        ExplainMode::DepthProfile => {
            let forest = explained_forest(cfg, &sp, out, t)?;
            let levels = t.time("importance", || Ok(depth_profile(&forest, &ds)?))?;
            out.write_with("depth_profile.csv", |w| {
                let mut csv = csv::Writer::from_writer(w);
                for level in &levels {
                    csv.serialize(level).map_err(csv_err)?;
                }
                csv.flush()
                    .map_err(|e| CliError::io(out.path("depth_profile.csv"), e))
            })?;
            Ok(json!({ "depths": levels.len() }))
        }
    }
}

fn eval_files(cfg: &RunConfig) -> Vec<&'static str> {
    match cfg.eval_mode {
        EvalMode::Timing => vec!["timing.csv"],
        EvalMode::FeatureSelection => {
            vec!["results.csv", "results.json", "summary.json", "curves.csv"]
        }
        _ => vec!["results.csv", "results.json", "summary.json"],
    }
}

#[derive(Serialize)]
struct SummaryRow {
    model: String,
    metric: String,
    mean: f64,
    std: f64,
    n: usize,
}

/// Mean and spread of every `(model, metric)` cell, in first-seen order.
fn summarize(table: &MetricTable) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in &table.records {
        let key = (r.model.clone(), r.metric.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, metric)| {
            let v = table.values(&model, &metric);
            SummaryRow {
                mean: mean(&v),
                std: std_dev(&v),
                n: v.len(),
                model,
                metric,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct CurveRow {
    seed: u64,
    order: &'static str,
    step: usize,
    n_features: usize,
    avg_precision: f64,
}

fn relevance(cfg: &RunConfig) -> Result<RelevanceVector> {
    match (&cfg.relevance, cfg.preset) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            Ok(parse_relevance_csv(file)?)
        }
        (None, Some(p)) => Ok(RelevanceVector::new(p.relevance())?),
        (None, None) => Err(CliError::Config(
            "ndcg needs a preset or a relevance file".into(),
        )),
    }
}

/// Ranking from global importance averaged over `cfg.runs` refits.
fn averaged_ranking(cfg: &RunConfig, sp: &ScenarioSplit, seed: u64) -> Result<Vec<usize>> {
    let c = contamination(cfg, &sp.eval)?;
    let report = gfi_over_runs(
        &sp.train,
        &sp.eval,
        &cfg.forest,
        cfg.explainer,
        cfg.runs,
        c,
        seed,
    )?;
    Ok(report.mean_ranking())
}

fn eval(cfg: &RunConfig, out: &OutputDir, t: &mut Timings) -> Result<Value> {
    if cfg.eval_mode == EvalMode::Timing {
        let rows = t.time("benchmark", || {
            Ok(timing_benchmark(
                &cfg.sizes,
                &cfg.dims,
                &cfg.forest,
                cfg.seed,
            )?)
        })?;
        out.write_with("timing.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            for r in &rows {
                csv.serialize(r).map_err(csv_err)?;
            }
            csv.flush()
                .map_err(|e| CliError::io(out.path("timing.csv"), e))
        })?;
        return Ok(json!({ "rows": rows.len() }));
    }

    let ds = load_dataset(cfg)?;
    let name = ds.name().to_owned();
    let model = cfg.forest.model.to_string();
    let seeds: Vec<u64> = (0..cfg.n_seeds as u64)
        .map(|k| derive_seed(cfg.seed, k))
        .collect();
    let mut table = MetricTable::new();
    let mut curves = Vec::new();

    match cfg.eval_mode {
        EvalMode::Sweep => {
            let configs: Vec<ForestConfig> = cfg
                .models
                .iter()
                .map(|&m| cfg.forest_for(m, cfg.seed))
                .collect();
            let rows = t.time("sweep", || {
                Ok(contamination_sweep(
                    &ds,
                    &configs,
                    &cfg.levels,
                    cfg.n_seeds,
                    cfg.seed,
                )?)
            })?;
            for r in rows {
                let m = r.model.to_string();
                table.push(
                    &name,
                    &m,
                    "contaminated",
                    Some(r.level),
                    Some(r.seed),
                    "avg_precision",
                    r.avg_precision,
                );
            }
        }
        EvalMode::FeatureSelection => {
            let scenario = cfg.scenario()?;
            let evaluator = cfg.forest_for(cfg.evaluator, cfg.seed);
            for &seed in &seeds {
                let sp = split(cfg, &ds, seed)?;
                let ranking = t.time("importance", || averaged_ranking(cfg, &sp, seed))?;
                let [direct, inverse, random] = t.time("selection", || {
                    Ok(feature_selection_curves(
                        &ds, &ranking, &evaluator, scenario, seed,
                    )?)
                })?;
                let value = auc_fs(&inverse.ap_values, &direct.ap_values)?;
                table.push(
                    &name,
                    &model,
                    &cfg.scenario,
                    None,
                    Some(seed),
                    "auc_fs",
                    value,
                );
                for (order, curve) in [
                    ("direct", &direct),
                    ("inverse", &inverse),
                    ("random", &random),
                ] {
                    for (step, &ap) in curve.ap_values.iter().enumerate() {
                        curves.push(CurveRow {
                            seed,
                            order,
                            step,
                            n_features: ds.p() - step,
                            avg_precision: ap,
                        });
                    }
                }
            }
        }
        EvalMode::Ndcg => {
            let rel = relevance(cfg)?;
            for &seed in &seeds {
                let sp = split(cfg, &ds, seed)?;
                let ranking = t.time("importance", || averaged_ranking(cfg, &sp, seed))?;
                table.push(
                    &name,
                    &model,
                    &cfg.scenario,
                    None,
                    Some(seed),
                    "ndcg",
                    ndcg(&ranking, &rel)?,
                );
            }
        }
        EvalMode::Correlation => {
            for &seed in &seeds {
                let sp = split(cfg, &ds, seed)?;
                let forest = t.time("fit", || {
                    Ok(Forest::fit(
                        &sp.train,
                        &cfg.forest_for(cfg.forest.model, seed),
                    )?)
                })?;
                let r = t.time("importance", || {
                    Ok(lfi_score_correlation(&forest, &sp.eval)?)
                })?;
                table.push(
                    &name,
                    &model,
                    &cfg.scenario,
                    None,
                    Some(seed),
                    "correlation",
                    r,
                );
            }
        }
        EvalMode::Timing => unreachable!("handled above"),
    }

    out.write_with("results.csv", |w| Ok(table.write_csv(w)?))?;
    out.write_with("results.json", |w| Ok(table.write_json(w)?))?;
    let summary = summarize(&table);
    out.write_json("summary.json", &summary)?;
    if cfg.eval_mode == EvalMode::FeatureSelection {
        out.write_with("curves.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            for row in &curves {
                csv.serialize(row).map_err(csv_err)?;
            }
            csv.flush()
                .map_err(|e| CliError::io(out.path("curves.csv"), e))
        })?;
    }
    Ok(json!({ "summary": summary }))
}
