//! Subcommand implementations. Every artifact is a pure function of the
//! configuration, so reruns produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::json;

use exceed_core::dataset::{
    compute_threshold, embed, feature_row, write_csv, SupervisedDataset, ThresholdSpec, TIMESTAMP_FORMAT,
};
use exceed_core::evaluation::{forecast_row, run_benchmark, MethodSpec};
use exceed_core::exceedance::{
    exceedance_curve, fit_weibull_mle, write_curve_csv, ExceedanceConfig, ProbabilitySource,
};
use exceed_core::models::{ModelDocument, FORMAT_VERSION};
use exceed_core::Error;

use crate::config::{InputSource, RunConfig};
use crate::Common;

pub const DATASET_FILE: &str = "dataset.json";
pub const MODELS_DIR: &str = "models";
pub const CURVES_DIR: &str = "curves";

/// Embedded, relabelled and filtered training data, plus the unfiltered
/// target history used for the Weibull fit.
#[derive(Debug, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub format_version: u32,
    pub threshold: ThresholdSpec,
    pub tau: f64,
    pub rows_embedded: usize,
    pub training_targets: Vec<f64>,
    pub dataset: SupervisedDataset,
}

fn resolve(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.cv.seed = seed;
        if let InputSource::Synthetic(s) = &mut cfg.input {
            s.seed = seed;
        }
    }
    if let Some(h) = &common.horizons {
        cfg.embedding.horizons = h.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(Error::from).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).map_err(Error::from).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn print(value: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn model_path(dir: &Path, method: &str, horizon: usize) -> PathBuf {
    dir.join(MODELS_DIR).join(format!("{method}_h{horizon}.json"))
}

fn find_method<'a>(roster: &'a [MethodSpec], id: &str) -> anyhow::Result<&'a MethodSpec> {
    roster.iter().find(|m| m.id == id).ok_or_else(|| {
        let known: Vec<&str> = roster.iter().map(|m| m.id.as_str()).collect();
        Error::Config(format!("unknown method '{id}'; configured methods: {}", known.join(", "))).into()
    })
}

pub fn synth(common: &Common) -> anyhow::Result<()> {
    let cfg = resolve(common)?;
    if !matches!(cfg.input, InputSource::Synthetic(_)) {
        return Err(Error::Config("synth needs a synthetic input source".into()).into());
    }
    let frame = cfg.frame()?;
    let mut buf = Vec::new();
    write_csv(&frame, &mut buf)?;
    let path = cfg.output_dir.join("series.csv");
    write(&path, buf)?;
    print(&json!({ "path": path, "rows": frame.len() }))
}

pub fn prepare(common: &Common) -> anyhow::Result<()> {
    let cfg = resolve(common)?;
    let frame = cfg.frame()?;
    let embedded = embed(&frame, &cfg.embedding, &cfg.threshold)?;
    let training_targets = embedded.target_history();
    let tau = compute_threshold(&training_targets, &cfg.threshold)?;
    let dataset = embedded.with_threshold(tau).filter_ongoing_exceedance();
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("no rows left after filtering ongoing exceedances".into()).into());
    }
    let horizons: Vec<serde_json::Value> = dataset
        .targets()
        .iter()
        .map(|t| {
            let positives = t.exceeds.iter().filter(|&&b| b).count();
            json!({
                "horizon": t.horizon,
                "positives": positives,
                "negatives": t.exceeds.len() - positives,
                "prevalence": positives as f64 / t.exceeds.len() as f64,
            })
        })
        .collect();
    let prepared = PreparedDataset {
        format_version: FORMAT_VERSION,
        threshold: cfg.threshold,
        tau,
        rows_embedded: training_targets.len(),
        training_targets,
        dataset,
    };
    let path = cfg.output_dir.join(DATASET_FILE);
    write(&path, serde_json::to_string(&prepared)?)?;
    print(&json!({
        "path": path,
        "series_rows": frame.len(),
        "rows_embedded": prepared.rows_embedded,
        "rows": prepared.dataset.len(),
        "features": prepared.dataset.n_features(),
        "tau": tau,
        "horizons": horizons,
    }))
}

fn load_prepared(dir: &Path) -> anyhow::Result<PreparedDataset> {
    let path = dir.join(DATASET_FILE);
    if !path.exists() {
        return Err(Error::Config(format!("{} not found; run `exceed prepare` first", path.display())).into());
    }
    let text = fs::read_to_string(&path).map_err(Error::from)?;
    let prepared: PreparedDataset = serde_json::from_str(&text).map_err(Error::from)?;
    if prepared.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!("{} has unsupported version {}", path.display(), prepared.format_version)).into());
    }
    Ok(prepared)
}

pub fn train(common: &Common, only: Option<&str>) -> anyhow::Result<()> {
    let cfg = resolve(common)?;
    let roster = cfg.roster();
    let methods: Vec<&MethodSpec> = match only {
        Some(id) => vec![find_method(&roster, id)?],
        None => roster.iter().collect(),
    };
    let prepared = load_prepared(&cfg.output_dir)?;
    let horizons = cfg.embedding.validate()?;
    for &h in &horizons {
        if prepared.dataset.target(h).is_err() {
            return Err(Error::Config(format!("prepared dataset has no horizon {h}; rerun prepare")).into());
        }
    }
    let weibull = if methods.iter().any(|m| m.probability == ProbabilitySource::Cdf) {
        Some(fit_weibull_mle(&prepared.training_targets)?)
    } else {
        None
    };

    let mut written = Vec::new();
    for m in &methods {
        for &h in &horizons {
            let model = m.fit(&prepared.dataset, h).with_context(|| format!("training {} at horizon {h}", m.id))?;
            let cdf = m.probability == ProbabilitySource::Cdf;
            let doc = ModelDocument {
                format_version: FORMAT_VERSION,
                method: m.id.clone(),
                horizon: h,
                probability: m.probability,
                tau: prepared.tau,
                weibull: if cdf { weibull } else { None },
                location_mode: cdf.then_some(cfg.exceedance.location_mode),
                model,
            };
            let path = model_path(&cfg.output_dir, &m.id, h);
            write(&path, doc.to_json()?)?;
            written.push(json!({ "method": m.id, "horizon": h, "path": path }));
        }
    }
    print(&json!({ "tau": prepared.tau, "weibull": weibull, "models": written }))
}

fn parse_origin(at: &str, len: usize) -> anyhow::Result<usize> {
    if at == "latest" {
        return len.checked_sub(1).ok_or_else(|| Error::Input("series is empty".into()).into());
    }
    let origin: usize = at
        .parse()
        .map_err(|_| Error::Config(format!("--at expects a row index or `latest`, got '{at}'")))?;
    if origin >= len {
        return Err(Error::Input(format!("origin {origin} is outside a series of {len} rows")).into());
    }
    Ok(origin)
}

pub fn forecast(common: &Common, method: &str, at: &str, curve: Option<&[f64]>) -> anyhow::Result<()> {
    let cfg = resolve(common)?;
    let frame = cfg.frame()?;
    let origin = parse_origin(at, frame.len())?;
    let row = feature_row(&frame, &cfg.embedding, origin)?;
    let timestamp = frame.timestamps()[origin].format(TIMESTAMP_FORMAT).to_string();
    let mut records = Vec::new();
    for h in cfg.embedding.validate()? {
        let path = model_path(&cfg.output_dir, method, h);
        if !path.exists() {
            return Err(Error::Config(format!("{} not found; run `exceed train` first", path.display())).into());
        }
        let doc = ModelDocument::load(&path).with_context(|| format!("loading {}", path.display()))?;
        let names = doc.model.feature_names();
        if names.len() != row.len() {
            return Err(Error::Input(format!(
                "model {} expects {} features but the configuration yields {}",
                path.display(),
                names.len(),
                row.len()
            ))
            .into());
        }
        let exc = ExceedanceConfig::new(doc.location_mode.unwrap_or(cfg.exceedance.location_mode), doc.tau)?;
        let f = forecast_row(&doc.model, doc.probability, &row, &exc, doc.weibull.as_ref())?;
        let mut record = json!({
            "method": method,
            "horizon": h,
            "origin": origin,
            "timestamp": timestamp,
            "tau": doc.tau,
            "y_hat": f.y_hat,
            "p": f.estimate.p,
            "source": f.estimate.source,
        });
        if let Some(taus) = curve {
            let (Some(y_hat), Some(w)) = (f.y_hat, doc.weibull.as_ref()) else {
                return Err(Error::Config(format!("method '{method}' has no CDF to build a curve from")).into());
            };
            let points = exceedance_curve(y_hat, taus, &exc, w)?;
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, &points)?;
            let curve_path = cfg.output_dir.join(CURVES_DIR).join(format!("{method}_h{h}_o{origin}.csv"));
            write(&curve_path, buf)?;
            record["curve"] = json!(curve_path);
        }
        records.push(record);
    }
    print(&serde_json::Value::Array(records))
}

pub fn evaluate(common: &Common) -> anyhow::Result<()> {
    let cfg = resolve(common)?;
    let frame = cfg.frame()?;
    let report = run_benchmark(
        &frame,
        &cfg.embedding,
        &cfg.threshold,
        cfg.exceedance.location_mode,
        &cfg.roster(),
        &cfg.cv,
    )?;
    let mut csv = Vec::new();
    report.write_metrics_csv(&mut csv)?;
    let metrics_path = cfg.output_dir.join("metrics.csv");
    let summary_path = cfg.output_dir.join("summary.json");
    write(&metrics_path, csv)?;
    write(&summary_path, report.summary_json()?)?;
    let headline: Vec<serde_json::Value> = report
        .aggregates
        .iter()
        .map(|a| json!({ "method": a.method, "horizon": a.horizon, "auc": a.auc, "log_loss": a.log_loss }))
        .collect();
    print(&json!({
        "metrics": metrics_path,
        "summary": summary_path,
        "cells": report.metrics.len(),
        "missing_auc_cells": report.missing_auc_cells,
        "aggregates": headline,
    }))
}

