//! Time-delay embedding into a supervised dataset.
//!
//! Row alignment, for lag count `q` and horizon `h`, with origin `o` being
//! the most recent observed instant:
//!
//! ```text
//!   time:     o-q+1  ...  o-1    o   | o+1  ...  o+h
//!   features: lag q  ...  lag 2  lag 1
//!   target:                          |           y_h
//! ```
//!
//! Every channel contributes `q` columns ordered `lag1..lagq` (most recent
//! first), channels in frame order, followed by the origin's day of year
//! (1..=366) when enabled. Rows that touch a missing value in any lag or in
//! any requested horizon target are dropped.

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::frame::TimeSeriesFrame;
use super::threshold::{compute_threshold, ThresholdSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    #[serde(default = "default_lags")]
    pub lags: usize,
    pub horizons: Vec<usize>,
    #[serde(default = "default_true")]
    pub include_day_of_year: bool,
    pub target_channel: String,
}

fn default_lags() -> usize {
    6
}

fn default_true() -> bool {
    true
}

impl EmbeddingConfig {
    pub fn new(lags: usize, horizons: Vec<usize>, target_channel: impl Into<String>) -> Self {
        Self {
            lags,
            horizons,
            include_day_of_year: false,
            target_channel: target_channel.into(),
        }
    }

    /// Checks the invariants and returns the horizons sorted and deduplicated.
    pub fn validate(&self) -> Result<Vec<usize>> {
        if self.lags == 0 {
            return Err(Error::Config("lag count must be at least 1".into()));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        if self.horizons.contains(&0) {
            return Err(Error::Config("horizons must be positive".into()));
        }
        let mut horizons = self.horizons.clone();
        horizons.sort_unstable();
        horizons.dedup();
        Ok(horizons)
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }
}

/// Numeric and binary targets for one forecasting horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonTarget {
    pub horizon: usize,
    pub values: Vec<f64>,
    pub exceeds: Vec<bool>,
}

/// Embedded design matrix with per-horizon targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedDataset {
    feature_names: Vec<String>,
    /// Row-major, `len() * n_features()` values.
    features: Vec<f64>,
    targets: Vec<HorizonTarget>,
    tau: f64,
    /// Frame index of each row's most recent lag.
    origins: Vec<usize>,
    /// Columns holding lags of the target channel, lag 1 first.
    target_lag_columns: Vec<usize>,
}

impl SupervisedDataset {
    /// Assembles a dataset from raw parts; `exceeds` is derived from `tau`.
    pub fn from_parts(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        horizon_values: Vec<(usize, Vec<f64>)>,
        tau: f64,
        target_lag_columns: Vec<usize>,
    ) -> Result<Self> {
        let p = feature_names.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Input("row arity differs from feature names".into()));
        }
        if horizon_values.iter().any(|(_, v)| v.len() != rows.len()) {
            return Err(Error::Input("target length differs from row count".into()));
        }
        if target_lag_columns.iter().any(|&c| c >= p) || target_lag_columns.is_empty() {
            return Err(Error::Input("target lag columns out of range".into()));
        }
        let origins = (0..rows.len()).collect();
        let targets = horizon_values
            .into_iter()
            .map(|(horizon, values)| HorizonTarget {
                horizon,
                exceeds: values.iter().map(|&v| v >= tau).collect(),
                values,
            })
            .collect();
        Ok(Self {
            feature_names,
            features: rows.concat(),
            targets,
            tau,
            origins,
            target_lag_columns,
        })
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks(self.n_features().max(1)).take(self.len())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    pub fn target_lag_columns(&self) -> &[usize] {
        &self.target_lag_columns
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.targets.iter().map(|t| t.horizon).collect()
    }

    pub fn targets(&self) -> &[HorizonTarget] {
        &self.targets
    }

    pub fn target(&self, horizon: usize) -> Result<&HorizonTarget> {
        self.targets
            .iter()
            .find(|t| t.horizon == horizon)
            .ok_or_else(|| Error::Input(format!("dataset has no horizon {horizon}")))
    }

    /// Most recent observed target value for each row (the lag-1 column).
    pub fn target_history(&self) -> Vec<f64> {
        let col = self.target_lag_columns[0];
        self.rows().map(|r| r[col]).collect()
    }

    /// Re-derives every binary target for a new threshold.
    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.tau = tau;
        for t in &mut self.targets {
            t.exceeds = t.values.iter().map(|&v| v >= tau).collect();
        }
        self
    }

    /// Rows at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features());
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            feature_names: self.feature_names.clone(),
            features,
            targets: self
                .targets
                .iter()
                .map(|t| HorizonTarget {
                    horizon: t.horizon,
                    values: indices.iter().map(|&i| t.values[i]).collect(),
                    exceeds: indices.iter().map(|&i| t.exceeds[i]).collect(),
                })
                .collect(),
            tau: self.tau,
            origins: indices.iter().map(|&i| self.origins[i]).collect(),
            target_lag_columns: self.target_lag_columns.clone(),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let indices: Vec<usize> = range.collect();
        self.select(&indices)
    }

    /// Keeps one horizon only.
    pub fn for_horizon(&self, horizon: usize) -> Result<Self> {
        let target = self.target(horizon)?.clone();
        Ok(Self {
            targets: vec![target],
            ..self.clone()
        })
    }

    /// Drops rows in which the target is already at or above `tau` in any of
    /// its lags: the event is in progress and no forecast is needed.
    pub fn filter_ongoing_exceedance(&self) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let row = self.row(i);
                self.target_lag_columns.iter().all(|&c| row[c] < self.tau)
            })
            .collect();
        self.select(&keep)
    }
}

/// Lag feature vector for a single origin, as [`embed`] would produce it.
pub fn feature_row(frame: &TimeSeriesFrame, cfg: &EmbeddingConfig, origin: usize) -> Result<Vec<f64>> {
    let q = cfg.lags;
    if origin + 1 < q || origin >= frame.len() {
        return Err(Error::Input(format!(
            "origin {origin} needs {q} lags inside a frame of length {}",
            frame.len()
        )));
    }
    lag_features(frame, cfg, origin).ok_or_else(|| {
        Error::Input(format!("origin {origin} has missing values in its lag window"))
    })
}

fn lag_features(frame: &TimeSeriesFrame, cfg: &EmbeddingConfig, origin: usize) -> Option<Vec<f64>> {
    let mut row = Vec::with_capacity(frame.channels().len() * cfg.lags + 1);
    for channel in frame.channels() {
        for k in 0..cfg.lags {
            row.push(channel.values[origin - k]?);
        }
    }
    if cfg.include_day_of_year {
        row.push(f64::from(frame.timestamps()[origin].ordinal()));
    }
    Some(row)
}

pub fn feature_names(frame: &TimeSeriesFrame, cfg: &EmbeddingConfig) -> Vec<String> {
    let mut names: Vec<String> = frame
        .channels()
        .iter()
        .flat_map(|c| (1..=cfg.lags).map(move |k| format!("{}_lag{k}", c.name)))
        .collect();
    if cfg.include_day_of_year {
        names.push("day_of_year".to_string());
    }
    names
}

/// Embeds `frame`; `tau` is computed with `spec` over every observed target
/// value of the frame. Cross-validation relabels each fold with a threshold
/// computed on its own training rows via [`SupervisedDataset::with_threshold`].
pub fn embed(
    frame: &TimeSeriesFrame,
    cfg: &EmbeddingConfig,
    spec: &ThresholdSpec,
) -> Result<SupervisedDataset> {
    let horizons = cfg.validate()?;
    if frame.target().name != cfg.target_channel {
        return Err(Error::Schema(format!(
            "embedding targets '{}' but the frame target is '{}'",
            cfg.target_channel,
            frame.target().name
        )));
    }
    let q = cfg.lags;
    let max_h = *horizons.last().expect("validated non-empty");
    if frame.len() <= q + max_h - 1 {
        return Err(Error::EmptyDataset(format!(
            "frame of length {} is too short for {q} lags and horizon {max_h}",
            frame.len()
        )));
    }

    let target = &frame.target().values;
    let mut features = Vec::new();
    let mut origins = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); horizons.len()];
    for origin in (q - 1)..(frame.len() - max_h) {
        let Some(row) = lag_features(frame, cfg, origin) else {
            continue;
        };
        let Some(ys) = horizons
            .iter()
            .map(|h| target[origin + h])
            .collect::<Option<Vec<f64>>>()
        else {
            continue;
        };
        features.extend(row);
        origins.push(origin);
        for (dst, y) in values.iter_mut().zip(ys) {
            dst.push(y);
        }
    }
    if origins.is_empty() {
        return Err(Error::EmptyDataset("no complete embedded rows".into()));
    }

    let tau = compute_threshold(&frame.observed_target(), spec)?;
    let t = frame.target_index();
    Ok(SupervisedDataset {
        feature_names: feature_names(frame, cfg),
        features,
        targets: horizons
            .into_iter()
            .zip(values)
            .map(|(horizon, values)| HorizonTarget {
                horizon,
                exceeds: values.iter().map(|&v| v >= tau).collect(),
                values,
            })
            .collect(),
        tau,
        origins,
        target_lag_columns: (t * q..(t + 1) * q).collect(),
    })
}

pub fn filter_ongoing_exceedance(ds: &SupervisedDataset) -> SupervisedDataset {
    ds.filter_ongoing_exceedance()
}
