//! Conversion of point forecasts into exceedance probabilities.
//!
//! A Weibull distribution fitted on training targets is shifted onto each
//! forecast, and the exceedance probability is its survival function at the
//! threshold. Ensemble members can instead vote directly.

mod weibull;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use weibull::{fit_weibull_mle, weibull_cdf, ShiftedDistribution, WeibullParams};

/// Where the fitted distribution is anchored relative to the forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationMode {
    /// Location equals the forecast; `p = 1` once the forecast reaches tau.
    #[default]
    Literal,
    /// Location is shifted so the predictive mean equals the forecast.
    MeanCentered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilitySource {
    Cdf,
    Direct,
    Classifier,
}

impl ProbabilitySource {
    pub fn name(&self) -> &'static str {
        match self {
            ProbabilitySource::Cdf => "cdf",
            ProbabilitySource::Direct => "direct",
            ProbabilitySource::Classifier => "classifier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceConfig {
    #[serde(default)]
    pub location_mode: LocationMode,
    pub tau: f64,
}

impl ExceedanceConfig {
    pub fn new(location_mode: LocationMode, tau: f64) -> Result<Self> {
        let cfg = Self { location_mode, tau };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() {
            return Err(Error::Config(format!("threshold must be finite, got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub p: f64,
    pub source: ProbabilitySource,
    #[serde(default)]
    pub horizon: Option<usize>,
}

impl ProbabilityEstimate {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }
}

/// `P(Y >= tau)` under `dist` shifted onto `y_hat`.
pub fn exceedance_probability<D: ShiftedDistribution>(
    y_hat: f64,
    location_mode: LocationMode,
    tau: f64,
    dist: &D,
) -> f64 {
    let location = match location_mode {
        LocationMode::Literal => y_hat,
        LocationMode::MeanCentered => y_hat - dist.mean_offset(),
    };
    dist.survival(tau, location).clamp(0.0, 1.0)
}

pub fn exceedance_from_forecast(
    y_hat: f64,
    cfg: &ExceedanceConfig,
    params: &WeibullParams,
) -> ProbabilityEstimate {
    ProbabilityEstimate {
        p: exceedance_probability(y_hat, cfg.location_mode, cfg.tau, params),
        source: ProbabilitySource::Cdf,
        horizon: None,
    }
}

/// Fraction of member forecasts at or above `tau`.
pub fn exceedance_direct(member_forecasts: &[f64], tau: f64) -> Result<ProbabilityEstimate> {
    if member_forecasts.is_empty() {
        return Err(Error::Input("direct exceedance needs at least one member forecast".into()));
    }
    let hits = member_forecasts.iter().filter(|&&f| f >= tau).count();
    Ok(ProbabilityEstimate {
        p: hits as f64 / member_forecasts.len() as f64,
        source: ProbabilitySource::Direct,
        horizon: None,
    })
}

/// Exceedance probability at each of `taus`, which must be strictly
/// increasing.
pub fn exceedance_curve(
    y_hat: f64,
    taus: &[f64],
    cfg: &ExceedanceConfig,
    params: &WeibullParams,
) -> Result<Vec<(f64, f64)>> {
    if let Some(t) = taus.iter().find(|t| !t.is_finite()) {
        return Err(Error::Input(format!("curve threshold {t} is not finite")));
    }
    if let Some(w) = taus.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!(
            "curve thresholds must be strictly increasing, got {} then {}",
            w[0], w[1]
        )));
    }
    Ok(taus
        .iter()
        .map(|&tau| {
            let point = ExceedanceConfig { tau, ..*cfg };
            (tau, exceedance_from_forecast(y_hat, &point, params).p)
        })
        .collect())
}

/// Writes a curve as CSV with a `tau,probability` header.
pub fn write_curve_csv<W: Write>(out: W, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "probability"])?;
    for (tau, p) in curve {
        w.write_record([tau.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
