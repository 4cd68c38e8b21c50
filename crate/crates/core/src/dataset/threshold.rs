use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the exceedance threshold `tau` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdSpec {
    /// Percentile of the training target values, in (0, 100).
    Percentile { percentile: f64 },
    Fixed { value: f64 },
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Percentile { percentile: 99.0 }
    }
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Percentile { percentile } if percentile > 0.0 && percentile < 100.0 => {
                Ok(())
            }
            ThresholdSpec::Percentile { percentile } => Err(Error::Config(format!(
                "percentile {percentile} outside (0, 100)"
            ))),
            ThresholdSpec::Fixed { value } if value.is_finite() => Ok(()),
            ThresholdSpec::Fixed { value } => {
                Err(Error::Config(format!("fixed threshold {value} is not finite")))
            }
        }
    }
}

/// Quantile by linear interpolation between closest ranks: with the values
/// sorted ascending as `x[0..n]`, position `h = (n - 1) * q` and the result is
/// `x[floor h] + (h - floor h) * (x[floor h + 1] - x[floor h])`.
pub fn quantile_linear(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("quantile of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("quantile input contains non-finite values".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn compute_threshold(values: &[f64], spec: &ThresholdSpec) -> Result<f64> {
    spec.validate()?;
    if values.is_empty() {
        return Err(Error::Domain("threshold of an empty sample".into()));
    }
    match *spec {
        ThresholdSpec::Percentile { percentile } => quantile_linear(values, percentile / 100.0),
        ThresholdSpec::Fixed { value } => Ok(value),
    }
}
