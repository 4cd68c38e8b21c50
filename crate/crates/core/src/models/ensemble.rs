//! Heterogeneous regression ensemble with validation-based trimming.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, ModelSpec, PointForecaster, TrainedModel};
use crate::dataset::SupervisedDataset;
use crate::error::{Error, Result};

/// Uniformly weighted average over the members that survived trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub specs: Vec<ModelSpec>,
    /// Validation MAE per spec; `None` when the ensemble was assembled
    /// directly from fitted members.
    pub validation_mae: Vec<Option<f64>>,
    pub kept: Vec<bool>,
    /// Kept members refit on the full data, in spec order.
    pub members: Vec<TrainedModel>,
}

/// Keeps the `ceil(m / 2)` members with the lowest score; ties go to the
/// earlier member and non-finite scores rank last.
pub fn trim_mask(scores: &[f64]) -> Vec<bool> {
    let keep = scores.len().div_ceil(2);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let key = |i: usize| if scores[i].is_finite() { scores[i] } else { f64::INFINITY };
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mut mask = vec![false; scores.len()];
    for &i in &order[..keep] {
        mask[i] = true;
    }
    mask
}

fn mean_absolute_error(model: &TrainedModel, ds: &SupervisedDataset, horizon: usize) -> Result<f64> {
    let target = ds.target(horizon)?;
    let mut total = 0.0;
    for (row, y) in ds.rows().zip(&target.values) {
        total += (model.predict(row)? - y).abs();
    }
    Ok(total / ds.len() as f64)
}

/// Fits every spec on the chronologically earlier `1 - validation_fraction`
/// of `ds`, ranks members by MAE on the remaining rows, drops the worse half
/// and refits the survivors on all of `ds`.
pub fn fit_heterogeneous_ensemble(
    ds: &SupervisedDataset,
    specs: &[ModelSpec],
    validation_fraction: f64,
) -> Result<EnsembleModel> {
    if specs.len() < 2 {
        return Err(Error::Config(format!(
            "an ensemble needs at least 2 members, got {}",
            specs.len()
        )));
    }
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::Config(format!(
            "validation fraction {validation_fraction} outside (0, 1)"
        )));
    }
    let horizon = specs[0].horizon;
    for spec in specs {
        spec.validate()?;
        if !spec.family.is_regressor() {
            return Err(Error::Config(format!(
                "ensemble members must be regressors, got {}",
                spec.family.name()
            )));
        }
        if spec.horizon != horizon {
            return Err(Error::Config("ensemble members must share one horizon".into()));
        }
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::EmptyDataset("ensemble needs at least 2 rows".into()));
    }
    let n_valid = ((validation_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let fit_part = ds.slice(0..n - n_valid);
    let valid_part = ds.slice(n - n_valid..n);

    let maes = specs
        .par_iter()
        .map(|spec| {
            let model = fit(&fit_part, spec)?;
            mean_absolute_error(&model, &valid_part, horizon)
        })
        .collect::<Result<Vec<f64>>>()?;
    let kept = trim_mask(&maes);
    let members = specs
        .par_iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(spec, _)| fit(ds, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        specs: specs.to_vec(),
        validation_mae: maes.into_iter().map(Some).collect(),
        kept,
        members,
    })
}

impl EnsembleModel {
    /// Ensemble that keeps every given member.
    pub fn from_members(members: Vec<TrainedModel>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        let arity = members[0].feature_names.len();
        if members.iter().any(|m| m.feature_names.len() != arity || m.spec.family.is_classifier()) {
            return Err(Error::Config("members must be regressors over the same features".into()));
        }
        Ok(Self {
            specs: members.iter().map(|m| m.spec.clone()).collect(),
            validation_mae: vec![None; members.len()],
            kept: vec![true; members.len()],
            members,
        })
    }

    pub fn horizon(&self) -> usize {
        self.members[0].spec.horizon
    }
}

impl PointForecaster for EnsembleModel {
    fn predict(&self, row: &[f64]) -> Result<f64> {
        let forecasts = self.predict_members(row)?;
        Ok(forecasts.iter().sum::<f64>() / forecasts.len() as f64)
    }

    fn predict_members(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.members.iter().map(|m| m.predict(row)).collect()
    }

    fn feature_names(&self) -> &[String] {
        &self.members[0].feature_names
    }
}
