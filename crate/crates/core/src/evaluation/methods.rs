//! Method roster: an estimator paired with a way of producing exceedance
//! probabilities.

use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedDataset;
use crate::error::{Error, Result};
use crate::exceedance::{
    exceedance_direct, exceedance_from_forecast, ExceedanceConfig, ProbabilityEstimate, ProbabilitySource,
    WeibullParams,
};
use crate::models::{
    fit, fit_classifier_with_smote, fit_heterogeneous_ensemble, ForestParams, KnnWeights, ModelFamily, ModelSpec,
    SmoteConfig, StoredModel,
};

fn default_validation_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Single {
        model: ModelFamily,
    },
    /// Trimmed heterogeneous ensemble; the last `validation_fraction` of the
    /// training rows ranks the members.
    Ensemble {
        members: Vec<ModelFamily>,
        #[serde(default = "default_validation_fraction")]
        validation_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub id: String,
    pub estimator: Estimator,
    pub probability: ProbabilitySource,
    #[serde(default)]
    pub smote: Option<SmoteConfig>,
}

impl MethodSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("method '{}': {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::Config("method id must not be empty".into()));
        }
        match &self.estimator {
            Estimator::Single { model } => {
                model.validate()?;
                match self.probability {
                    ProbabilitySource::Classifier if !model.is_classifier() => {
                        return bad("classifier probabilities need a classifier")
                    }
                    ProbabilitySource::Cdf if !model.is_regressor() => return bad("cdf probabilities need a regressor"),
                    ProbabilitySource::Direct if !matches!(model, ModelFamily::TreeEnsembleRegressor(_)) => {
                        return bad("direct probabilities need an ensemble or a tree-ensemble regressor")
                    }
                    _ => {}
                }
            }
            Estimator::Ensemble { members, validation_fraction } => {
                if members.len() < 2 {
                    return bad("an ensemble needs at least 2 members");
                }
                if !(*validation_fraction > 0.0 && *validation_fraction < 1.0) {
                    return bad("validation fraction must be in (0, 1)");
                }
                for m in members {
                    m.validate()?;
                    if !m.is_regressor() {
                        return bad("ensemble members must be regressors");
                    }
                }
                if self.probability == ProbabilitySource::Classifier {
                    return bad("an ensemble of regressors has no classifier probabilities");
                }
            }
        }
        if self.smote.is_some() && self.probability != ProbabilitySource::Classifier {
            return bad("SMOTE applies to classifiers only");
        }
        Ok(())
    }

    /// Key shared by methods whose fitted models are interchangeable.
    pub fn fit_key(&self) -> String {
        serde_json::to_string(&(&self.estimator, &self.smote)).unwrap_or_default()
    }

    pub fn fit(&self, ds: &SupervisedDataset, horizon: usize) -> Result<StoredModel> {
        match &self.estimator {
            Estimator::Single { model } => {
                let spec = ModelSpec::new(model.clone(), horizon);
                let trained = match &self.smote {
                    Some(cfg) => fit_classifier_with_smote(ds, &spec, cfg)?,
                    None => fit(ds, &spec)?,
                };
                Ok(StoredModel::Single(trained))
            }
            Estimator::Ensemble { members, validation_fraction } => {
                let specs: Vec<ModelSpec> = members.iter().map(|m| ModelSpec::new(m.clone(), horizon)).collect();
                Ok(StoredModel::Ensemble(fit_heterogeneous_ensemble(ds, &specs, *validation_fraction)?))
            }
        }
    }
}

/// Point forecast (regressors only) and exceedance probability for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub y_hat: Option<f64>,
    pub estimate: ProbabilityEstimate,
}

pub fn forecast_row(
    model: &StoredModel,
    source: ProbabilitySource,
    row: &[f64],
    cfg: &ExceedanceConfig,
    weibull: Option<&WeibullParams>,
) -> Result<Forecast> {
    if source == ProbabilitySource::Classifier {
        let StoredModel::Single(m) = model else {
            return Err(Error::Config("classifier probabilities need a single classifier".into()));
        };
        let p = m.predict_proba(row)?;
        return Ok(Forecast { y_hat: None, estimate: ProbabilityEstimate { p, source, horizon: None } });
    }
    let forecaster = model
        .forecaster()
        .ok_or_else(|| Error::Config("model produces no point forecasts".into()))?;
    let y_hat = forecaster.predict(row)?;
    let estimate = match source {
        ProbabilitySource::Cdf => {
            let w = weibull.ok_or_else(|| Error::Config("cdf probabilities need fitted Weibull parameters".into()))?;
            exceedance_from_forecast(y_hat, cfg, w)
        }
        _ => exceedance_direct(&forecaster.predict_members(row)?, cfg.tau)?,
    };
    Ok(Forecast { y_hat: Some(y_hat), estimate })
}

/// Regressor grid for the heterogeneous ensemble: two LASSO, two ridge, two
/// kNN weightings at two neighbourhood sizes and two forest depths.
pub fn default_ensemble_members(seed: u64) -> Vec<ModelFamily> {
    let forest = |max_depth| {
        ModelFamily::TreeEnsembleRegressor(ForestParams {
            trees: 50,
            max_depth,
            min_samples_leaf: 5,
            seed,
            ..ForestParams::default()
        })
    };
    vec![
        ModelFamily::LinearLasso { lambda: 1e-3 },
        ModelFamily::LinearLasso { lambda: 1e-2 },
        ModelFamily::LinearRidge { lambda: 1.0 },
        ModelFamily::LinearRidge { lambda: 100.0 },
        ModelFamily::Knn { k: 10, weights: KnnWeights::Uniform },
        ModelFamily::Knn { k: 10, weights: KnnWeights::Distance },
        ModelFamily::Knn { k: 30, weights: KnnWeights::Uniform },
        ModelFamily::Knn { k: 30, weights: KnnWeights::Distance },
        forest(Some(8)),
        forest(None),
    ]
}

/// Classifier baselines (RFC, LR, RFC with SMOTE) against the CDF and
/// direct estimators built on a forest regressor, LASSO and the
/// heterogeneous ensemble.
pub fn default_roster(seed: u64) -> Vec<MethodSpec> {
    let forest = ForestParams { trees: 100, min_samples_leaf: 5, seed, ..ForestParams::default() };
    let single = |model| Estimator::Single { model };
    let method = |id: &str, estimator, probability| MethodSpec { id: id.into(), estimator, probability, smote: None };
    let ensemble = Estimator::Ensemble {
        members: default_ensemble_members(seed),
        validation_fraction: default_validation_fraction(),
    };
    vec![
        method("rfc", single(ModelFamily::TreeEnsembleClassifier(forest.clone())), ProbabilitySource::Classifier),
        method("lr", single(ModelFamily::Logistic { l2: 1e-3 }), ProbabilitySource::Classifier),
        MethodSpec {
            smote: Some(SmoteConfig { k: 5, seed }),
            ..method("rfc_smote", single(ModelFamily::TreeEnsembleClassifier(forest.clone())), ProbabilitySource::Classifier)
        },
        method("rfr_cdf", single(ModelFamily::TreeEnsembleRegressor(forest.clone())), ProbabilitySource::Cdf),
        method("rfr_direct", single(ModelFamily::TreeEnsembleRegressor(forest)), ProbabilitySource::Direct),
        method("lasso_cdf", single(ModelFamily::LinearLasso { lambda: 1e-3 }), ProbabilitySource::Cdf),
        method("hre_cdf", ensemble.clone(), ProbabilitySource::Cdf),
        method("hre_direct", ensemble, ProbabilitySource::Direct),
    ]
}
