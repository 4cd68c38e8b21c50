//! Per-horizon learners: penalized linear models, k-nearest neighbours,
//! random forests, logistic regression, SMOTE and the trimmed heterogeneous
//! ensemble.
//!
//! Every model is direct: one independent fit per horizon, selected by
//! [`ModelSpec::horizon`].

mod ensemble;
mod forest;
mod knn;
mod linalg;
mod linear;
mod logistic;
mod persist;
mod scaler;
mod smote;
mod spec;
mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedDataset;
use crate::error::{Error, Result};

pub use ensemble::{fit_heterogeneous_ensemble, trim_mask, EnsembleModel};
pub use forest::ForestModel;
pub use knn::KnnModel;
pub use linear::LinearModel;
pub use logistic::LogisticModel;
pub use persist::{ModelDocument, StoredModel, FORMAT_VERSION};
pub use scaler::Standardizer;
pub use smote::{nearest_neighbours, smote_resample, Resampled, SmoteConfig};
pub use spec::{ForestParams, ForestProbability, KnnWeights, ModelFamily, ModelSpec};
pub use tree::Node;

/// Probabilities handed to log loss never reach 0 or 1.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

pub fn clip_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

pub(crate) fn rows(features: &[f64], n_features: usize, n: usize) -> impl Iterator<Item = &[f64]> + Clone {
    (0..n).map(move |i| &features[i * n_features..(i + 1) * n_features])
}

/// Anything that turns a feature row into a point forecast.
pub trait PointForecaster: Send + Sync {
    fn predict(&self, row: &[f64]) -> Result<f64>;
    /// Individual member forecasts, for models built from several members.
    fn predict_members(&self, row: &[f64]) -> Result<Vec<f64>>;
    fn feature_names(&self) -> &[String];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl TargetSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (n, sum, min, max) = values.fold((0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY), |(n, s, lo, hi), v| {
            (n + 1, s + v, lo.min(v), hi.max(v))
        });
        Self { mean: sum / n as f64, min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnedParams {
    Linear(LinearModel),
    Knn(KnnModel),
    Forest(ForestModel),
    Logistic(LogisticModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub target_summary: TargetSummary,
    pub params: LearnedParams,
}

impl TrainedModel {
    /// Fits `spec` on a raw design matrix. Regressors read `values`,
    /// classifiers read `labels`.
    pub fn fit_matrix(
        spec: &ModelSpec,
        feature_names: &[String],
        features: &[f64],
        values: &[f64],
        labels: &[bool],
    ) -> Result<Self> {
        spec.validate()?;
        let p = feature_names.len();
        let n = if spec.family.is_classifier() { labels.len() } else { values.len() };
        if n == 0 {
            return Err(Error::EmptyDataset("cannot fit a model on zero rows".into()));
        }
        if features.len() != n * p {
            return Err(Error::Input("design matrix does not match target length".into()));
        }
        let params = match &spec.family {
            ModelFamily::LinearLasso { lambda } => {
                LearnedParams::Linear(LinearModel::fit(features, p, values, *lambda, 1.0)?)
            }
            ModelFamily::LinearRidge { lambda } => {
                LearnedParams::Linear(LinearModel::fit(features, p, values, *lambda, 0.0)?)
            }
            ModelFamily::Knn { k, weights } => {
                LearnedParams::Knn(KnnModel::fit(features, p, values, *k, *weights)?)
            }
            ModelFamily::TreeEnsembleRegressor(fp) => {
                LearnedParams::Forest(ForestModel::fit_regressor(features, p, values, fp)?)
            }
            ModelFamily::TreeEnsembleClassifier(fp) => {
                LearnedParams::Forest(ForestModel::fit_classifier(features, p, labels, fp)?)
            }
            ModelFamily::Logistic { l2 } => {
                LearnedParams::Logistic(LogisticModel::fit(features, p, labels, *l2)?)
            }
        };
        let target_summary = if spec.family.is_classifier() {
            TargetSummary::of(labels.iter().map(|&b| f64::from(u8::from(b))))
        } else {
            TargetSummary::of(values.iter().copied())
        };
        Ok(Self {
            spec: spec.clone(),
            feature_names: feature_names.to_vec(),
            target_summary,
            params,
        })
    }

    pub fn is_classifier(&self) -> bool {
        self.spec.family.is_classifier()
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.feature_names.len() {
            return Err(Error::Input(format!(
                "expected {} features, got {}",
                self.feature_names.len(),
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "feature '{}' is not finite",
                self.feature_names[j]
            )));
        }
        Ok(())
    }

    /// Class-1 probability clipped to `[1e-15, 1 - 1e-15]`.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        let p = match &self.params {
            LearnedParams::Forest(f) if f.classification => f.predict_proba(row),
            LearnedParams::Logistic(m) => m.predict_proba(row),
            _ => {
                return Err(Error::Input(format!(
                    "{} is a regressor; use predict",
                    self.spec.family.name()
                )))
            }
        };
        Ok(clip_probability(p))
    }

    /// Raw-scale `(intercept, coefficients)` for linear and logistic models.
    pub fn linear_coefficients(&self) -> Option<(f64, Vec<f64>)> {
        match &self.params {
            LearnedParams::Linear(m) => Some(m.raw_coefficients()),
            LearnedParams::Logistic(m) => Some(m.scaler.unscale(m.intercept, &m.coefficients)),
            _ => None,
        }
    }
}

impl PointForecaster for TrainedModel {
    fn predict(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        match &self.params {
            LearnedParams::Linear(m) => Ok(m.predict(row)),
            LearnedParams::Knn(m) => Ok(m.predict(row)),
            LearnedParams::Forest(f) if !f.classification => Ok(f.predict(row)),
            _ => Err(Error::Input(format!(
                "{} is a classifier; use predict_proba",
                self.spec.family.name()
            ))),
        }
    }

    /// Per-tree forecasts of a regression forest.
    fn predict_members(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        match &self.params {
            LearnedParams::Forest(f) if !f.classification => Ok(f.tree_outputs(row)),
            _ => Err(Error::Input(format!(
                "{} has no ensemble members",
                self.spec.family.name()
            ))),
        }
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }
}

/// Fits `spec` on `ds` for the spec's horizon.
pub fn fit(ds: &SupervisedDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    let target = ds.target(spec.horizon)?;
    let features: Vec<f64> = ds.rows().flatten().copied().collect();
    TrainedModel::fit_matrix(spec, ds.feature_names(), &features, &target.values, &target.exceeds)
}

fn expect_family(spec: &ModelSpec, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} cannot fit family {}", spec.family.name())))
    }
}

pub fn fit_linear(ds: &SupervisedDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    expect_family(
        spec,
        matches!(spec.family, ModelFamily::LinearLasso { .. } | ModelFamily::LinearRidge { .. }),
        "fit_linear",
    )?;
    fit(ds, spec)
}

pub fn fit_knn(ds: &SupervisedDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    expect_family(spec, matches!(spec.family, ModelFamily::Knn { .. }), "fit_knn")?;
    fit(ds, spec)
}

pub fn fit_tree_ensemble(ds: &SupervisedDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    expect_family(
        spec,
        matches!(
            spec.family,
            ModelFamily::TreeEnsembleRegressor(_) | ModelFamily::TreeEnsembleClassifier(_)
        ),
        "fit_tree_ensemble",
    )?;
    fit(ds, spec)
}

pub fn fit_logistic(ds: &SupervisedDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    expect_family(spec, matches!(spec.family, ModelFamily::Logistic { .. }), "fit_logistic")?;
    fit(ds, spec)
}

/// Balances the horizon's binary target with SMOTE, then fits the classifier.
pub fn fit_classifier_with_smote(
    ds: &SupervisedDataset,
    spec: &ModelSpec,
    smote: &SmoteConfig,
) -> Result<TrainedModel> {
    expect_family(spec, spec.family.is_classifier(), "SMOTE pipeline")?;
    let target = ds.target(spec.horizon)?;
    let features: Vec<f64> = ds.rows().flatten().copied().collect();
    let resampled = smote_resample(&features, ds.n_features(), &target.exceeds, smote)?;
    TrainedModel::fit_matrix(spec, ds.feature_names(), &resampled.features, &[], &resampled.labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> SupervisedDataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 + 1.0).collect();
        SupervisedDataset::from_parts(
            vec!["y_lag1".into(), "x_lag1".into()],
            rows,
            vec![(1, y)],
            (n as f64) * 0.4,
            vec![0],
        )
        .unwrap()
    }

    fn lasso(lambda: f64) -> ModelSpec {
        ModelSpec::new(ModelFamily::LinearLasso { lambda }, 1)
    }

    #[test]
    fn arity_and_nan_are_input_errors() {
        let m = fit(&toy(10), &lasso(0.0)).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Input(_))));
        assert!(matches!(m.predict(&[f64::NAN, 1.0]), Err(Error::Input(_))));
        assert!((m.predict(&[4.0, 0.0]).unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn family_guards() {
        let ds = toy(10);
        assert!(matches!(fit_knn(&ds, &lasso(0.1)), Err(Error::Config(_))));
        let knn = ModelSpec::new(ModelFamily::Knn { k: 11, weights: KnnWeights::Uniform }, 1);
        assert!(matches!(fit_knn(&ds, &knn), Err(Error::Config(_))));
        assert!(matches!(fit(&ds, &ModelSpec::new(ModelFamily::LinearLasso { lambda: 0.0 }, 2)), Err(Error::Input(_))));
    }

    #[test]
    fn classifier_probabilities_are_clipped_and_separate_training_points() {
        let ds = toy(10);
        let rfc = ModelSpec::new(
            ModelFamily::TreeEnsembleClassifier(ForestParams { trees: 25, feature_fraction: 1.0, ..Default::default() }),
            1,
        );
        let m = fit(&ds, &rfc).unwrap();
        let target = ds.target(1).unwrap();
        for (row, b) in ds.rows().zip(&target.exceeds) {
            let p = m.predict_proba(row).unwrap();
            assert!(p >= PROBABILITY_FLOOR && p <= 1.0 - PROBABILITY_FLOOR);
            assert_eq!(p > 0.5, *b);
        }
        assert!(matches!(m.predict(ds.row(0)), Err(Error::Input(_))));
        let lr = fit(&ds, &ModelSpec::new(ModelFamily::Logistic { l2: 1e-3 }, 1)).unwrap();
        for (row, b) in ds.rows().zip(&target.exceeds) {
            assert_eq!(lr.predict_proba(row).unwrap() > 0.5, *b);
        }
    }

    #[test]
    fn ensemble_of_identical_members_matches_single() {
        let ds = toy(12);
        let single = fit(&ds, &lasso(0.01)).unwrap();
        let ens = EnsembleModel::from_members(vec![single.clone(), single.clone()]).unwrap();
        let row = [3.5, 1.0];
        assert_eq!(ens.predict(&row).unwrap(), single.predict(&row).unwrap());
        let members = ens.predict_members(&row).unwrap();
        assert_eq!(members.len(), 2);
        assert_eq!(members, ens.predict_members(&row).unwrap());
    }

    #[test]
    fn forest_members_average_to_prediction() {
        let ds = toy(30);
        let spec = ModelSpec::new(ModelFamily::TreeEnsembleRegressor(ForestParams { trees: 7, ..Default::default() }), 1);
        let m = fit(&ds, &spec).unwrap();
        let row = [11.0, 2.0];
        let members = m.predict_members(&row).unwrap();
        assert_eq!(members.len(), 7);
        let mean = members.iter().sum::<f64>() / 7.0;
        assert!((mean - m.predict(&row).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn heterogeneous_ensemble_trims_and_refits() {
        let ds = toy(40);
        let specs = vec![
            lasso(0.0),
            lasso(50.0),
            ModelSpec::new(ModelFamily::Knn { k: 1, weights: KnnWeights::Uniform }, 1),
            ModelSpec::new(ModelFamily::LinearRidge { lambda: 0.0 }, 1),
        ];
        let ens = fit_heterogeneous_ensemble(&ds, &specs, 0.2).unwrap();
        assert_eq!(ens.kept.iter().filter(|&&k| k).count(), 2);
        // the exact linear fits extrapolate perfectly; shrunk and 1-NN models do not
        assert_eq!(ens.kept, vec![true, false, false, true]);
        assert_eq!(ens.members.len(), 2);
        assert!(matches!(fit_heterogeneous_ensemble(&ds, &specs[..1], 0.2), Err(Error::Config(_))));
    }
}
