use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeights {
    #[default]
    Uniform,
    Distance,
}

/// How a classification forest turns trees into a class-1 probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestProbability {
    /// Fraction of trees whose leaf majority is class 1.
    #[default]
    Vote,
    /// Mean of the leaves' class-1 fractions.
    LeafMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    /// `None` grows until leaves are pure or hit `min_samples_leaf`.
    pub max_depth: Option<usize>,
    /// Fraction of features drawn as split candidates at each node.
    pub feature_fraction: f64,
    pub min_samples_leaf: usize,
    /// Upper bound on candidate thresholds per feature (quantile binned).
    pub max_bins: usize,
    pub bootstrap: bool,
    pub seed: u64,
    pub probability: ForestProbability,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: None,
            feature_fraction: 0.5,
            min_samples_leaf: 1,
            max_bins: 255,
            bootstrap: true,
            seed: 0,
            probability: ForestProbability::Vote,
        }
    }
}

fn default_logistic_l2() -> f64 {
    1e-3
}

/// Learning algorithm and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    LinearLasso { lambda: f64 },
    LinearRidge { lambda: f64 },
    Knn {
        k: usize,
        #[serde(default)]
        weights: KnnWeights,
    },
    TreeEnsembleRegressor(ForestParams),
    TreeEnsembleClassifier(ForestParams),
    Logistic {
        #[serde(default = "default_logistic_l2")]
        l2: f64,
    },
}

impl ModelFamily {
    pub fn is_classifier(&self) -> bool {
        matches!(self, ModelFamily::TreeEnsembleClassifier(_) | ModelFamily::Logistic { .. })
    }

    pub fn is_regressor(&self) -> bool {
        !self.is_classifier()
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::LinearLasso { .. } => "linear_lasso",
            ModelFamily::LinearRidge { .. } => "linear_ridge",
            ModelFamily::Knn { .. } => "knn",
            ModelFamily::TreeEnsembleRegressor(_) => "tree_ensemble_regressor",
            ModelFamily::TreeEnsembleClassifier(_) => "tree_ensemble_classifier",
            ModelFamily::Logistic { .. } => "logistic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            ModelFamily::LinearLasso { lambda } | ModelFamily::LinearRidge { lambda } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return bad(format!("lambda must be finite and >= 0, got {lambda}"));
                }
            }
            ModelFamily::Knn { k, .. } => {
                if *k == 0 {
                    return bad("knn requires k >= 1".into());
                }
            }
            ModelFamily::TreeEnsembleRegressor(p) | ModelFamily::TreeEnsembleClassifier(p) => {
                if p.trees == 0 {
                    return bad("tree ensemble requires at least one tree".into());
                }
                if !(p.feature_fraction > 0.0 && p.feature_fraction <= 1.0) {
                    return bad(format!("feature_fraction {} outside (0, 1]", p.feature_fraction));
                }
                if p.min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be >= 1".into());
                }
                if !(2..=256).contains(&p.max_bins) {
                    return bad(format!("max_bins {} outside [2, 256]", p.max_bins));
                }
            }
            ModelFamily::Logistic { l2 } => {
                if !(l2.is_finite() && *l2 >= 0.0) {
                    return bad(format!("l2 must be finite and >= 0, got {l2}"));
                }
            }
        }
        Ok(())
    }
}

/// A family bound to the horizon it forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub family: ModelFamily,
    pub horizon: usize,
}

impl ModelSpec {
    pub fn new(family: ModelFamily, horizon: usize) -> Self {
        Self { family, horizon }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        self.family.validate()
    }
}
