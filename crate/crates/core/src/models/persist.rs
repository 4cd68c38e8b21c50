//! Versioned JSON documents for trained models.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EnsembleModel, PointForecaster, TrainedModel};
use crate::error::{Error, Result};
use crate::exceedance::{LocationMode, ProbabilitySource, WeibullParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", content = "model", rename_all = "snake_case")]
pub enum StoredModel {
    Single(TrainedModel),
    Ensemble(EnsembleModel),
}

impl StoredModel {
    pub fn forecaster(&self) -> Option<&dyn PointForecaster> {
        match self {
            StoredModel::Single(m) if m.is_classifier() => None,
            StoredModel::Single(m) => Some(m),
            StoredModel::Ensemble(e) => Some(e),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            StoredModel::Single(m) => &m.feature_names,
            StoredModel::Ensemble(e) => e.feature_names(),
        }
    }
}

/// A trained model plus everything needed to turn its output into an
/// exceedance probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub method: String,
    pub horizon: usize,
    pub probability: ProbabilitySource,
    pub tau: f64,
    #[serde(default)]
    pub weibull: Option<WeibullParams>,
    #[serde(default)]
    pub location_mode: Option<LocationMode>,
    pub model: StoredModel,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // trees nest one object per level and may exceed serde_json's default depth
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let doc = Self::deserialize(&mut de)?;
        de.end()?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model document version {} is not supported (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
