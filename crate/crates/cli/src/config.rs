//! Run configuration: one JSON document drives every subcommand.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use exceed_core::dataset::{
    generate_synthetic, load_csv, CsvSchema, EmbeddingConfig, SyntheticConfig, ThresholdSpec, TimeSeriesFrame,
};
use exceed_core::evaluation::{default_roster, CvConfig, MethodSpec};
use exceed_core::exceedance::LocationMode;
use exceed_core::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InputSource {
    Csv {
        path: PathBuf,
        #[serde(flatten)]
        schema: CsvSchema,
    },
    Synthetic(SyntheticConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceSettings {
    #[serde(default)]
    pub location_mode: LocationMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: InputSource,
    pub embedding: EmbeddingConfig,
    pub threshold: ThresholdSpec,
    pub exceedance: ExceedanceSettings,
    /// The built-in roster when absent.
    pub methods: Option<Vec<MethodSpec>>,
    pub cv: CvConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: InputSource::Synthetic(SyntheticConfig::default()),
            embedding: EmbeddingConfig {
                include_day_of_year: true,
                ..EmbeddingConfig::new(6, vec![1, 6, 12, 24], "swh")
            },
            threshold: ThresholdSpec::default(),
            exceedance: ExceedanceSettings::default(),
            methods: None,
            cv: CvConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(Error::from)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn roster(&self) -> Vec<MethodSpec> {
        self.methods.clone().unwrap_or_else(|| default_roster(self.cv.seed))
    }

    pub fn frame(&self) -> anyhow::Result<TimeSeriesFrame> {
        match &self.input {
            InputSource::Csv { path, schema } => {
                if !path.exists() {
                    return Err(Error::Config(format!("input CSV {} does not exist", path.display())).into());
                }
                Ok(load_csv(path, schema).with_context(|| format!("loading {}", path.display()))?)
            }
            InputSource::Synthetic(cfg) => Ok(generate_synthetic(cfg)?),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.embedding.validate()?;
        self.threshold.validate()?;
        for m in self.roster() {
            m.validate()?;
        }
        Ok(())
    }
}
