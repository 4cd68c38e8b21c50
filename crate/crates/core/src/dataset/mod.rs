//! Series ingestion, synthetic generation and supervised embedding.

mod embed;
mod frame;
mod io;
mod synthetic;
mod threshold;

pub use embed::{
    embed, feature_names, feature_row, filter_ongoing_exceedance, EmbeddingConfig, HorizonTarget,
    SupervisedDataset,
};
pub use frame::{Channel, TimeSeriesFrame, STEP};
pub use io::{load_csv, parse_timestamp, read_csv, write_csv, ChannelMapping, CsvSchema, TIMESTAMP_FORMAT};
pub use synthetic::{generate_synthetic, CovariateSpec, SyntheticConfig};
pub use threshold::{compute_threshold, quantile_linear, ThresholdSpec};
