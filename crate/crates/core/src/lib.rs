//! Exceedance probability forecasting.
//!
//! A point forecaster trained on a time-delay embedding of a multivariate
//! series produces `y_hat`; a Weibull distribution fitted on the training
//! targets and located at `y_hat` turns that forecast into the probability
//! that the series reaches a critical threshold `tau`.
//!
//! The crate is split into four layers:
//!
//! * [`dataset`]: series ingestion, synthetic generation, thresholds and
//!   the supervised embedding.
//! * [`models`]: per-horizon regressors, classifiers, SMOTE and the trimmed
//!   heterogeneous ensemble.
//! * [`exceedance`]: Weibull fitting and forecast-to-probability conversion.
//! * [`evaluation`]: Monte Carlo cross-validation, metrics and the Bayesian
//!   correlated t-test.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod exceedance;
pub mod models;

pub use error::{Error, Result};
