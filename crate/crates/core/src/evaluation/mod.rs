//! Monte Carlo cross-validation, forecast scores and Bayesian comparison of
//! exceedance methods.

mod bayes;
mod benchmark;
mod methods;
mod metrics;
mod splits;

pub use bayes::{bayes_correlated_ttest, resample_correlation, BayesComparison};
pub use benchmark::{prepare_fold, run_benchmark, Aggregate, BenchmarkReport, CvConfig, FoldSummary, MetricReport};
pub use methods::{default_ensemble_members, default_roster, forecast_row, Estimator, Forecast, MethodSpec};
pub use metrics::{log_loss, midranks, pearson, point_metrics, roc_auc, spearman, PointMetrics};
pub use splits::{block_lengths, monte_carlo_splits, split_hash, FoldSpec};
