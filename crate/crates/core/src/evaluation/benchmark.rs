//! Monte Carlo cross-validated comparison of exceedance methods.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bayes::{bayes_correlated_ttest, resample_correlation, BayesComparison};
use super::methods::{forecast_row, MethodSpec};
use super::metrics::{log_loss, point_metrics, roc_auc};
use super::splits::{monte_carlo_splits, split_hash, FoldSpec};
use crate::dataset::{compute_threshold, embed, EmbeddingConfig, SupervisedDataset, ThresholdSpec, TimeSeriesFrame};
use crate::error::{Error, Result};
use crate::exceedance::{fit_weibull_mle, ExceedanceConfig, LocationMode, ProbabilitySource, WeibullParams};
use crate::models::StoredModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub rope_halfwidth: f64,
    /// Compare every other method against this one; all pairs when absent.
    pub reference: Option<String>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            train_fraction: 0.5,
            test_fraction: 0.2,
            seed: 0,
            rope_halfwidth: 0.01,
            reference: None,
        }
    }
}

/// Scores of one method at one horizon on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: String,
    pub horizon: usize,
    pub fold_index: usize,
    pub split_hash: String,
    pub n_test: usize,
    pub n_positive: usize,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub mape: Option<f64>,
    pub r2: Option<f64>,
    /// `None` when the test rows hold a single class.
    pub auc: Option<f64>,
    pub log_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold_index: usize,
    pub train_range: Range<usize>,
    pub test_range: Range<usize>,
    pub tau: f64,
    pub weibull: Option<WeibullParams>,
    pub n_train: usize,
    pub n_test: usize,
    pub split_hash: String,
}

/// Fold means of one method at one horizon. AUC averages only the folds
/// where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub horizon: usize,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub r2: Option<f64>,
    pub auc: Option<f64>,
    pub auc_folds: usize,
    pub missing_auc: usize,
    pub log_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub folds: Vec<FoldSummary>,
    pub metrics: Vec<MetricReport>,
    pub aggregates: Vec<Aggregate>,
    pub comparisons: Vec<BayesComparison>,
    pub missing_auc_cells: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| s / n as f64)
}

fn score_cell(
    method: &MethodSpec,
    model: &StoredModel,
    test: &SupervisedDataset,
    horizon: usize,
    cfg: &ExceedanceConfig,
    weibull: Option<&WeibullParams>,
    fold: &FoldSummary,
) -> Result<MetricReport> {
    let target = test.target(horizon)?;
    let mut y_hat = Vec::with_capacity(test.len());
    let mut p = Vec::with_capacity(test.len());
    for row in test.rows() {
        let f = forecast_row(model, method.probability, row, cfg, weibull)?;
        if let Some(y) = f.y_hat {
            y_hat.push(y);
        }
        p.push(f.estimate.p);
    }
    let point = if y_hat.len() == test.len() {
        Some(point_metrics(&target.values, &y_hat)?)
    } else {
        None
    };
    let auc = match roc_auc(&target.exceeds, &p) {
        Ok(a) => Some(a),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        method: method.id.clone(),
        horizon,
        fold_index: fold.fold_index,
        split_hash: fold.split_hash.clone(),
        n_test: test.len(),
        n_positive: target.exceeds.iter().filter(|&&b| b).count(),
        mae: point.map(|m| m.mae),
        rmse: point.map(|m| m.rmse),
        mape: point.and_then(|m| m.mape),
        r2: point.map(|m| m.r2),
        auc,
        log_loss: log_loss(&target.exceeds, &p)?,
    })
}

/// Training and test rows of one fold, relabelled with the threshold of the
/// training rows and stripped of rows whose event is already under way.
pub fn prepare_fold(
    ds: &SupervisedDataset,
    fold: &FoldSpec,
    threshold: &ThresholdSpec,
) -> Result<(SupervisedDataset, SupervisedDataset, Vec<f64>)> {
    let train_raw = ds.slice(fold.train_range.clone());
    let history = train_raw.target_history();
    let tau = compute_threshold(&history, threshold)?;
    let train = train_raw.with_threshold(tau).filter_ongoing_exceedance();
    let test = ds.slice(fold.test_range.clone()).with_threshold(tau).filter_ongoing_exceedance();
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "fold {} has no rows left after filtering ongoing exceedances",
            fold.fold_index
        )));
    }
    Ok((train, test, history))
}

fn validate_roster(methods: &[MethodSpec], cv: &CvConfig) -> Result<()> {
    if methods.is_empty() {
        return Err(Error::Config("method roster is empty".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for m in methods {
        m.validate()?;
        if !seen.insert(m.id.as_str()) {
            return Err(Error::Config(format!("duplicate method id '{}'", m.id)));
        }
    }
    if let Some(r) = &cv.reference {
        if !seen.contains(r.as_str()) {
            return Err(Error::Config(format!("reference method '{r}' is not in the roster")));
        }
    }
    if !(cv.rope_halfwidth.is_finite() && cv.rope_halfwidth >= 0.0) {
        return Err(Error::Config("rope half-width must be finite and non-negative".into()));
    }
    Ok(())
}

/// Runs every method at every horizon on every fold.
///
/// The frame is embedded once; each fold takes its threshold from the
/// lag-1 target values of its training rows, relabels and filters both
/// sides, and fits the Weibull distribution on the same training values.
/// Methods that share an estimator share its fitted model.
pub fn run_benchmark(
    frame: &TimeSeriesFrame,
    embedding: &EmbeddingConfig,
    threshold: &ThresholdSpec,
    location_mode: LocationMode,
    methods: &[MethodSpec],
    cv: &CvConfig,
) -> Result<BenchmarkReport> {
    validate_roster(methods, cv)?;
    threshold.validate()?;
    let horizons = embedding.validate()?;
    let ds = embed(frame, embedding, threshold)?;
    let splits = monte_carlo_splits(ds.len(), cv.folds, cv.train_fraction, cv.test_fraction, cv.seed)?;
    let needs_weibull = methods.iter().any(|m| m.probability == ProbabilitySource::Cdf);

    let mut fit_keys: Vec<String> = Vec::new();
    let mut method_fit: Vec<usize> = Vec::with_capacity(methods.len());
    for m in methods {
        let key = m.fit_key();
        let idx = fit_keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            fit_keys.push(key);
            fit_keys.len() - 1
        });
        method_fit.push(idx);
    }
    let fit_owner: Vec<usize> = (0..fit_keys.len())
        .map(|k| method_fit.iter().position(|&f| f == k).unwrap())
        .collect();

    let mut folds = Vec::with_capacity(splits.len());
    let mut metrics = Vec::new();
    for split in &splits {
        let (train, test, history) = prepare_fold(&ds, split, threshold)?;
        let tau = train.tau();
        let weibull = if needs_weibull { Some(fit_weibull_mle(&history)?) } else { None };
        let summary = FoldSummary {
            fold_index: split.fold_index,
            train_range: split.train_range.clone(),
            test_range: split.test_range.clone(),
            tau,
            weibull,
            n_train: train.len(),
            n_test: test.len(),
            split_hash: split_hash(split, tau, train.origins(), test.origins()),
        };
        log::info!(
            "fold {}: tau {tau:.4}, {} train rows, {} test rows, split {}",
            split.fold_index,
            train.len(),
            test.len(),
            &summary.split_hash[..16]
        );

        let jobs: Vec<(usize, usize)> = (0..fit_keys.len())
            .flat_map(|k| horizons.iter().map(move |&h| (k, h)))
            .collect();
        let fitted: Vec<StoredModel> = jobs
            .par_iter()
            .map(|&(k, h)| methods[fit_owner[k]].fit(&train, h))
            .collect::<Result<_>>()?;

        let cfg = ExceedanceConfig::new(location_mode, tau)?;
        let cells: Vec<(usize, usize)> = (0..methods.len())
            .flat_map(|m| (0..horizons.len()).map(move |h| (m, h)))
            .collect();
        let reports: Vec<MetricReport> = cells
            .par_iter()
            .map(|&(m, hi)| {
                let model = &fitted[method_fit[m] * horizons.len() + hi];
                score_cell(&methods[m], model, &test, horizons[hi], &cfg, weibull.as_ref(), &summary)
            })
            .collect::<Result<_>>()?;
        metrics.extend(reports);
        folds.push(summary);
    }

    let missing_auc_cells = metrics.iter().filter(|r| r.auc.is_none()).count();
    if missing_auc_cells > 0 {
        log::warn!("{missing_auc_cells} fold-horizon cells had a single-class test set and were left out of AUC");
    }
    let aggregates = aggregate(methods, &horizons, &metrics);
    let comparisons = compare(methods, &horizons, &aggregates, cv)?;
    Ok(BenchmarkReport { folds, metrics, aggregates, comparisons, missing_auc_cells })
}

fn aggregate(methods: &[MethodSpec], horizons: &[usize], metrics: &[MetricReport]) -> Vec<Aggregate> {
    let mut out = Vec::with_capacity(methods.len() * horizons.len());
    for m in methods {
        for &h in horizons {
            let cell: Vec<&MetricReport> = metrics.iter().filter(|r| r.method == m.id && r.horizon == h).collect();
            let aucs: Vec<f64> = cell.iter().filter_map(|r| r.auc).collect();
            out.push(Aggregate {
                method: m.id.clone(),
                horizon: h,
                mae: mean(cell.iter().filter_map(|r| r.mae)),
                rmse: mean(cell.iter().filter_map(|r| r.rmse)),
                r2: mean(cell.iter().filter_map(|r| r.r2)),
                auc: mean(aucs.iter().copied()),
                auc_folds: aucs.len(),
                missing_auc: cell.len() - aucs.len(),
                log_loss: mean(cell.iter().map(|r| r.log_loss)).unwrap_or(f64::NAN),
            });
        }
    }
    out
}

/// Relative AUC differences `(a - b) / b` across horizons, fed to the
/// correlated t-test.
fn compare(
    methods: &[MethodSpec],
    horizons: &[usize],
    aggregates: &[Aggregate],
    cv: &CvConfig,
) -> Result<Vec<BayesComparison>> {
    let auc: BTreeMap<(&str, usize), f64> = aggregates
        .iter()
        .filter_map(|a| a.auc.map(|v| ((a.method.as_str(), a.horizon), v)))
        .collect();
    let pairs: Vec<(&str, &str)> = match &cv.reference {
        Some(r) => methods.iter().filter(|m| m.id != *r).map(|m| (m.id.as_str(), r.as_str())).collect(),
        None => methods
            .iter()
            .enumerate()
            .flat_map(|(i, a)| methods[i + 1..].iter().map(move |b| (a.id.as_str(), b.id.as_str())))
            .collect(),
    };
    let rho = resample_correlation(cv.train_fraction, cv.test_fraction);
    let mut out = Vec::new();
    for (a, b) in pairs {
        let diffs: Vec<f64> = horizons
            .iter()
            .filter_map(|&h| match (auc.get(&(a, h)), auc.get(&(b, h))) {
                (Some(&x), Some(&y)) if y > 0.0 => Some((x - y) / y),
                _ => None,
            })
            .collect();
        if diffs.len() < 2 {
            log::warn!("skipping comparison {a} vs {b}: fewer than 2 horizons with defined AUC");
            continue;
        }
        let mut c = bayes_correlated_ttest(&diffs, rho, cv.rope_halfwidth)?;
        c.method_a = a.to_string();
        c.method_b = b.to_string();
        out.push(c);
    }
    Ok(out)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchmarkReport {
    /// Long format: one row per method, horizon, fold and metric. Undefined
    /// metrics have an empty value.
    pub fn write_metrics_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "horizon", "fold", "split", "metric", "value"])?;
        for r in &self.metrics {
            let values = [
                ("mae", r.mae),
                ("rmse", r.rmse),
                ("mape", r.mape),
                ("r2", r.r2),
                ("auc", r.auc),
                ("log_loss", Some(r.log_loss)),
            ];
            for (name, v) in values {
                w.write_record([
                    r.method.as_str(),
                    &r.horizon.to_string(),
                    &r.fold_index.to_string(),
                    &r.split_hash,
                    name,
                    &cell(v),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Folds, aggregates and comparisons as pretty-printed JSON.
    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            folds: &'a [FoldSummary],
            aggregates: &'a [Aggregate],
            comparisons: &'a [BayesComparison],
            missing_auc_cells: usize,
        }
        Ok(serde_json::to_string_pretty(&Summary {
            folds: &self.folds,
            aggregates: &self.aggregates,
            comparisons: &self.comparisons,
            missing_auc_cells: self.missing_auc_cells,
        })?)
    }

    pub fn aggregate(&self, method: &str, horizon: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method && a.horizon == horizon)
    }
}
