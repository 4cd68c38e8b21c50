use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use exceed_core::dataset::{embed, feature_row, generate_synthetic, EmbeddingConfig, SyntheticConfig, ThresholdSpec};
use exceed_core::exceedance::{exceedance_from_forecast, ExceedanceConfig, LocationMode};
use exceed_core::models::ModelDocument;

const CONFIG: &str = r#"{
  "input": {"source": "synthetic", "length": 2500, "seed": 21},
  "embedding": {"lags": 5, "horizons": [1, 4], "target_channel": "swh"},
  "cv": {"folds": 2, "seed": 21},
  "methods": [
    {"id": "rfr_cdf", "probability": "cdf",
     "estimator": {"kind": "single", "model": {"family": "tree_ensemble_regressor", "trees": 10, "seed": 21}}},
    {"id": "lasso_cdf", "probability": "cdf",
     "estimator": {"kind": "single", "model": {"family": "linear_lasso", "lambda": 0.001}}},
    {"id": "lr", "probability": "classifier",
     "estimator": {"kind": "single", "model": {"family": "logistic"}}}
  ],
  "output_dir": "out"
}"#;

fn exceed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exceed")).args(args).current_dir(dir).output().unwrap()
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = exceed(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn workspace(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    dir
}

#[test]
fn missing_csv_exits_with_status_2() {
    let dir = workspace(
        r#"{"input": {"source": "csv", "path": "nope.csv", "target": "swh"},
            "embedding": {"horizons": [1], "target_channel": "swh"}}"#,
    );
    let out = exceed(dir.path(), &["prepare", "--config", "config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn train_before_prepare_and_unknown_method_are_config_errors() {
    let dir = workspace(CONFIG);
    assert_eq!(exceed(dir.path(), &["train", "--config", "config.json"]).status.code(), Some(2));
    ok_json(dir.path(), &["prepare", "--config", "config.json"]);
    let out = exceed(dir.path(), &["train", "--config", "config.json", "--method", "gbm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_class_classifier_exits_with_status_3() {
    let config = CONFIG.replace(r#""output_dir""#, r#""threshold": {"mode": "fixed", "value": 1000.0}, "output_dir""#);
    let dir = workspace(&config);
    ok_json(dir.path(), &["prepare", "--config", "config.json"]);
    let out = exceed(dir.path(), &["train", "--config", "config.json", "--method", "lr"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn prepared_row_count_matches_embed_and_filter_oracle() {
    let dir = workspace(CONFIG);
    let summary = ok_json(dir.path(), &["prepare", "--config", "config.json"]);

    let frame = generate_synthetic(&SyntheticConfig { length: 2500, seed: 21, ..SyntheticConfig::default() }).unwrap();
    let emb = EmbeddingConfig { include_day_of_year: true, ..EmbeddingConfig::new(5, vec![1, 4], "swh") };
    let ds = embed(&frame, &emb, &ThresholdSpec::default()).unwrap();
    // linear-interpolation 99th percentile of the lag-1 target column
    let lag1 = ds.feature_names().iter().position(|n| n == "swh_lag1").unwrap();
    let mut history: Vec<f64> = ds.rows().map(|r| r[lag1]).collect();
    history.sort_by(f64::total_cmp);
    let h = 0.99 * (history.len() - 1) as f64;
    let lo = h.floor() as usize;
    let tau = history[lo] + (h - lo as f64) * (history[lo + 1] - history[lo]);
    let lag_cols: Vec<usize> = (0..ds.n_features()).filter(|&j| ds.feature_names()[j].starts_with("swh_lag")).collect();
    let kept = ds.rows().filter(|r| lag_cols.iter().all(|&j| r[j] < tau)).count();

    assert_eq!(summary["rows"].as_u64().unwrap() as usize, kept);
    assert_eq!(summary["rows_embedded"].as_u64().unwrap() as usize, ds.len());
    assert!((summary["tau"].as_f64().unwrap() - tau).abs() < 1e-12);
}

#[test]
fn forecast_matches_library_and_curve_validates_order() {
    let dir = workspace(CONFIG);
    ok_json(dir.path(), &["prepare", "--config", "config.json"]);
    ok_json(dir.path(), &["train", "--config", "config.json", "--method", "lasso_cdf"]);
    let first = exceed(dir.path(), &["forecast", "--config", "config.json", "--method", "lasso_cdf", "--at", "1800"]);
    let again = exceed(dir.path(), &["forecast", "--config", "config.json", "--method", "lasso_cdf", "--at", "1800"]);
    assert_eq!(first.stdout, again.stdout);
    let records: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 2);

    let frame = generate_synthetic(&SyntheticConfig { length: 2500, seed: 21, ..SyntheticConfig::default() }).unwrap();
    let emb = EmbeddingConfig { include_day_of_year: true, ..EmbeddingConfig::new(5, vec![1, 4], "swh") };
    let row = feature_row(&frame, &emb, 1800).unwrap();
    for record in records.as_array().unwrap() {
        let h = record["horizon"].as_u64().unwrap();
        let doc = ModelDocument::load(dir.path().join(format!("out/models/lasso_cdf_h{h}.json"))).unwrap();
        let y_hat = doc.model.forecaster().unwrap().predict(&row).unwrap();
        let cfg = ExceedanceConfig::new(LocationMode::Literal, doc.tau).unwrap();
        let p = exceedance_from_forecast(y_hat, &cfg, doc.weibull.as_ref().unwrap()).p;
        assert_eq!(record["y_hat"].as_f64().unwrap(), y_hat);
        assert_eq!(record["p"].as_f64().unwrap(), p);
        assert_eq!(record["source"], "cdf");
    }

    let curve = ok_json(
        dir.path(),
        &["forecast", "--config", "config.json", "--method", "lasso_cdf", "--at", "latest", "--curve", "1,2,3"],
    );
    let path = dir.path().join(curve[0]["curve"].as_str().unwrap());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("tau,probability\n"));
    let unsorted = exceed(dir.path(), &["forecast", "--config", "config.json", "--method", "lasso_cdf", "--curve", "2,1"]);
    assert!(!unsorted.status.success());
}

#[test]
fn evaluate_writes_one_row_per_cell_and_metric() {
    let config = CONFIG.replace(r#""output_dir""#, r#""threshold": {"mode": "percentile", "percentile": 95.0}, "output_dir""#);
    let dir = workspace(&config);
    let summary = ok_json(dir.path(), &["evaluate", "--config", "config.json"]);
    assert_eq!(summary["cells"], 2 * 3 * 2);
    let text = std::fs::read_to_string(dir.path().join("out/metrics.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 3 * 2 * 6);
    for r in rows.iter().filter(|r| &r[4] == "auc" && !r[5].is_empty()) {
        let v: f64 = r[5].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["comparisons"].as_array().unwrap().len(), 3);
}

#[test]
fn overrides_change_outputs() {
    let dir = workspace(CONFIG);
    let a = ok_json(dir.path(), &["prepare", "--config", "config.json", "--out", "a"]);
    let b = ok_json(dir.path(), &["prepare", "--config", "config.json", "--out", "b", "--seed", "22"]);
    assert_ne!(a["tau"], b["tau"]);
    let c = ok_json(dir.path(), &["prepare", "--config", "config.json", "--out", "c", "--horizons", "2"]);
    assert_eq!(c["horizons"].as_array().unwrap().len(), 1);
    let synth = ok_json(dir.path(), &["synth", "--config", "config.json", "--out", "s"]);
    assert_eq!(synth["rows"], 2500);
}
