//! Point-forecast and probabilistic scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::clip_probability;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub mae: f64,
    pub rmse: f64,
    /// `None` when a true value is zero.
    pub mape: Option<f64>,
    pub r2: f64,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Input(format!("length mismatch: {a} vs {b}")));
    }
    if a == 0 {
        return Err(Error::Input("metrics need at least one value".into()));
    }
    Ok(())
}

/// MAE, RMSE, MAPE (as a fraction) and R². With constant `y_true`, R² is 1
/// for a perfect forecast and 0 otherwise.
pub fn point_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<PointMetrics> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let (mut abs, mut sse, mut sst, mut pct) = (0.0, 0.0, 0.0, 0.0);
    let mut mape_defined = true;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        abs += e.abs();
        sse += e * e;
        sst += (t - mean) * (t - mean);
        if t == 0.0 {
            mape_defined = false;
        } else {
            pct += (e / t).abs();
        }
    }
    let r2 = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(PointMetrics {
        mae: abs / n,
        rmse: (sse / n).sqrt(),
        mape: mape_defined.then(|| pct / n),
        r2,
    })
}

/// Midranks (1-based) of `values`; ties share the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Area under the ROC curve via the Mann-Whitney statistic: the share of
/// positive/negative pairs ranked correctly, counting ties as one half.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), scores.len())?;
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Input(format!("score {s} is not a number")));
    }
    let n_pos = labels.iter().filter(|&&b| b).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both classes ({n_pos} positive, {n_neg} negative)"
        )));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &b)| b).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean binary cross-entropy with probabilities clipped to
/// `[1e-15, 1 - 1e-15]`.
pub fn log_loss(labels: &[bool], probabilities: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), probabilities.len())?;
    let total: f64 = labels
        .iter()
        .zip(probabilities)
        .map(|(&b, &p)| {
            let p = clip_probability(p);
            if b {
                -p.ln()
            } else {
                -(-p).ln_1p()
            }
        })
        .sum();
    Ok(total / labels.len() as f64)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("correlation of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    pearson(&midranks(x), &midranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn point_metric_examples() {
        let m = point_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.mae, m.rmse, m.mape, m.r2), (0.0, 0.0, Some(0.0), 1.0));
        let m = point_metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!(close(m.mae, 2.0 / 3.0));
        assert!(close(m.rmse, (2.0f64 / 3.0).sqrt()));
        assert!(close(m.mape.unwrap(), (1.0 + 0.0 + 1.0 / 3.0) / 3.0));
        assert!(close(m.r2, 0.0));
        let m = point_metrics(&[0.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(m.mape, None);
        assert!(close(m.mae, 0.5));
        assert_eq!(point_metrics(&[2.0, 2.0], &[2.0, 2.0]).unwrap().r2, 1.0);
        assert_eq!(point_metrics(&[2.0, 2.0], &[2.0, 3.0]).unwrap().r2, 0.0);
        assert!(matches!(point_metrics(&[1.0], &[]), Err(Error::Input(_))));
    }

    #[test]
    fn auc_examples() {
        let labels = [false, false, true, true];
        assert_eq!(roc_auc(&labels, &[0.1, 0.2, 0.3, 0.4]).unwrap(), 1.0);
        assert_eq!(roc_auc(&labels, &[0.4, 0.3, 0.2, 0.1]).unwrap(), 0.0);
        assert_eq!(roc_auc(&labels, &[0.5; 4]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[true, true], &[0.1, 0.2]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn log_loss_examples() {
        assert!(close(log_loss(&[true, false], &[0.5, 0.5]).unwrap(), std::f64::consts::LN_2));
        assert!(log_loss(&[true, false], &[1.0, 0.0]).unwrap() < 1e-12);
        let want = -(0.8f64.ln() + 0.6f64.ln()) / 2.0;
        assert!(close(log_loss(&[true, false], &[0.8, 0.4]).unwrap(), want));
        assert!((want - 0.366_984_6).abs() < 1e-6);
        assert!(matches!(log_loss(&[true], &[0.5, 0.5]), Err(Error::Input(_))));
    }

    #[test]
    fn correlations() {
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0));
        assert!(close(spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 8.0, 27.0, 64.0]).unwrap(), 1.0));
        assert!(close(spearman(&[1.0, 6.0, 12.0, 24.0], &[0.9, 0.8, 0.7, 0.6]).unwrap(), -1.0));
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::UndefinedMetric(_))));
    }

    fn pair_count(labels: &[bool], scores: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut pairs = 0.0;
        for (i, &bi) in labels.iter().enumerate() {
            for (j, &bj) in labels.iter().enumerate() {
                if bi && !bj {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        s += 1.0;
                    } else if scores[i] == scores[j] {
                        s += 0.5;
                    }
                }
            }
        }
        s / pairs
    }

    proptest! {
        #[test]
        fn auc_matches_pairs_and_ignores_monotone_maps(
            data in prop::collection::vec((any::<bool>(), 0u8..20), 2..200)
        ) {
            let labels: Vec<bool> = data.iter().map(|d| d.0).collect();
            let scores: Vec<f64> = data.iter().map(|d| d.1 as f64 / 7.0).collect();
            prop_assume!(labels.iter().any(|&b| b) && labels.iter().any(|&b| !b));
            let auc = roc_auc(&labels, &scores).unwrap();
            prop_assert!((auc - pair_count(&labels, &scores)).abs() < 1e-12);
            let exp: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            prop_assert!((auc - roc_auc(&labels, &exp).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn rmse_dominates_mae(pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..100)) {
            let (t, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m = point_metrics(&t, &p).unwrap();
            prop_assert!(m.rmse >= m.mae - 1e-12);
            prop_assert!(m.r2 <= 1.0);
            prop_assert!(m.mae >= 0.0);
        }

        #[test]
        fn log_loss_is_nonnegative(pairs in prop::collection::vec((any::<bool>(), 0.0f64..=1.0), 1..100)) {
            let (b, p): (Vec<bool>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert!(log_loss(&b, &p).unwrap() >= 0.0);
        }
    }
}
