//! Synthetic minority oversampling.
//!
//! Each synthetic row is `x + u (x_nn - x)` with `x` drawn uniformly from the
//! minority class, `x_nn` drawn uniformly from the `k` nearest minority rows
//! of `x` (Euclidean, raw features, ties by index) and `u ~ U[0, 1)`. New rows
//! are appended until both classes have the same count. Original rows are
//! returned first and unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

/// Resampled design: row-major features and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub features: Vec<f64>,
    pub labels: Vec<bool>,
    /// Number of rows at the front that come from the input unchanged.
    pub original_rows: usize,
}

/// Indices of the `k` nearest rows to `rows[i]` among `rows`, excluding `i`.
pub fn nearest_neighbours(rows: &[&[f64]], i: usize, k: usize) -> Vec<usize> {
    let mut dist: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, r)| {
            let d2: f64 = r.iter().zip(rows[i]).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, j)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dist.into_iter().take(k).map(|(_, j)| j).collect()
}

pub fn smote_resample(
    features: &[f64],
    n_features: usize,
    labels: &[bool],
    cfg: &SmoteConfig,
) -> Result<Resampled> {
    let n = labels.len();
    if features.len() != n * n_features {
        return Err(Error::Input("feature matrix does not match label count".into()));
    }
    if cfg.k == 0 {
        return Err(Error::Config("SMOTE needs k >= 1".into()));
    }
    let positives = labels.iter().filter(|&&b| b).count();
    let minority_label = positives * 2 < n;
    let minority: Vec<usize> = (0..n).filter(|&i| labels[i] == minority_label).collect();
    let deficit = n - 2 * minority.len();
    let mut out = Resampled {
        features: features.to_vec(),
        labels: labels.to_vec(),
        original_rows: n,
    };
    if positives * 2 == n {
        return Ok(out);
    }
    if minority.len() < 2 {
        return Err(Error::Resampling(format!(
            "SMOTE needs at least 2 minority rows, found {}",
            minority.len()
        )));
    }

    let row = |i: usize| &features[i * n_features..(i + 1) * n_features];
    let minority_rows: Vec<&[f64]> = minority.iter().map(|&i| row(i)).collect();
    let k = cfg.k.min(minority.len() - 1);
    let neighbours: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| nearest_neighbours(&minority_rows, i, k))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    out.features.reserve(deficit * n_features);
    for _ in 0..deficit {
        let base = rng.random_range(0..minority.len());
        let nn = neighbours[base][rng.random_range(0..k)];
        let u: f64 = rng.random();
        let (x, y) = (minority_rows[base], minority_rows[nn]);
        out.features.extend(x.iter().zip(y).map(|(a, b)| a + u * (b - a)));
        out.labels.push(minority_label);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_minority_points_stay_on_segment() {
        let mut x = vec![0.0, 0.0, 2.0, 4.0];
        let mut labels = vec![true, true];
        for i in 0..10 {
            x.extend([10.0 + i as f64, -3.0]);
            labels.push(false);
        }
        let out = smote_resample(&x, 2, &labels, &SmoteConfig { k: 1, seed: 4 }).unwrap();
        assert_eq!(out.labels.iter().filter(|&&b| b).count(), 10);
        for r in out.features.chunks(2).skip(12) {
            // on the segment from (0,0) to (2,4): y = 2x, 0 <= x <= 2
            assert!((r[1] - 2.0 * r[0]).abs() < 1e-12);
            assert!((0.0..=2.0).contains(&r[0]));
        }
        assert_eq!(&out.features[..x.len()], x.as_slice());
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let labels = [true, false, true, false];
        let out = smote_resample(&x, 1, &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(out.features, x);
        assert_eq!(out.labels, labels);
    }

    #[test]
    fn single_minority_row_is_an_error() {
        let err = smote_resample(&[1.0, 2.0, 3.0], 1, &[true, false, false], &SmoteConfig::default());
        assert!(matches!(err, Err(Error::Resampling(_))));
    }

    #[test]
    fn minority_can_be_the_negative_class() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let labels = [true, true, true, true, true, true, false, false];
        let out = smote_resample(&x, 1, &labels, &SmoteConfig { k: 3, seed: 1 }).unwrap();
        assert_eq!(out.labels.len(), 12);
        assert_eq!(out.labels.iter().filter(|&&b| !b).count(), 6);
        assert!(out.features[8..].iter().all(|v| (6.0..=7.0).contains(v)));
    }
}
