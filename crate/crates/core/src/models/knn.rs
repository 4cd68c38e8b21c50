use serde::{Deserialize, Serialize};

use super::rows;
use super::scaler::Standardizer;
use super::spec::KnnWeights;
use crate::error::{Error, Result};

/// Brute-force k-nearest-neighbour regressor on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub scaler: Standardizer,
    pub k: usize,
    pub weights: KnnWeights,
    /// Standardized training rows, row-major.
    points: Vec<f64>,
    targets: Vec<f64>,
}

impl KnnModel {
    pub fn fit(
        features: &[f64],
        n_features: usize,
        y: &[f64],
        k: usize,
        weights: KnnWeights,
    ) -> Result<Self> {
        let n = y.len();
        if k == 0 || k > n {
            return Err(Error::Config(format!("knn needs 1 <= k <= n, got k={k}, n={n}")));
        }
        let scaler = Standardizer::fit(rows(features, n_features, n), n_features);
        let mut points = Vec::with_capacity(n * n_features);
        let mut buf = Vec::with_capacity(n_features);
        for row in rows(features, n_features, n) {
            scaler.transform_into(row, &mut buf);
            points.extend_from_slice(&buf);
        }
        Ok(Self {
            scaler,
            k,
            weights,
            points,
            targets: y.to_vec(),
        })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let q = self.scaler.transform(row);
        let p = q.len().max(1);
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks(p)
            .take(self.targets.len())
            .enumerate()
            .map(|(i, pt)| {
                let d2: f64 = pt.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        dist.sort_by(by_distance);

        match self.weights {
            KnnWeights::Uniform => {
                dist.iter().map(|&(_, i)| self.targets[i]).sum::<f64>() / dist.len() as f64
            }
            KnnWeights::Distance => {
                let exact: Vec<f64> = dist
                    .iter()
                    .filter(|(d2, _)| *d2 == 0.0)
                    .map(|&(_, i)| self.targets[i])
                    .collect();
                if !exact.is_empty() {
                    return exact.iter().sum::<f64>() / exact.len() as f64;
                }
                let (num, den) = dist.iter().fold((0.0, 0.0), |(num, den), &(d2, i)| {
                    let w = 1.0 / d2.sqrt();
                    (num + w * self.targets[i], den + w)
                });
                num / den
            }
        }
    }
}
