//! Random forests: bootstrap-sampled, feature-subsampled CART trees.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ForestParams, ForestProbability};
use super::tree::{BinnedData, Node, Targets, TreeBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub classification: bool,
    /// Smallest and largest training target; forecasts never leave it.
    pub target_range: [f64; 2],
    pub trees: Vec<Node>,
}

impl ForestModel {
    pub fn fit_regressor(features: &[f64], n_features: usize, y: &[f64], params: &ForestParams) -> Result<Self> {
        Self::fit(features, n_features, Targets::Regression(y), params)
    }

    pub fn fit_classifier(
        features: &[f64],
        n_features: usize,
        labels: &[bool],
        params: &ForestParams,
    ) -> Result<Self> {
        let positives = labels.iter().filter(|&&b| b).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::DegenerateTarget(format!(
                "classification forest needs both classes ({positives} of {} positive)",
                labels.len()
            )));
        }
        Self::fit(features, n_features, Targets::Classification(labels), params)
    }

    fn fit(features: &[f64], n_features: usize, targets: Targets<'_>, params: &ForestParams) -> Result<Self> {
        let n = targets.len();
        if n == 0 {
            return Err(Error::EmptyDataset("forest fit on zero rows".into()));
        }
        if params.trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        let target_range = (0..n).fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], i| {
            let v = targets.value(i);
            [lo.min(v), hi.max(v)]
        });
        let data = BinnedData::new(features, n_features, n, params.max_bins);
        let candidates = ((params.feature_fraction * n_features as f64).ceil() as usize).clamp(1, n_features.max(1));
        let builder = TreeBuilder {
            data: &data,
            targets: targets,
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            candidates_per_split: candidates,
        };
        let mut master = ChaCha8Rng::seed_from_u64(params.seed);
        let seeds: Vec<u64> = (0..params.trees).map(|_| master.next_u64()).collect();
        let trees = seeds
            .into_par_iter()
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                builder.grow(&mut samples, &mut rng)
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            classification: targets.is_classification(),
            target_range,
            trees,
        })
    }

    /// One output per tree, in tree order.
    pub fn tree_outputs(&self, row: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(row)).collect()
    }

    /// Mean of the tree outputs (regression).
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mean = self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64;
        mean.clamp(self.target_range[0], self.target_range[1])
    }

    /// Class-1 probability (classification).
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let m = self.trees.len() as f64;
        match self.params.probability {
            ForestProbability::Vote => {
                self.trees.iter().filter(|t| t.predict(row) > 0.5).count() as f64 / m
            }
            ForestProbability::LeafMean => self.predict(row),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(trees: usize) -> ForestParams {
        ForestParams { trees, feature_fraction: 1.0, seed: 3, ..Default::default() }
    }

    #[test]
    fn depth_zero_single_tree_predicts_mean() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 1.0, 2.0, 6.0];
        let p = ForestParams { max_depth: Some(0), bootstrap: false, ..params(1) };
        let f = ForestModel::fit_regressor(&x, 1, &y, &p).unwrap();
        for q in [0.0, 2.5, 10.0] {
            assert_eq!(f.predict(&[q]), 2.5);
        }
    }

    #[test]
    fn separable_points_are_classified_exactly() {
        // 16 points on a 4x4 grid, class 1 when x0 + x1 > 3
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                x.extend([a as f64, b as f64]);
                labels.push(a + b > 3);
            }
        }
        let f = ForestModel::fit_classifier(&x, 2, &labels, &params(50)).unwrap();
        for (row, label) in x.chunks(2).zip(&labels) {
            assert_eq!(f.predict_proba(row) > 0.5, *label, "row {row:?}");
        }
    }

    #[test]
    fn deterministic_and_bounded() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64).collect();
        let y: Vec<f64> = x.chunks(2).map(|r| (r[0] - r[1]).abs().sqrt()).collect();
        let p = ForestParams { feature_fraction: 0.5, ..params(20) };
        let a = ForestModel::fit_regressor(&x, 2, &y, &p).unwrap();
        let b = ForestModel::fit_regressor(&x, 2, &y, &p).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(*v), h.max(*v)));
        for q in [[-50.0, 3.0], [10.0, 90.0], [1e6, -1e6]] {
            let v = a.predict(&q);
            assert!(v >= lo && v <= hi, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let err = ForestModel::fit_classifier(&[1.0, 2.0], 1, &[true, true], &params(2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateTarget(_)));
    }
}
