//! CART trees grown on quantile-binned features.
//!
//! Each feature is reduced to at most `max_bins` ordered bins whose upper
//! edges are midpoints between distinct training values; when a column has
//! no more than `max_bins` distinct values every midpoint is a candidate and
//! the search is exact. Splits send `x <= threshold` to the left child.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Mean target (regression) or class-1 fraction (classification).
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// Column-major binned copy of a design matrix.
pub(crate) struct BinnedData {
    thresholds: Vec<Vec<f64>>,
    bins: Vec<Vec<u8>>,
}

impl BinnedData {
    pub(crate) fn new(features: &[f64], n_features: usize, n: usize, max_bins: usize) -> Self {
        let mut thresholds = Vec::with_capacity(n_features);
        let mut bins = Vec::with_capacity(n_features);
        for j in 0..n_features {
            let column: Vec<f64> = (0..n).map(|i| features[i * n_features + j]).collect();
            let edges = bin_edges(&column, max_bins);
            bins.push(
                column
                    .iter()
                    .map(|x| edges.partition_point(|t| t < x) as u8)
                    .collect(),
            );
            thresholds.push(edges);
        }
        Self { thresholds, bins }
    }

    pub(crate) fn n_features(&self) -> usize {
        self.thresholds.len()
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

fn bin_edges(column: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut uniques = sorted.clone();
    uniques.dedup();
    if uniques.len() <= max_bins {
        return uniques.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..max_bins)
        .filter_map(|b| {
            let v = sorted[b * n / max_bins];
            let next = uniques.partition_point(|u| *u <= v);
            uniques.get(next).map(|&u| midpoint(v, u))
        })
        .collect();
    edges.dedup();
    edges
}

#[derive(Clone, Copy)]
pub(crate) enum Targets<'a> {
    Regression(&'a [f64]),
    Classification(&'a [bool]),
}

impl Targets<'_> {
    pub(crate) fn len(&self) -> usize {
        match self {
            Targets::Regression(y) => y.len(),
            Targets::Classification(b) => b.len(),
        }
    }

    pub(crate) fn value(&self, i: usize) -> f64 {
        match self {
            Targets::Regression(y) => y[i],
            Targets::Classification(b) => f64::from(u8::from(b[i])),
        }
    }

    pub(crate) fn is_classification(&self) -> bool {
        matches!(self, Targets::Classification(_))
    }
}

pub(crate) struct TreeBuilder<'a> {
    pub data: &'a BinnedData,
    pub targets: Targets<'a>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub candidates_per_split: usize,
}

struct NodeStats {
    count: usize,
    sum: f64,
    min: f64,
    max: f64,
}

impl TreeBuilder<'_> {
    pub(crate) fn grow(&self, samples: &mut [usize], rng: &mut ChaCha8Rng) -> Node {
        let mut features: Vec<usize> = (0..self.data.n_features()).collect();
        self.build(samples, 0, &mut features, rng)
    }

    fn stats(&self, samples: &[usize]) -> NodeStats {
        samples.iter().fold(
            NodeStats { count: 0, sum: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY },
            |mut s, &i| {
                let v = self.targets.value(i);
                s.count += 1;
                s.sum += v;
                s.min = s.min.min(v);
                s.max = s.max.max(v);
                s
            },
        )
    }

    /// Sum of squares within children up to a constant: larger is better.
    fn score(&self, count: f64, sum: f64) -> f64 {
        if self.targets.is_classification() {
            let neg = count - sum;
            (sum * sum + neg * neg) / count
        } else {
            sum * sum / count
        }
    }

    fn build(
        &self,
        samples: &mut [usize],
        depth: usize,
        features: &mut [usize],
        rng: &mut ChaCha8Rng,
    ) -> Node {
        let stats = self.stats(samples);
        let leaf = Node::Leaf {
            value: (stats.sum / stats.count as f64).clamp(stats.min, stats.max),
            samples: stats.count,
        };
        if self.max_depth.is_some_and(|d| depth >= d)
            || stats.count < 2 * self.min_samples_leaf
            || stats.min == stats.max
        {
            return leaf;
        }

        // partial Fisher-Yates: the first `m` entries become the candidates
        let m = self.candidates_per_split.min(features.len());
        for k in 0..m {
            let pick = rng.random_range(k..features.len());
            features.swap(k, pick);
        }

        let parent = self.score(stats.count as f64, stats.sum);
        let mut best: Option<(f64, usize, usize)> = None;
        let mut counts = [0usize; 256];
        let mut sums = [0.0f64; 256];
        for &j in &features[..m] {
            let edges = &self.data.thresholds[j];
            if edges.is_empty() {
                continue;
            }
            let nb = edges.len() + 1;
            counts[..nb].fill(0);
            sums[..nb].fill(0.0);
            let column = &self.data.bins[j];
            for &i in samples.iter() {
                let b = column[i] as usize;
                counts[b] += 1;
                sums[b] += self.targets.value(i);
            }
            let (mut n_left, mut s_left) = (0usize, 0.0);
            for b in 0..nb - 1 {
                n_left += counts[b];
                s_left += sums[b];
                let n_right = stats.count - n_left;
                if n_left < self.min_samples_leaf {
                    continue;
                }
                if n_right < self.min_samples_leaf {
                    break;
                }
                let gain = self.score(n_left as f64, s_left)
                    + self.score(n_right as f64, stats.sum - s_left)
                    - parent;
                if gain > 1e-12 * parent.abs().max(1e-300) && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, j, b));
                }
            }
        }

        let Some((_, feature, bin)) = best else {
            return leaf;
        };
        let column = &self.data.bins[feature];
        let mut mid = 0;
        for k in 0..samples.len() {
            if column[samples[k]] as usize <= bin {
                samples.swap(k, mid);
                mid += 1;
            }
        }
        let (left_samples, right_samples) = samples.split_at_mut(mid);
        let left = self.build(left_samples, depth + 1, features, rng);
        let right = self.build(right_samples, depth + 1, features, rng);
        Node::Split {
            feature,
            threshold: self.data.thresholds[feature][bin],
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}
