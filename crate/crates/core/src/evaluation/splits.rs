//! Monte Carlo cross-validation splits for temporally ordered data.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub fold_index: usize,
    pub train_range: Range<usize>,
    /// Starts where `train_range` ends.
    pub test_range: Range<usize>,
}

impl FoldSpec {
    /// Index where training ends and testing begins.
    pub fn cut(&self) -> usize {
        self.train_range.end
    }
}

/// Block lengths `(train, test)` for `n` rows.
pub fn block_lengths(n: usize, train_fraction: f64, test_fraction: f64) -> Result<(usize, usize)> {
    let valid = |f: f64| f.is_finite() && f > 0.0 && f < 1.0;
    if !valid(train_fraction) || !valid(test_fraction) || train_fraction + test_fraction > 1.0 {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} and test fraction {test_fraction} must be in (0, 1) and sum to at most 1"
        )));
    }
    let train = (train_fraction * n as f64).round() as usize;
    let test = (test_fraction * n as f64).round() as usize;
    if train == 0 || test == 0 || train + test > n {
        return Err(Error::Config(format!(
            "{n} rows cannot hold a {train}-row training block and a {test}-row test block"
        )));
    }
    Ok((train, test))
}

/// `folds` independent splits. Each cut point is drawn uniformly from
/// `[train_len, n - test_len]`; the training block ends at the cut and the
/// test block starts there.
pub fn monte_carlo_splits(
    n: usize,
    folds: usize,
    train_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<FoldSpec>> {
    if folds == 0 {
        return Err(Error::Config("at least one fold is required".into()));
    }
    let (train, test) = block_lengths(n, train_fraction, test_fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..folds)
        .map(|fold_index| {
            let cut = rng.random_range(train..=n - test);
            FoldSpec {
                fold_index,
                train_range: cut - train..cut,
                test_range: cut..cut + test,
            }
        })
        .collect())
}

/// Hex SHA-256 over the fold's ranges, threshold and the dataset rows each
/// side actually uses. Methods evaluated on the same split share the hash.
pub fn split_hash(fold: &FoldSpec, tau: f64, train_origins: &[usize], test_origins: &[usize]) -> String {
    let mut h = Sha256::new();
    for v in [fold.fold_index, fold.train_range.start, fold.train_range.end, fold.test_range.start, fold.test_range.end] {
        h.update((v as u64).to_le_bytes());
    }
    h.update(tau.to_bits().to_le_bytes());
    for origins in [train_origins, test_origins] {
        h.update((origins.len() as u64).to_le_bytes());
        for &o in origins {
            h.update((o as u64).to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}
