//! Penalized least squares by cyclic coordinate descent.
//!
//! Minimizes, on standardized columns `z`,
//!
//! ```text
//! 1/(2n) ||y - b - Z w||^2 + lambda * (l1_ratio ||w||_1 + (1 - l1_ratio)/2 ||w||^2)
//! ```
//!
//! `l1_ratio = 1` is the LASSO and `l1_ratio = 0` ridge regression. The
//! intercept is unpenalized. Constant columns are left out of the sweep and
//! keep a zero coefficient.

use serde::{Deserialize, Serialize};

use super::rows;
use super::scaler::Standardizer;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100_000;
const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub scaler: Standardizer,
    pub intercept: f64,
    /// Coefficients on the standardized columns.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub l1_ratio: f64,
    pub sweeps: usize,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

impl LinearModel {
    /// `features` is row-major with `n_features` columns.
    pub fn fit(
        features: &[f64],
        n_features: usize,
        y: &[f64],
        lambda: f64,
        l1_ratio: f64,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyDataset("linear fit on zero rows".into()));
        }
        debug_assert_eq!(features.len(), n * n_features);
        let scaler = Standardizer::fit(rows(features, n_features, n), n_features);

        // column-major standardized design
        let mut columns = vec![vec![0.0; n]; n_features];
        let mut buf = Vec::with_capacity(n_features);
        for (i, row) in rows(features, n_features, n).enumerate() {
            scaler.transform_into(row, &mut buf);
            for (j, v) in buf.iter().enumerate() {
                columns[j][i] = *v;
            }
        }
        let nf = n as f64;
        let col_sq: Vec<f64> = columns
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf)
            .collect();
        let active: Vec<usize> = (0..n_features).filter(|&j| !scaler.constant[j]).collect();

        let l1 = lambda * l1_ratio;
        let l2 = lambda * (1.0 - l1_ratio);
        let mut intercept = y.iter().sum::<f64>() / nf;
        let mut residual: Vec<f64> = y.iter().map(|v| v - intercept).collect();
        let mut w = vec![0.0; n_features];
        let scale_y = (residual.iter().map(|r| r * r).sum::<f64>() / nf).sqrt().max(1e-300);

        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut max_delta: f64 = 0.0;
            for &j in &active {
                let col = &columns[j];
                let rho = col.iter().zip(&residual).map(|(z, r)| z * r).sum::<f64>() / nf
                    + w[j] * col_sq[j];
                let updated = soft_threshold(rho, l1) / (col_sq[j] + l2);
                let delta = updated - w[j];
                if delta != 0.0 {
                    for (r, z) in residual.iter_mut().zip(col) {
                        *r -= delta * z;
                    }
                    w[j] = updated;
                    max_delta = max_delta.max(delta.abs() * col_sq[j].sqrt());
                }
            }
            // columns are centered up to rounding; keep the intercept exact
            let shift = residual.iter().sum::<f64>() / nf;
            if shift != 0.0 {
                intercept += shift;
                residual.iter_mut().for_each(|r| *r -= shift);
            }
            if max_delta <= TOLERANCE * scale_y {
                break;
            }
            if sweeps >= MAX_SWEEPS {
                log::warn!("coordinate descent stopped after {sweeps} sweeps (delta {max_delta:e})");
                break;
            }
        }

        Ok(Self {
            scaler,
            intercept,
            coefficients: w,
            lambda,
            l1_ratio,
            sweeps,
        })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let z = self.scaler.transform(row);
        self.intercept + z.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `(intercept, coefficients)` on the raw feature scale.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        self.scaler.unscale(self.intercept, &self.coefficients)
    }
}
