//! L2-regularized logistic regression by damped Newton iterations.
//!
//! Minimizes the mean negative log-likelihood plus `l2/2 ||w||^2` on
//! standardized columns; the intercept is unpenalized. With `l2 = 0` on
//! separable data the optimum is at infinity: the weights grow until the
//! mean-loss gradient falls under tolerance or the iteration cap is hit, and
//! only the latter is flagged as not converged.

use serde::{Deserialize, Serialize};

use super::linalg::cholesky_solve;
use super::rows;
use super::scaler::Standardizer;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const GRADIENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub scaler: Standardizer,
    pub intercept: f64,
    /// Coefficients on the standardized columns.
    pub coefficients: Vec<f64>,
    pub l2: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

struct Problem {
    /// Standardized active columns, row-major with a leading 1 for the intercept.
    design: Vec<f64>,
    dim: usize,
    labels: Vec<f64>,
    l2: f64,
}

impl Problem {
    fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.design.chunks(self.dim).zip(self.labels.iter().copied())
    }

    fn eta(row: &[f64], theta: &[f64]) -> f64 {
        row.iter().zip(theta).map(|(a, b)| a * b).sum()
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        let n = self.labels.len() as f64;
        let data: f64 = self
            .rows()
            .map(|(row, y)| {
                let eta = Self::eta(row, theta);
                softplus(eta) - y * eta
            })
            .sum::<f64>()
            / n;
        data + 0.5 * self.l2 * theta[1..].iter().map(|w| w * w).sum::<f64>()
    }

    fn gradient_hessian(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let n = self.labels.len() as f64;
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d * d];
        for (row, y) in self.rows() {
            let p = sigmoid(Self::eta(row, theta));
            let r = p - y;
            let w = p * (1.0 - p);
            for a in 0..d {
                g[a] += r * row[a];
                let wa = w * row[a];
                for b in 0..=a {
                    h[a * d + b] += wa * row[b];
                }
            }
        }
        for a in 0..d {
            g[a] /= n;
            for b in 0..=a {
                h[a * d + b] /= n;
                h[b * d + a] = h[a * d + b];
            }
        }
        for a in 1..d {
            g[a] += self.l2 * theta[a];
            h[a * d + a] += self.l2;
        }
        (g, h)
    }
}

impl LogisticModel {
    pub fn fit(features: &[f64], n_features: usize, labels: &[bool], l2: f64) -> Result<Self> {
        let n = labels.len();
        let positives = labels.iter().filter(|&&b| b).count();
        if positives == 0 || positives == n {
            return Err(Error::DegenerateTarget(format!(
                "logistic regression needs both classes ({positives} of {n} positive)"
            )));
        }
        let scaler = Standardizer::fit(rows(features, n_features, n), n_features);
        let active: Vec<usize> = (0..n_features).filter(|&j| !scaler.constant[j]).collect();
        let dim = active.len() + 1;
        let mut design = Vec::with_capacity(n * dim);
        let mut buf = Vec::with_capacity(n_features);
        for row in rows(features, n_features, n) {
            scaler.transform_into(row, &mut buf);
            design.push(1.0);
            design.extend(active.iter().map(|&j| buf[j]));
        }
        let problem = Problem {
            design,
            dim,
            labels: labels.iter().map(|&b| f64::from(u8::from(b))).collect(),
            l2,
        };

        let prevalence = positives as f64 / n as f64;
        let mut theta = vec![0.0; dim];
        theta[0] = (prevalence / (1.0 - prevalence)).ln();
        let mut loss = problem.loss(&theta);
        let mut converged = false;
        let mut iterations = 0;
        let mut gradient_norm = f64::INFINITY;
        while iterations < MAX_ITERATIONS {
            let (g, mut h) = problem.gradient_hessian(&theta);
            gradient_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gradient_norm < GRADIENT_TOLERANCE {
                converged = true;
                break;
            }
            iterations += 1;
            let mut jitter = 1e-12;
            let step = loop {
                if let Some(step) = cholesky_solve(&h, &g) {
                    break step;
                }
                for a in 0..dim {
                    h[a * dim + a] += jitter;
                }
                jitter *= 10.0;
                if jitter > 1e6 {
                    return Err(Error::NonConvergence("logistic Hessian is singular".into()));
                }
            };
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            if slope <= 1e-12 * (1.0 + loss.abs()) {
                // predicted decrease is below the rounding noise of the loss:
                // inside the quadratic region, so take the full step
                for (a, s) in theta.iter_mut().zip(&step) {
                    *a -= s;
                }
                loss = problem.loss(&theta);
                continue;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let candidate: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let candidate_loss = problem.loss(&candidate);
                if candidate_loss <= loss - 1e-4 * t * slope {
                    theta = candidate;
                    loss = candidate_loss;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no further decrease is representable in floating point
                converged = gradient_norm < 1e-6;
                break;
            }
        }
        if !converged {
            log::warn!(
                "logistic regression stopped after {iterations} iterations with gradient norm {gradient_norm:e}"
            );
        }

        let mut coefficients = vec![0.0; n_features];
        for (k, &j) in active.iter().enumerate() {
            coefficients[j] = theta[k + 1];
        }
        Ok(Self {
            scaler,
            intercept: theta[0],
            coefficients,
            l2,
            converged,
            iterations,
            gradient_norm,
        })
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let z = self.scaler.transform(row);
        sigmoid(self.intercept + z.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_one_half() {
        let model = LogisticModel {
            scaler: Standardizer { means: vec![0.0; 2], scales: vec![1.0; 2], constant: vec![false; 2] },
            intercept: 0.0,
            coefficients: vec![0.0; 2],
            l2: 0.0,
            converged: true,
            iterations: 0,
            gradient_norm: 0.0,
        };
        assert_eq!(model.predict_proba(&[3.0, -7.0]), 0.5);
    }

    #[test]
    fn intercept_only_recovers_prevalence() {
        let labels: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let m = LogisticModel::fit(&[], 0, &labels, 0.0).unwrap();
        assert!((m.predict_proba(&[]) - 0.3).abs() < 1e-6);
        assert!(m.converged);
    }

    #[test]
    fn single_class_rejected() {
        let err = LogisticModel::fit(&[1.0, 2.0], 1, &[false, false], 1e-3).unwrap_err();
        assert!(matches!(err, Error::DegenerateTarget(_)));
    }

    #[test]
    fn separable_without_penalty_diverges_and_penalty_bounds_weights() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let labels = [false, false, true, true];
        let m = LogisticModel::fit(&x, 1, &labels, 0.0).unwrap();
        assert!(m.predict_proba(&[3.0]) > 0.99);
        let penalized = LogisticModel::fit(&x, 1, &labels, 1e-2).unwrap();
        assert!(penalized.converged);
        assert!(m.coefficients[0] > 5.0 * penalized.coefficients[0]);
    }

    #[test]
    fn noisy_problem_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..300 {
            let a: f64 = rng.random::<f64>() * 4.0 - 2.0;
            let b: f64 = rng.random::<f64>() * 4.0 - 2.0;
            x.extend([a, b]);
            labels.push(rng.random::<f64>() < sigmoid(1.5 * a - b));
        }
        let m = LogisticModel::fit(&x, 2, &labels, 1e-3).unwrap();
        assert!(m.converged);
        assert!(m.gradient_norm < 1e-6);
        assert!(m.coefficients[0] > 0.0 && m.coefficients[1] < 0.0);
    }
}
