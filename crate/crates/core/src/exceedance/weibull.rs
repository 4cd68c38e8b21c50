//! Two-parameter Weibull distribution with a location shift, and its
//! maximum-likelihood fit.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-10;
const MIN_SAMPLES: usize = 10;

/// A continuous distribution usable for the forecast-to-probability
/// conversion. The distribution is shifted so its support starts at
/// `location`.
pub trait ShiftedDistribution {
    fn cdf(&self, x: f64, location: f64) -> f64;

    /// `1 - cdf`, computed without cancellation.
    fn survival(&self, x: f64, location: f64) -> f64 {
        1.0 - self.cdf(x, location)
    }

    /// Mean of the unshifted distribution.
    fn mean_offset(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        let p = Self { shape, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0 && self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Domain(format!(
                "Weibull parameters must be positive and finite, got shape {} scale {}",
                self.shape, self.scale
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// Inverse of [`weibull_cdf`] for `q` in `[0, 1)`.
    pub fn quantile(&self, q: f64, location: f64) -> f64 {
        location + self.scale * (-(-q).ln_1p()).powf(1.0 / self.shape)
    }

    /// Probability density at `x`.
    pub fn pdf(&self, x: f64, location: f64) -> f64 {
        if x <= location {
            return 0.0;
        }
        let z = (x - location) / self.scale;
        self.shape / self.scale * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    /// Partial derivatives of the log-likelihood in `(shape, scale)`.
    pub fn log_likelihood_gradient(&self, values: &[f64]) -> (f64, f64) {
        let (a, b) = (self.shape, self.scale);
        let n = values.len() as f64;
        let (mut sum_ln, mut sum_za, mut sum_za_ln) = (0.0, 0.0, 0.0);
        for &x in values {
            let lz = (x / b).ln();
            let za = (a * lz).exp();
            sum_ln += x.ln();
            sum_za += za;
            sum_za_ln += za * lz;
        }
        let d_shape = n / a - n * b.ln() + sum_ln - sum_za_ln;
        let d_scale = a / b * (sum_za - n);
        (d_shape, d_scale)
    }
}

impl ShiftedDistribution for WeibullParams {
    fn cdf(&self, x: f64, location: f64) -> f64 {
        weibull_cdf(x, self, location)
    }

    fn survival(&self, x: f64, location: f64) -> f64 {
        if x <= location {
            return 1.0;
        }
        (-((x - location) / self.scale).powf(self.shape)).exp()
    }

    fn mean_offset(&self) -> f64 {
        self.mean()
    }
}

/// `F(x) = 1 - exp(-((x - location) / scale)^shape)` for `x > location`,
/// otherwise 0.
pub fn weibull_cdf(x: f64, params: &WeibullParams, location: f64) -> f64 {
    if x <= location {
        return 0.0;
    }
    let z = (x - location) / params.scale;
    -(-z.powf(params.shape)).exp_m1()
}

/// Profile-likelihood shape equation on mean-scaled data. Returns
/// `(g, g')`; `g` is strictly decreasing in `shape`.
fn profile(shape: f64, logs: &[f64], mean_log: f64) -> (f64, f64) {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &l in logs {
        let w = (shape * l).exp();
        s0 += w;
        s1 += w * l;
        s2 += w * l * l;
    }
    let ratio = s1 / s0;
    let g = 1.0 / shape + mean_log - ratio;
    let dg = -1.0 / (shape * shape) - (s2 / s0 - ratio * ratio);
    (g, dg)
}

/// Maximum-likelihood Weibull fit.
///
/// Newton on the profile shape equation, safeguarded by bisection and
/// started from the log-moment estimate `pi / sqrt(6 var(ln x))`; the scale
/// follows in closed form.
pub fn fit_weibull_mle(values: &[f64]) -> Result<WeibullParams> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("Weibull fit needs positive finite values, got {v}")));
    }
    if values.len() < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "Weibull fit needs at least {MIN_SAMPLES} values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let logs: Vec<f64> = values.iter().map(|v| (v / mean).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / n;
    let var_log = logs.iter().map(|l| (l - mean_log).powi(2)).sum::<f64>() / n;
    if var_log <= f64::EPSILON * f64::EPSILON {
        return Err(Error::NonConvergence("Weibull fit on all-equal values".into()));
    }

    let mut shape = std::f64::consts::PI / (6.0 * var_log).sqrt();
    // bracket the root: g > 0 below it, g < 0 above it
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let (g, dg) = profile(shape, &logs, mean_log);
        if g > 0.0 {
            lo = shape;
        } else {
            hi = shape;
        }
        let mut next = shape - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * shape };
        }
        let step = (next - shape).abs();
        shape = next;
        if step <= TOLERANCE * shape {
            converged = true;
            break;
        }
    }
    if !converged || !shape.is_finite() {
        return Err(Error::NonConvergence(format!(
            "Weibull shape did not converge in {MAX_ITERATIONS} iterations"
        )));
    }
    let s0 = logs.iter().map(|l| (shape * l).exp()).sum::<f64>() / n;
    let scale = mean * s0.powf(1.0 / shape);
    WeibullParams::new(shape, scale)
        .map_err(|e| Error::NonConvergence(format!("Weibull fit produced invalid parameters: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, Weibull};

    fn draws(shape: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Weibull::new(scale, shape).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn recovers_generator_parameters() {
        let x = draws(1.5, 2.0, 10_000, 11);
        let p = fit_weibull_mle(&x).unwrap();
        assert!(rel(p.shape, 1.5) < 0.05, "{p:?}");
        assert!(rel(p.scale, 2.0) < 0.05, "{p:?}");
    }

    #[test]
    fn exponential_has_unit_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = Exp::new(0.7).unwrap();
        let x: Vec<f64> = (0..10_000).map(|_| d.sample(&mut rng)).collect();
        let p = fit_weibull_mle(&x).unwrap();
        assert!((0.95..=1.05).contains(&p.shape), "{p:?}");
    }

    #[test]
    fn solution_zeroes_the_gradient() {
        for (shape, scale, seed) in [(0.6, 0.3, 1), (1.5, 2.0, 2), (4.0, 150.0, 3)] {
            let x = draws(shape, scale, 2_000, seed);
            let p = fit_weibull_mle(&x).unwrap();
            let (ga, gb) = p.log_likelihood_gradient(&x);
            // per-observation gradient, with the scale derivative in units of the scale
            let n = x.len() as f64;
            assert!((ga / n).abs() < 1e-8, "{ga}");
            assert!((gb * p.scale / n).abs() < 1e-8, "{gb}");
        }
    }

    #[test]
    fn refit_contracts_toward_truth() {
        let first = fit_weibull_mle(&draws(2.2, 0.8, 10_000, 21)).unwrap();
        let again = fit_weibull_mle(&draws(first.shape, first.scale, 10_000, 22)).unwrap();
        assert!(rel(again.shape, first.shape) < 0.05);
        assert!(rel(again.scale, first.scale) < 0.05);
    }

    #[test]
    fn rejects_bad_input() {
        let mut x = draws(1.5, 2.0, 20, 3);
        x[4] = 0.0;
        assert!(matches!(fit_weibull_mle(&x), Err(Error::Domain(_))));
        assert!(matches!(fit_weibull_mle(&[1.0; 9]), Err(Error::Domain(_))));
        assert!(matches!(fit_weibull_mle(&[3.0; 50]), Err(Error::NonConvergence(_))));
        assert!(WeibullParams::new(0.0, 1.0).is_err());
        assert!(WeibullParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn analytic_values() {
        let e1 = 1.0 - (-1.0f64).exp();
        let p = WeibullParams::new(1.0, 2.5).unwrap();
        assert!((weibull_cdf(0.7 + 2.5, &p, 0.7) - e1).abs() < 1e-15);
        assert_eq!(weibull_cdf(0.7, &p, 0.7), 0.0);
        assert_eq!(weibull_cdf(-3.0, &p, 0.7), 0.0);
        assert_eq!(weibull_cdf(1e6, &p, 0.7), 1.0);
        let q = WeibullParams::new(2.0, 2.0).unwrap();
        assert!((weibull_cdf(3.0, &q, 1.0) - 0.632_120_558_828_557_7).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_cdf() {
        let q = WeibullParams::new(2.0, 2.0).unwrap();
        // composite Simpson's rule on the density over [loc, x]
        let (a, b, m) = (1.0, 3.0, 2000);
        let h = (b - a) / m as f64;
        let mut s = q.pdf(a, 1.0) + q.pdf(b, 1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * q.pdf(a + i as f64 * h, 1.0);
        }
        let integral = s * h / 3.0;
        assert!((integral - weibull_cdf(3.0, &q, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn quantile_round_trip() {
        let p = WeibullParams::new(0.45, 0.2).unwrap();
        for i in 1..=98 {
            let u = 0.01 + 0.01 * i as f64 * 0.999;
            let x = p.quantile(u, -0.3);
            assert!((weibull_cdf(x, &p, -0.3) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_matches_gamma() {
        let p = WeibullParams::new(1.0, 3.0).unwrap();
        assert!((p.mean() - 3.0).abs() < 1e-12);
        let p = WeibullParams::new(2.0, 1.0).unwrap();
        assert!((p.mean() - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }
}
