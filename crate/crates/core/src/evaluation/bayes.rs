//! Bayesian correlated t-test for comparing two methods over correlated
//! resamples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Posterior probabilities that the mean difference lies below, inside or
/// above the region of practical equivalence `[-rope, rope]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesComparison {
    pub method_a: String,
    pub method_b: String,
    pub p_left: f64,
    pub p_rope: f64,
    pub p_right: f64,
    pub rope_halfwidth: f64,
    pub mean_difference: f64,
    pub n: usize,
}

/// Correlation between overlapping resamples: `test / (train + test)`.
pub fn resample_correlation(train_fraction: f64, test_fraction: f64) -> f64 {
    test_fraction / (train_fraction + test_fraction)
}

/// Posterior of the mean of `diffs` under the correlated t-test: Student-t
/// with `n - 1` degrees of freedom, location `mean(diffs)` and scale
/// `sqrt((1/n + rho/(1-rho)) var(diffs))` with the unbiased variance. A
/// zero-variance sample is a point mass at its mean.
pub fn bayes_correlated_ttest(diffs: &[f64], rho: f64, rope_halfwidth: f64) -> Result<BayesComparison> {
    if diffs.len() < 2 {
        return Err(Error::Input(format!("correlated t-test needs at least 2 differences, got {}", diffs.len())));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Config(format!("correlation {rho} outside [0, 1)")));
    }
    if !(rope_halfwidth.is_finite() && rope_halfwidth >= 0.0) {
        return Err(Error::Config(format!("rope half-width {rope_halfwidth} must be finite and non-negative")));
    }
    if let Some(d) = diffs.iter().find(|d| !d.is_finite()) {
        return Err(Error::Input(format!("difference {d} is not finite")));
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = ((1.0 / n + rho / (1.0 - rho)) * var).sqrt();
    let r = rope_halfwidth;
    let (p_left, p_rope, p_right) = if scale > 0.0 {
        let t = StudentsT::new(mean, scale, n - 1.0)
            .map_err(|e| Error::Domain(format!("posterior Student-t: {e}")))?;
        let lo = t.cdf(-r);
        let hi = t.cdf(r);
        (lo, hi - lo, t.sf(r))
    } else if mean < -r {
        (1.0, 0.0, 0.0)
    } else if mean > r {
        (0.0, 0.0, 1.0)
    } else {
        (0.0, 1.0, 0.0)
    };
    Ok(BayesComparison {
        method_a: String::new(),
        method_b: String::new(),
        p_left,
        p_rope,
        p_right,
        rope_halfwidth,
        mean_difference: mean,
        n: diffs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_posteriors() {
        let c = bayes_correlated_ttest(&[0.0; 10], 0.2, 0.01).unwrap();
        assert_eq!((c.p_left, c.p_rope, c.p_right), (0.0, 1.0, 0.0));
        let c = bayes_correlated_ttest(&[-0.3; 4], 0.2, 0.01).unwrap();
        assert_eq!(c.p_left, 1.0);
        let d: Vec<f64> = (0..10).map(|i| 0.5 + if i % 2 == 0 { 1e-9 } else { -1e-9 }).collect();
        let c = bayes_correlated_ttest(&d, 0.2857, 0.01).unwrap();
        assert!((c.p_right - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(bayes_correlated_ttest(&[0.1], 0.2, 0.01), Err(Error::Input(_))));
        assert!(matches!(bayes_correlated_ttest(&[0.1, 0.2], 1.0, 0.01), Err(Error::Config(_))));
        assert!(matches!(bayes_correlated_ttest(&[0.1, f64::NAN], 0.2, 0.01), Err(Error::Input(_))));
    }

    #[test]
    fn rho_heuristic() {
        assert!((resample_correlation(0.5, 0.2) - 0.2 / 0.7).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn masses_sum_to_one_and_rope_widening_helps(
            diffs in prop::collection::vec(-0.2f64..0.2, 2..30),
            r1 in 0.0f64..0.1, extra in 0.0f64..0.1,
        ) {
            let a = bayes_correlated_ttest(&diffs, 0.28, r1).unwrap();
            let b = bayes_correlated_ttest(&diffs, 0.28, r1 + extra).unwrap();
            prop_assert!((a.p_left + a.p_rope + a.p_right - 1.0).abs() < 1e-9);
            prop_assert!(a.p_left >= 0.0 && a.p_rope >= 0.0 && a.p_right >= 0.0);
            prop_assert!(b.p_rope >= a.p_rope - 1e-15);
        }
    }
}
