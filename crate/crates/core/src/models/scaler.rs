use serde::{Deserialize, Serialize};

/// Per-column standardization fitted on training rows and replayed at
/// inference. Zero-variance columns keep a unit divisor and map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]>, n_features: usize) -> Self {
        let mut n = 0usize;
        let mut means = vec![0.0; n_features];
        let mut m2 = vec![0.0; n_features];
        for row in rows {
            n += 1;
            for j in 0..n_features {
                let delta = row[j] - means[j];
                means[j] += delta / n as f64;
                m2[j] += delta * (row[j] - means[j]);
            }
        }
        let mut scales = Vec::with_capacity(n_features);
        let mut constant = Vec::with_capacity(n_features);
        for j in 0..n_features {
            let sd = if n > 0 { (m2[j] / n as f64).sqrt() } else { 0.0 };
            let flat = !(sd > 1e-12 * means[j].abs().max(1.0));
            constant.push(flat);
            scales.push(if flat { 1.0 } else { sd });
        }
        Self { means, scales, constant }
    }

    pub fn transform_into(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            row.iter()
                .zip(&self.means)
                .zip(&self.scales)
                .zip(&self.constant)
                .map(|(((x, m), s), c)| if *c { 0.0 } else { (x - m) / s }),
        );
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(row.len());
        self.transform_into(row, &mut out);
        out
    }

    /// Maps coefficients fitted on standardized columns back to the raw
    /// feature scale, returning `(intercept, coefficients)`.
    pub fn unscale(&self, intercept: f64, coef: &[f64]) -> (f64, Vec<f64>) {
        let raw: Vec<f64> = coef.iter().zip(&self.scales).map(|(w, s)| w / s).collect();
        let shift: f64 = raw.iter().zip(&self.means).map(|(w, m)| w * m).sum();
        (intercept - shift, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_and_flags_constant_columns() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(rows.iter().map(Vec::as_slice), 2);
        assert_eq!(s.means, vec![2.0, 5.0]);
        assert_eq!(s.constant, vec![false, true]);
        assert_eq!(s.transform(&[3.0, 9.0]), vec![1.0, 0.0]);
    }
}
