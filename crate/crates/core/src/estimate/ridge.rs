use nalgebra::{DMatrix, DVector};

use super::matrix::{Matrix, Standardizer};
use super::EstimateError;

/// Ridge regression on standardized features with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    scaler: Standardizer,
    intercept: f64,
    coef: Vec<f64>,
}

impl RidgeModel {
    pub fn fit(x: &Matrix, y: &[f64], lambda: f64) -> Result<Self, EstimateError> {
        let n = x.rows();
        let p = x.cols();
        let scaler = Standardizer::fit(x);
        let z = scaler.apply(x);
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let mut gram = DMatrix::<f64>::zeros(p, p);
        let mut rhs = DVector::<f64>::zeros(p);
        for (i, row) in z.iter_rows().enumerate() {
            let r = y[i] - y_mean;
            for a in 0..p {
                if row[a] == 0.0 {
                    continue;
                }
                rhs[a] += row[a] * r;
                for b in a..p {
                    gram[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
            gram[(a, a)] += lambda;
        }
        let coef = match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| EstimateError::Numerical(format!("ridge solve failed: {e}")))?,
        };
        if coef.iter().any(|c| !c.is_finite()) {
            return Err(EstimateError::Numerical("ridge produced non-finite coefficients".into()));
        }
        Ok(RidgeModel { scaler, intercept: y_mean, coef: coef.iter().copied().collect() })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut out = self.intercept;
        for (j, c) in self.coef.iter().enumerate() {
            out += c * (row[j] - self.scaler.means[j]) * self.scaler.inv_sd[j];
        }
        out
    }

    /// Slope of the prediction with respect to raw feature `j`.
    pub fn raw_slope(&self, j: usize) -> f64 {
        self.coef[j] * self.scaler.inv_sd[j]
    }
}
