use super::matrix::{Matrix, Standardizer};

pub const PROPENSITY_CLIP: (f64, f64) = (0.01, 0.99);

/// L2-penalized logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct PropensityModel {
    scaler: Standardizer,
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Largest eigenvalue of ZᵀZ/n by power iteration.
fn top_eigenvalue(z: &Matrix) -> f64 {
    let p = z.cols();
    let n = z.rows() as f64;
    if p == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut next = vec![0.0; p];
        for row in z.iter_rows() {
            let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (o, a) in next.iter_mut().zip(row) {
                *o += a * dot / n;
            }
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        next.iter_mut().for_each(|a| *a /= norm);
        let converged = (norm - lambda).abs() <= 1e-10 * norm;
        lambda = norm;
        v = next;
        if converged {
            break;
        }
    }
    lambda
}

impl PropensityModel {
    /// Minimizes mean log-loss plus `lambda`/(2n)·‖w‖² by gradient descent with
    /// step 1/L; the bias is unpenalized.
    pub fn fit(x: &Matrix, w: &[u8], lambda: f64, iterations: usize) -> Self {
        let n = x.rows();
        let p = x.cols();
        let scaler = Standardizer::fit(x);
        let z = scaler.apply(x);
        let nf = n as f64;
        let smooth = 0.25 * (top_eigenvalue(&z) + 1.0) + lambda / nf;
        let step = 1.0 / smooth;
        let target: Vec<f64> = w.iter().map(|&v| f64::from(v)).collect();
        let mut weights = vec![0.0; p];
        let mut bias = {
            let rate = (target.iter().sum::<f64>() / nf).clamp(1e-3, 1.0 - 1e-3);
            (rate / (1.0 - rate)).ln()
        };
        let mut grad = vec![0.0; p];
        for _ in 0..iterations {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for (i, row) in z.iter_rows().enumerate() {
                let t = bias + row.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
                let err = sigmoid(t) - target[i];
                grad_b += err;
                for (g, a) in grad.iter_mut().zip(row) {
                    *g += err * a;
                }
            }
            let mut change = 0.0f64;
            for (wj, g) in weights.iter_mut().zip(&grad) {
                let d = step * (g + lambda * *wj) / nf;
                *wj -= d;
                change = change.max(d.abs());
            }
            let db = step * grad_b / nf;
            bias -= db;
            if change.max(db.abs()) < 1e-10 {
                break;
            }
        }
        PropensityModel { scaler, weights, bias }
    }

    /// Clipped P(W = 1 | x).
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut t = self.bias;
        for (j, wj) in self.weights.iter().enumerate() {
            t += wj * (row[j] - self.scaler.means[j]) * self.scaler.inv_sd[j];
        }
        sigmoid(t).clamp(PROPENSITY_CLIP.0, PROPENSITY_CLIP.1)
    }
}
