use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AnalysisDataset, ConfidenceInterval, EstimateError};

/// Replicates may fail (e.g. a resample with an empty arm); beyond this share
/// the interval is refused.
pub const MAX_DROPPED_FRACTION: f64 = 0.2;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub interval: ConfidenceInterval,
    pub estimates: Vec<f64>,
    pub dropped: usize,
}

/// Linear-interpolation quantile of sorted values.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Row-resampling bootstrap. Replicate `b` draws from a ChaCha8 stream `b` of
/// `seed`, so results do not depend on thread scheduling.
pub fn bootstrap_ci<F>(data: &AnalysisDataset, replicates: usize, seed: u64, statistic: F) -> Result<BootstrapSummary, EstimateError>
where
    F: Fn(&AnalysisDataset) -> Result<f64, EstimateError> + Sync,
{
    if replicates < MIN_REPLICATES {
        return Err(EstimateError::InvalidConfig(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let n = data.len();
    let results: Vec<Result<f64, EstimateError>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            statistic(&data.subset(&idx))
        })
        .collect();
    let mut estimates: Vec<f64> = results.into_iter().filter_map(Result::ok).filter(|v| v.is_finite()).collect();
    let dropped = replicates - estimates.len();
    if estimates.is_empty() || dropped as f64 > MAX_DROPPED_FRACTION * replicates as f64 {
        return Err(EstimateError::TooManyFailures { dropped, total: replicates });
    }
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let interval = ConfidenceInterval { lower: percentile(&sorted, 0.025), upper: percentile(&sorted, 0.975) };
    estimates.shrink_to_fit();
    Ok(BootstrapSummary { interval, estimates, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert!((percentile(&v, 0.1) - 1.4).abs() < 1e-12);
    }
}
