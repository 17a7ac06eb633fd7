//! Refutation checks for an estimated average effect.
//!
//! Each refuter re-estimates the effect on `K` perturbed copies of the data and
//! compares the spread of those estimates with a reference value through a
//! two-sided normal approximation.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::estimate::{AnalysisDataset, EstimateError};

pub const DEFAULT_SIMULATIONS: usize = 100;
pub const DEFAULT_SUBSET_FRACTION: f64 = 0.8;
pub const SUBSET_RETRIES: usize = 10;
pub const MIN_SIMULATIONS: usize = 50;
pub const RANDOM_COLUMN: &str = "random_common_cause";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefuteError {
    #[error("invalid refuter configuration: {0}")]
    Config(String),
    #[error("simulation {simulation}: {source}")]
    Estimate { simulation: usize, source: EstimateError },
    #[error("simulation {simulation}: every subset failed after {SUBSET_RETRIES} retries ({last})")]
    SubsetExhausted { simulation: usize, last: EstimateError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refuter {
    RandomCommonCause,
    Placebo,
    DataSubset,
}

impl Refuter {
    pub const ALL: [Refuter; 3] = [Refuter::RandomCommonCause, Refuter::Placebo, Refuter::DataSubset];

    pub fn as_str(self) -> &'static str {
        match self {
            Refuter::RandomCommonCause => "random_common_cause",
            Refuter::Placebo => "placebo",
            Refuter::DataSubset => "data_subset",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s.trim())
    }

    /// Placebo estimates are compared with 0, the others with the original ATE.
    pub fn reference(self, original_ate: f64) -> f64 {
        match self {
            Refuter::Placebo => 0.0,
            _ => original_ate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefuteConfig {
    pub simulations: usize,
    pub subset_fraction: f64,
    /// Set by the caller, never read from configuration files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for RefuteConfig {
    fn default() -> Self {
        RefuteConfig { simulations: DEFAULT_SIMULATIONS, subset_fraction: DEFAULT_SUBSET_FRACTION, seed: 0 }
    }
}

impl RefuteConfig {
    pub fn validate(&self) -> Result<(), RefuteError> {
        if self.simulations < MIN_SIMULATIONS {
            return Err(RefuteError::Config(format!(
                "simulations must be at least {MIN_SIMULATIONS}, got {}",
                self.simulations
            )));
        }
        if !(self.subset_fraction > 0.5 && self.subset_fraction < 1.0) {
            return Err(RefuteError::Config(format!(
                "subset_fraction must be in (0.5, 1.0), got {}",
                self.subset_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationReport {
    pub refuter: Refuter,
    pub original_ate: f64,
    pub reference: f64,
    pub mean_effect: f64,
    pub sd_effect: f64,
    pub p_value: f64,
    pub simulations: usize,
    pub seed: u64,
}

/// Two-sided p-value of `reference` under N(mean, sd²). With zero spread the
/// p-value is 1 when every effect equals the reference and 0 otherwise.
pub fn normal_p_value(effects: &[f64], reference: f64) -> (f64, f64, f64) {
    let n = effects.len() as f64;
    let mean = effects.iter().sum::<f64>() / n;
    let sd = if effects.len() > 1 {
        (effects.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let p = if sd > 0.0 && sd.is_finite() {
        let z = (reference - mean) / sd;
        let phi = Normal::standard();
        (2.0 * (1.0 - phi.cdf(z.abs()))).clamp(0.0, 1.0)
    } else if effects.iter().all(|e| *e == reference) {
        1.0
    } else {
        0.0
    };
    (mean, sd, p)
}

fn perturb(data: &AnalysisDataset, refuter: Refuter, fraction: f64, rng: &mut ChaCha8Rng) -> AnalysisDataset {
    match refuter {
        Refuter::RandomCommonCause => {
            let noise: Vec<f64> = (0..data.len()).map(|_| StandardNormal.sample(rng)).collect();
            data.with_extra_column(RANDOM_COLUMN, &noise)
        }
        Refuter::Placebo => {
            let mut w = data.treatment.clone();
            w.shuffle(rng);
            data.with_treatment(w)
        }
        Refuter::DataSubset => {
            let take = ((fraction * data.len() as f64).round() as usize).clamp(1, data.len());
            let mut idx = index::sample(rng, data.len(), take).into_vec();
            idx.sort_unstable();
            data.subset(&idx)
        }
    }
}

/// Runs one refuter. `estimator` maps a dataset to its ATE; simulation `k`
/// draws from ChaCha8 stream `k` of the configured seed.
pub fn run_refuter<F>(
    data: &AnalysisDataset,
    original_ate: f64,
    refuter: Refuter,
    config: &RefuteConfig,
    estimator: F,
) -> Result<RefutationReport, RefuteError>
where
    F: Fn(&AnalysisDataset) -> Result<f64, EstimateError> + Sync,
{
    config.validate()?;
    let outcomes: Vec<Result<f64, RefuteError>> = (0..config.simulations)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let mut attempt = 0;
            loop {
                let perturbed = perturb(data, refuter, config.subset_fraction, &mut rng);
                match estimator(&perturbed) {
                    Ok(v) if v.is_finite() => return Ok(v),
                    Ok(v) => {
                        return Err(RefuteError::Estimate {
                            simulation: k,
                            source: EstimateError::Numerical(format!("non-finite effect {v}")),
                        })
                    }
                    Err(e) if refuter == Refuter::DataSubset => {
                        if attempt == SUBSET_RETRIES {
                            return Err(RefuteError::SubsetExhausted { simulation: k, last: e });
                        }
                        attempt += 1;
                    }
                    Err(e) => return Err(RefuteError::Estimate { simulation: k, source: e }),
                }
            }
        })
        .collect();
    let effects = outcomes.into_iter().collect::<Result<Vec<f64>, _>>()?;
    let reference = refuter.reference(original_ate);
    let (mean_effect, sd_effect, p_value) = normal_p_value(&effects, reference);
    Ok(RefutationReport {
        refuter,
        original_ate,
        reference,
        mean_effect,
        sd_effect,
        p_value,
        simulations: config.simulations,
        seed: config.seed,
    })
}

pub fn random_common_cause<F>(data: &AnalysisDataset, ate: f64, config: &RefuteConfig, estimator: F) -> Result<RefutationReport, RefuteError>
where
    F: Fn(&AnalysisDataset) -> Result<f64, EstimateError> + Sync,
{
    run_refuter(data, ate, Refuter::RandomCommonCause, config, estimator)
}

pub fn placebo_treatment<F>(data: &AnalysisDataset, ate: f64, config: &RefuteConfig, estimator: F) -> Result<RefutationReport, RefuteError>
where
    F: Fn(&AnalysisDataset) -> Result<f64, EstimateError> + Sync,
{
    run_refuter(data, ate, Refuter::Placebo, config, estimator)
}

pub fn data_subset<F>(data: &AnalysisDataset, ate: f64, config: &RefuteConfig, estimator: F) -> Result<RefutationReport, RefuteError>
where
    F: Fn(&AnalysisDataset) -> Result<f64, EstimateError> + Sync,
{
    run_refuter(data, ate, Refuter::DataSubset, config, estimator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::synthetic::{generate, EffectShape, SyntheticConfig};
    use crate::estimate::{estimate_x_learner, LearnerConfig};

    fn x_ate(d: &AnalysisDataset) -> Result<f64, EstimateError> {
        estimate_x_learner(d, &LearnerConfig::default()).map(|r| r.ate)
    }

    fn quick() -> RefuteConfig {
        RefuteConfig { simulations: 50, seed: 5, ..RefuteConfig::default() }
    }

    #[test]
    fn p_value_examples() {
        let (m, sd, p) = normal_p_value(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!((m, sd, p), (1.0, 0.0, 1.0));
        assert_eq!(normal_p_value(&[1.0, 1.0], 2.0).2, 0.0);
        let (_, _, p) = normal_p_value(&[-1.0, 1.0], 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, sd, p) = normal_p_value(&[0.0, 2.0], 1.0 + 2f64.sqrt() * 1.959_963_984_540_054);
        assert!((sd - 2f64.sqrt()).abs() < 1e-12);
        assert!((p - 0.05).abs() < 1e-9);
    }

    #[test]
    fn refuters_do_not_flag_a_sound_estimate() {
        let data = generate(&SyntheticConfig { n: 600, seed: 2, ..SyntheticConfig::default() }).dataset;
        let ate = x_ate(&data).unwrap();
        let rcc = random_common_cause(&data, ate, &quick(), x_ate).unwrap();
        assert!(rcc.p_value > 0.05, "{rcc:?}");
        assert!((rcc.mean_effect - ate).abs() < 0.05);
        let dsr = data_subset(&data, ate, &quick(), x_ate).unwrap();
        assert!(dsr.p_value > 0.05, "{dsr:?}");
        let placebo = placebo_treatment(&data, ate, &quick(), x_ate).unwrap();
        assert!(placebo.p_value > 0.05, "{placebo:?}");
        assert!(placebo.mean_effect.abs() < 0.3);
        assert_eq!(placebo.reference, 0.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let data = generate(&SyntheticConfig { n: 200, seed: 3, effect: EffectShape::Constant(0.5), ..SyntheticConfig::default() }).dataset;
        let ate = x_ate(&data).unwrap();
        let a = placebo_treatment(&data, ate, &quick(), x_ate).unwrap();
        let b = placebo_treatment(&data, ate, &quick(), x_ate).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_bounds() {
        for f in [0.5, 1.0, 0.2] {
            assert!(RefuteConfig { subset_fraction: f, ..RefuteConfig::default() }.validate().is_err());
        }
        assert!(RefuteConfig::default().validate().is_ok());
        assert!(RefuteConfig { simulations: 49, ..RefuteConfig::default() }.validate().is_err());
    }

    #[test]
    fn failing_estimator_is_reported() {
        let data = generate(&SyntheticConfig { n: 50, ..SyntheticConfig::default() }).dataset;
        let fail = |_: &AnalysisDataset| Err(EstimateError::Numerical("x".into()));
        let err = run_refuter(&data, 0.0, Refuter::Placebo, &quick(), fail).unwrap_err();
        assert!(matches!(err, RefuteError::Estimate { simulation: 0, .. }));
        let err = run_refuter(&data, 0.0, Refuter::DataSubset, &quick(), fail).unwrap_err();
        assert!(matches!(err, RefuteError::SubsetExhausted { simulation: 0, .. }));
    }
}
