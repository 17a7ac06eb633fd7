//! Simulated sessions with known treatment effects, for checking estimators.
//!
//! Confounders mimic the session metadata: a binary genre, a topic drawn from
//! `topics` levels, native-speaker status and the two sampling settings.
//! Treatment and outcome both depend on every confounder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::{encode_confounders, AnalysisDataset, ConfounderRow};
use crate::ingest::{FREQUENCY_PENALTIES, TEMPERATURES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covariate {
    C1,
    C3,
    C4,
    C5,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectShape {
    Constant(f64),
    /// τ(x) = intercept + slope·x for one covariate.
    Linear { covariate: Covariate, intercept: f64, slope: f64 },
}

impl EffectShape {
    pub fn at(&self, row: &ConfounderRow) -> f64 {
        match *self {
            EffectShape::Constant(t) => t,
            EffectShape::Linear { covariate, intercept, slope } => {
                let x = match covariate {
                    Covariate::C1 => f64::from(row.genre),
                    Covariate::C3 => f64::from(row.native),
                    Covariate::C4 => row.temperature,
                    Covariate::C5 => row.frequency_penalty,
                };
                intercept + slope * x
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n: usize,
    pub seed: u64,
    pub effect: EffectShape,
    pub topics: usize,
    pub noise_sd: f64,
    /// Scales how strongly confounders drive treatment uptake.
    pub confounding: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 2000,
            seed: 0,
            effect: EffectShape::Constant(1.5),
            topics: 20,
            noise_sd: 1.0,
            confounding: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: AnalysisDataset,
    pub confounders: Vec<ConfounderRow>,
    pub true_ite: Vec<f64>,
}

impl SyntheticData {
    pub fn true_ate(&self) -> f64 {
        self.true_ite.iter().sum::<f64>() / self.true_ite.len() as f64
    }
}

fn topic_effect(k: usize, levels: usize) -> f64 {
    if levels <= 1 {
        return 0.0;
    }
    (k as f64 / (levels - 1) as f64 - 0.5) * 1.2
}

pub fn generate(config: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sd.max(0.0)).unwrap_or_else(|_| Normal::new(0.0, 0.0).unwrap());
    let levels = config.topics.max(1);
    let mut rows = Vec::with_capacity(config.n);
    let mut treatment = Vec::with_capacity(config.n);
    let mut outcome = Vec::with_capacity(config.n);
    let mut true_ite = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let genre = u8::from(rng.random_bool(0.5));
        let k = rng.random_range(0..levels);
        let native = u8::from(rng.random_bool(0.6));
        let temperature = TEMPERATURES[rng.random_range(0..TEMPERATURES.len())];
        let frequency_penalty = FREQUENCY_PENALTIES[rng.random_range(0..FREQUENCY_PENALTIES.len())];
        let row = ConfounderRow {
            session_id: format!("sim{i:05}"),
            genre,
            topic: format!("topic{k:02}"),
            native,
            temperature,
            frequency_penalty,
        };
        let te = topic_effect(k, levels);
        let c1 = f64::from(genre);
        let c3 = f64::from(native);
        let logit = config.confounding
            * (0.8 * (c1 - 0.5) + 0.6 * te + 0.5 * (c3 - 0.6) + 1.5 * (temperature - 0.5) - 1.0 * (frequency_penalty - 0.5));
        let w = u8::from(rng.random_bool(1.0 / (1.0 + (-logit).exp())));
        let tau = config.effect.at(&row);
        let y = 1.0 + c1 + 1.5 * te + 0.5 * c3 + 1.5 * temperature - frequency_penalty
            + tau * f64::from(w)
            + noise.sample(&mut rng);
        rows.push(row);
        treatment.push(w);
        outcome.push(y);
        true_ite.push(tau);
    }
    let enc = encode_confounders(&rows);
    let dataset = AnalysisDataset::new(enc.session_ids, enc.features, enc.feature_names, enc.groups, treatment, outcome)
        .expect("synthetic data is well-formed");
    SyntheticData { dataset, confounders: rows, true_ite }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_confounded() {
        let cfg = SyntheticConfig { n: 3000, ..SyntheticConfig::default() };
        let a = generate(&cfg);
        assert_eq!(a, generate(&cfg));
        assert_eq!(a.dataset.groups.len(), 5);
        assert_eq!(a.dataset.features.cols(), 24);
        let rate = |genre: u8| {
            let (mut t, mut n) = (0.0, 0.0);
            for (r, w) in a.confounders.iter().zip(&a.dataset.treatment) {
                if r.genre == genre {
                    t += f64::from(*w);
                    n += 1.0;
                }
            }
            t / n
        };
        assert!(rate(1) > rate(0) + 0.1);
    }
}
