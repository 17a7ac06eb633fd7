//! Heterogeneous treatment-effect estimation: X-learner with S/T baselines,
//! ridge or boosted-tree base learners, logistic propensity and bootstrap CIs.

mod bootstrap;
mod dataset;
mod matrix;
mod propensity;
mod ridge;
pub mod synthetic;
mod trees;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bootstrap::{bootstrap_ci, percentile, BootstrapSummary, MAX_DROPPED_FRACTION, MIN_REPLICATES};
pub use dataset::{encode_confounders, AnalysisDataset, ConfounderRow, EncodedConfounders, FeatureGroup};
pub use matrix::{Matrix, Standardizer};
pub use propensity::{PropensityModel, PROPENSITY_CLIP};
pub use ridge::RidgeModel;
pub use trees::{BoostedTrees, RegressionTree, TreeParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error("need both treatment groups, got {treated} treated of {total}")]
    SingleGroup { treated: usize, total: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{dropped} of {total} bootstrap replicates failed")]
    TooManyFailures { dropped: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseLearner {
    Ridge,
    BoostedTrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaLearner {
    X,
    S,
    T,
}

impl MetaLearner {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaLearner::X => "x",
            MetaLearner::S => "s",
            MetaLearner::T => "t",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerConfig {
    pub base_learner: BaseLearner,
    pub ridge_lambda: f64,
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub subsample: f64,
    pub propensity_lambda: f64,
    pub propensity_iterations: usize,
    /// Set by the caller, never read from configuration files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            base_learner: BaseLearner::Ridge,
            ridge_lambda: 1.0,
            rounds: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 5,
            subsample: 1.0,
            propensity_lambda: 1.0,
            propensity_iterations: 500,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn boosted_trees() -> Self {
        LearnerConfig { base_learner: BaseLearner::BoostedTrees, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let bad = |m: &str| Err(EstimateError::InvalidConfig(m.to_owned()));
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return bad("ridge_lambda must be finite and >= 0");
        }
        if !(self.propensity_lambda >= 0.0 && self.propensity_lambda.is_finite()) {
            return bad("propensity_lambda must be finite and >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must be in (0, 1]");
        }
        if self.max_depth == 0 || self.min_leaf == 0 {
            return bad("max_depth and min_leaf must be positive");
        }
        Ok(())
    }

    fn tree_params(&self, seed: u64) -> TreeParams {
        TreeParams {
            rounds: self.rounds,
            learning_rate: self.learning_rate,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            subsample: self.subsample,
            seed,
        }
    }
}

/// A fitted outcome or pseudo-outcome model.
#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    Constant(f64),
    Ridge(RidgeModel),
    Trees(BoostedTrees),
}

impl Regressor {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Regressor::Constant(c) => *c,
            Regressor::Ridge(m) => m.predict_row(row),
            Regressor::Trees(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }
}

pub fn fit_regressor(x: &Matrix, y: &[f64], config: &LearnerConfig, seed: u64) -> Result<Regressor, EstimateError> {
    if x.rows() != y.len() {
        return Err(EstimateError::DimensionMismatch(format!("{} rows, {} targets", x.rows(), y.len())));
    }
    if y.len() < 2 {
        return Err(EstimateError::InsufficientData(format!("regression needs 2 rows, got {}", y.len())));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Ok(Regressor::Constant(y[0]));
    }
    Ok(match config.base_learner {
        BaseLearner::Ridge => Regressor::Ridge(RidgeModel::fit(x, y, config.ridge_lambda)?),
        BaseLearner::BoostedTrees => Regressor::Trees(BoostedTrees::fit(x, y, &config.tree_params(seed))),
    })
}

pub fn fit_propensity(x: &Matrix, w: &[u8], config: &LearnerConfig) -> Result<PropensityModel, EstimateError> {
    if x.rows() != w.len() {
        return Err(EstimateError::DimensionMismatch(format!("{} rows, {} labels", x.rows(), w.len())));
    }
    let treated = w.iter().filter(|&&v| v == 1).count();
    if treated == 0 || treated == w.len() {
        return Err(EstimateError::SingleGroup { treated, total: w.len() });
    }
    Ok(PropensityModel::fit(x, w, config.propensity_lambda, config.propensity_iterations))
}

fn arm(data: &AnalysisDataset, idx: &[usize]) -> Result<(Matrix, Vec<f64>), EstimateError> {
    if idx.len() < 2 {
        return Err(EstimateError::InsufficientData(format!(
            "each treatment arm needs 2 rows, one has {}",
            idx.len()
        )));
    }
    Ok((data.features.select_rows(idx), idx.iter().map(|&i| data.outcome[i]).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct XLearnerModel {
    pub mu0: Regressor,
    pub mu1: Regressor,
    pub tau0: Regressor,
    pub tau1: Regressor,
    pub propensity: PropensityModel,
}

impl XLearnerModel {
    pub fn fit(data: &AnalysisDataset, config: &LearnerConfig) -> Result<Self, EstimateError> {
        config.validate()?;
        data.check_overlap()?;
        let (c_idx, t_idx) = data.arms();
        let (x0, y0) = arm(data, &c_idx)?;
        let (x1, y1) = arm(data, &t_idx)?;
        let seed = config.seed;
        let mu0 = fit_regressor(&x0, &y0, config, seed)?;
        let mu1 = fit_regressor(&x1, &y1, config, seed.wrapping_add(1))?;
        let d1: Vec<f64> = x1.iter_rows().zip(&y1).map(|(r, y)| y - mu0.predict_row(r)).collect();
        let d0: Vec<f64> = x0.iter_rows().zip(&y0).map(|(r, y)| mu1.predict_row(r) - y).collect();
        let tau1 = fit_regressor(&x1, &d1, config, seed.wrapping_add(2))?;
        let tau0 = fit_regressor(&x0, &d0, config, seed.wrapping_add(3))?;
        let propensity = fit_propensity(&data.features, &data.treatment, config)?;
        Ok(XLearnerModel { mu0, mu1, tau0, tau1, propensity })
    }

    pub fn predict_ite(&self, row: &[f64]) -> f64 {
        let g = self.propensity.predict_row(row);
        g * self.tau0.predict_row(row) + (1.0 - g) * self.tau1.predict_row(row)
    }
}

/// Any fitted meta-learner, exposing per-row effect predictions.
#[derive(Debug, Clone, PartialEq)]
pub enum EffectModel {
    X(XLearnerModel),
    S { model: Regressor, columns: usize },
    T { mu0: Regressor, mu1: Regressor },
}

impl EffectModel {
    pub fn fit(data: &AnalysisDataset, learner: MetaLearner, config: &LearnerConfig) -> Result<Self, EstimateError> {
        config.validate()?;
        data.check_overlap()?;
        match learner {
            MetaLearner::X => Ok(EffectModel::X(XLearnerModel::fit(data, config)?)),
            MetaLearner::S => {
                let w = Matrix::new(data.treatment.iter().map(|&v| f64::from(v)).collect(), data.len(), 1);
                let x = data.features.hstack(&w);
                let model = fit_regressor(&x, &data.outcome, config, config.seed)?;
                Ok(EffectModel::S { model, columns: data.features.cols() })
            }
            MetaLearner::T => {
                let (c_idx, t_idx) = data.arms();
                let (x0, y0) = arm(data, &c_idx)?;
                let (x1, y1) = arm(data, &t_idx)?;
                Ok(EffectModel::T {
                    mu0: fit_regressor(&x0, &y0, config, config.seed)?,
                    mu1: fit_regressor(&x1, &y1, config, config.seed.wrapping_add(1))?,
                })
            }
        }
    }

    pub fn predict_ite(&self, row: &[f64]) -> f64 {
        match self {
            EffectModel::X(m) => m.predict_ite(row),
            EffectModel::S { model, columns } => {
                let mut ext = Vec::with_capacity(columns + 1);
                ext.extend_from_slice(&row[..*columns]);
                ext.push(1.0);
                let treated = model.predict_row(&ext);
                ext[*columns] = 0.0;
                treated - model.predict_row(&ext)
            }
            EffectModel::T { mu0, mu1 } => mu1.predict_row(row) - mu0.predict_row(row),
        }
    }

    pub fn propensity(&self) -> Option<&PropensityModel> {
        match self {
            EffectModel::X(m) => Some(&m.propensity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub learner: MetaLearner,
    pub ate: f64,
    pub ite: Vec<f64>,
    /// Clipped propensity per row; X-learner only.
    pub propensity: Option<Vec<f64>>,
    pub ci95: Option<ConfidenceInterval>,
    pub bootstrap_dropped: usize,
    pub config: LearnerConfig,
}

pub fn estimate(data: &AnalysisDataset, learner: MetaLearner, config: &LearnerConfig) -> Result<EstimationResult, EstimateError> {
    let model = EffectModel::fit(data, learner, config)?;
    let ite: Vec<f64> = data.features.iter_rows().map(|r| model.predict_ite(r)).collect();
    if ite.iter().any(|v| !v.is_finite()) {
        return Err(EstimateError::Numerical("non-finite individual effect".into()));
    }
    let ate = ite.iter().sum::<f64>() / ite.len() as f64;
    let propensity = model.propensity().map(|g| data.features.iter_rows().map(|r| g.predict_row(r)).collect());
    Ok(EstimationResult { learner, ate, ite, propensity, ci95: None, bootstrap_dropped: 0, config: config.clone() })
}

pub fn estimate_x_learner(data: &AnalysisDataset, config: &LearnerConfig) -> Result<EstimationResult, EstimateError> {
    estimate(data, MetaLearner::X, config)
}

pub fn estimate_baseline(data: &AnalysisDataset, learner: MetaLearner, config: &LearnerConfig) -> Result<EstimationResult, EstimateError> {
    estimate(data, learner, config)
}

/// Point estimate plus a percentile bootstrap interval.
pub fn estimate_with_ci(
    data: &AnalysisDataset,
    learner: MetaLearner,
    config: &LearnerConfig,
    replicates: usize,
    seed: u64,
) -> Result<EstimationResult, EstimateError> {
    let mut result = estimate(data, learner, config)?;
    if replicates > 0 {
        let summary = bootstrap_ci(data, replicates, seed, |d| estimate(d, learner, config).map(|r| r.ate))?;
        result.ci95 = Some(summary.interval);
        result.bootstrap_dropped = summary.dropped;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::synthetic::{generate, EffectShape, SyntheticConfig};
    use super::*;

    fn small(effect: EffectShape, seed: u64) -> AnalysisDataset {
        generate(&SyntheticConfig { n: 400, seed, effect, ..SyntheticConfig::default() }).dataset
    }

    #[test]
    fn ate_is_mean_of_ite() {
        let data = small(EffectShape::Constant(1.0), 3);
        for learner in [MetaLearner::X, MetaLearner::S, MetaLearner::T] {
            let r = estimate(&data, learner, &LearnerConfig::default()).unwrap();
            assert_eq!(r.ate, r.ite.iter().sum::<f64>() / r.ite.len() as f64);
        }
    }

    #[test]
    fn shifting_outcome_leaves_effects_unchanged() {
        let data = small(EffectShape::Constant(1.0), 4);
        let shifted = data.with_outcome(data.outcome.iter().map(|y| y + 37.5).collect());
        let a = estimate_x_learner(&data, &LearnerConfig::default()).unwrap();
        let b = estimate_x_learner(&shifted, &LearnerConfig::default()).unwrap();
        assert!((a.ate - b.ate).abs() < 1e-9);
        for (x, y) in a.ite.iter().zip(&b.ite) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_outcome_gives_zero_effect() {
        let data = small(EffectShape::Constant(1.0), 5);
        let flat = data.with_outcome(vec![2.0; data.len()]);
        let r = estimate_x_learner(&flat, &LearnerConfig::boosted_trees()).unwrap();
        assert!(r.ite.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_group_is_rejected() {
        let data = small(EffectShape::Constant(1.0), 6);
        let all_treated = data.with_treatment(vec![1; data.len()]);
        assert!(matches!(
            estimate_x_learner(&all_treated, &LearnerConfig::default()),
            Err(EstimateError::SingleGroup { .. })
        ));
    }

    #[test]
    fn propensities_are_clipped() {
        let data = small(EffectShape::Constant(1.0), 7);
        let r = estimate_x_learner(&data, &LearnerConfig::default()).unwrap();
        assert!(r.propensity.unwrap().iter().all(|g| (0.01..=0.99).contains(g)));
    }

    #[test]
    fn bootstrap_is_deterministic_and_covers_truth() {
        let data = small(EffectShape::Constant(1.5), 8);
        let cfg = LearnerConfig::default();
        let a = estimate_with_ci(&data, MetaLearner::X, &cfg, 100, 11).unwrap();
        let b = estimate_with_ci(&data, MetaLearner::X, &cfg, 100, 11).unwrap();
        assert_eq!(a, b);
        let ci = a.ci95.unwrap();
        assert!(ci.lower <= a.ate && a.ate <= ci.upper);
        assert!(ci.lower < 1.5 && 1.5 < ci.upper, "{ci:?}");
    }

    #[test]
    fn propensity_needs_both_classes() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert!(fit_propensity(&x, &[1, 1], &LearnerConfig::default()).is_err());
        assert!(fit_propensity(&x, &[0, 1], &LearnerConfig::default()).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(LearnerConfig { subsample: 0.0, ..LearnerConfig::default() }.validate().is_err());
        assert!(LearnerConfig { ridge_lambda: -1.0, ..LearnerConfig::default() }.validate().is_err());
        let parsed: LearnerConfig = toml::from_str("base_learner = \"boosted_trees\"\nrounds = 10").unwrap();
        assert_eq!(parsed.rounds, 10);
        assert!(toml::from_str::<LearnerConfig>("nope = 1").is_err());
    }
}
