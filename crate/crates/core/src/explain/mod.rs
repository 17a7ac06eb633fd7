//! Exact grouped Shapley attributions of per-session effect predictions.
//!
//! The value of a coalition S for row x is the mean model output over the
//! background rows with the columns of S taken from x (interventional
//! marginalization). All 2^G coalitions are enumerated.

mod svg;

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::estimate::{FeatureGroup, Matrix};

pub use svg::write_beeswarm_svg;

pub const MAX_GROUPS: usize = 12;
pub const DEFAULT_BACKGROUND: usize = 100;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("{0} groups exceed the exact limit of {MAX_GROUPS}; a sampling approximation would be needed")]
    TooManyGroups(usize),
    #[error("groups must partition all {columns} feature columns")]
    NotAPartition { columns: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("background sample is empty")]
    EmptyBackground,
    #[error("failed to write beeswarm output: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to write beeswarm output: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapMatrix {
    pub session_ids: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    /// `values[i][g]`: attribution of group `g` for row `i`.
    pub values: Vec<Vec<f64>>,
    /// Expected prediction over the background rows.
    pub baseline: f64,
    pub predictions: Vec<f64>,
}

impl ShapMatrix {
    pub fn mean_abs(&self) -> Vec<f64> {
        let n = self.values.len().max(1) as f64;
        (0..self.groups.len())
            .map(|g| self.values.iter().map(|r| r[g].abs()).sum::<f64>() / n)
            .collect()
    }

    /// Group indices by descending mean |φ|, ties in group order.
    pub fn importance_order(&self) -> Vec<usize> {
        let m = self.mean_abs();
        let mut order: Vec<usize> = (0..self.groups.len()).collect();
        order.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        order
    }

    /// Largest |Σφ + baseline − prediction| over rows.
    pub fn efficiency_gap(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.predictions)
            .map(|(row, p)| (row.iter().sum::<f64>() + self.baseline - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Seeded sample of at most `size` rows, kept in original order.
pub fn background_sample(x: &Matrix, size: usize, seed: u64) -> Matrix {
    if x.rows() <= size {
        return x.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, x.rows(), size).into_vec();
    idx.sort_unstable();
    x.select_rows(&idx)
}

fn check_partition(groups: &[FeatureGroup], columns: usize) -> Result<(), ExplainError> {
    let mut seen = vec![0u32; columns];
    for g in groups {
        if g.columns.end > columns {
            return Err(ExplainError::NotAPartition { columns });
        }
        for c in g.columns.clone() {
            seen[c] += 1;
        }
    }
    if seen.iter().all(|&k| k == 1) {
        Ok(())
    } else {
        Err(ExplainError::NotAPartition { columns })
    }
}

/// Shapley weight |S|!(G−|S|−1)!/G! indexed by |S|.
fn weights(g: usize) -> Vec<f64> {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (0..g).map(|s| fact(s) * fact(g - s - 1) / fact(g)).collect()
}

pub fn shapley_attributions<F>(
    model: F,
    x: &Matrix,
    session_ids: &[String],
    background: &Matrix,
    groups: &[FeatureGroup],
) -> Result<ShapMatrix, ExplainError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let g = groups.len();
    if g > MAX_GROUPS {
        return Err(ExplainError::TooManyGroups(g));
    }
    if background.rows() == 0 {
        return Err(ExplainError::EmptyBackground);
    }
    if background.cols() != x.cols() || session_ids.len() != x.rows() {
        return Err(ExplainError::Shape(format!(
            "{} rows x {} cols, {} ids, background has {} cols",
            x.rows(),
            x.cols(),
            session_ids.len(),
            background.cols()
        )));
    }
    check_partition(groups, x.cols())?;
    let w = weights(g);
    let nb = background.rows() as f64;
    let baseline = background.iter_rows().map(&model).sum::<f64>() / nb;
    let masks = 1usize << g;
    let rows: Vec<(Vec<f64>, f64)> = (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let mut hybrid = vec![0.0; x.cols()];
            let mut value = vec![0.0; masks];
            value[0] = baseline;
            for (mask, v) in value.iter_mut().enumerate().skip(1) {
                let mut total = 0.0;
                for b in background.iter_rows() {
                    hybrid.copy_from_slice(b);
                    for (k, grp) in groups.iter().enumerate() {
                        if mask & (1 << k) != 0 {
                            hybrid[grp.columns.clone()].copy_from_slice(&row[grp.columns.clone()]);
                        }
                    }
                    total += model(&hybrid);
                }
                *v = total / nb;
            }
            let phi: Vec<f64> = (0..g)
                .map(|k| {
                    let bit = 1 << k;
                    (0..masks)
                        .filter(|m| m & bit == 0)
                        .map(|m| w[m.count_ones() as usize] * (value[m | bit] - value[m]))
                        .sum()
                })
                .collect();
            (phi, model(row))
        })
        .collect();
    let (values, predictions) = rows.into_iter().unzip();
    Ok(ShapMatrix { session_ids: session_ids.to_vec(), groups: groups.to_vec(), values, baseline, predictions })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeeswarmRow {
    pub session_id: String,
    pub confounder: String,
    pub shap_value: f64,
    /// Column value for single-column groups; for a one-hot group the
    /// position of the active column (-1 when none is active).
    pub raw_value: f64,
}

fn group_raw_value(row: &[f64], group: &FeatureGroup) -> f64 {
    let cols = &row[group.columns.clone()];
    if cols.len() == 1 {
        return cols[0];
    }
    cols.iter().position(|v| *v != 0.0).map_or(-1.0, |p| p as f64)
}

pub fn emit_beeswarm_data(shap: &ShapMatrix, x: &Matrix) -> Result<Vec<BeeswarmRow>, ExplainError> {
    if x.rows() != shap.values.len() {
        return Err(ExplainError::Shape(format!("{} feature rows for {} attribution rows", x.rows(), shap.values.len())));
    }
    let mut out = Vec::with_capacity(shap.values.len() * shap.groups.len());
    for g in shap.importance_order() {
        let group = &shap.groups[g];
        for (i, row) in shap.values.iter().enumerate() {
            out.push(BeeswarmRow {
                session_id: shap.session_ids[i].clone(),
                confounder: group.name.clone(),
                shap_value: row[g],
                raw_value: group_raw_value(x.row(i), group),
            });
        }
    }
    Ok(out)
}

pub fn write_beeswarm_csv<W: Write>(rows: &[BeeswarmRow], out: W) -> Result<(), ExplainError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["session_id", "confounder", "shap_value", "raw_value"])?;
    for r in rows {
        w.write_record([r.session_id.as_str(), r.confounder.as_str(), &r.shap_value.to_string(), &r.raw_value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singletons(n: usize) -> Vec<FeatureGroup> {
        (0..n).map(|j| FeatureGroup { name: format!("x{j}"), columns: j..j + 1 }).collect()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn single_feature_identity() {
        let x = Matrix::from_rows(&[vec![3.0, 9.0], vec![-1.0, 2.0]]);
        let bg = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 5.0], vec![4.0, 0.0]]);
        let s = shapley_attributions(|r| r[0], &x, &ids(2), &bg, &singletons(2)).unwrap();
        assert_eq!(s.baseline, 2.0);
        assert!((s.values[0][0] - 1.0).abs() < 1e-12);
        assert!((s.values[1][0] + 3.0).abs() < 1e-12);
        assert_eq!(s.values[0][1], 0.0);
    }

    #[test]
    fn additive_model_splits_exactly() {
        let f = |r: &[f64]| r[0] * r[0] + 3.0 * r[1];
        let bg = Matrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 5.0]]);
        let x = Matrix::from_rows(&[vec![4.0, 2.0]]);
        let s = shapley_attributions(f, &x, &ids(1), &bg, &singletons(2)).unwrap();
        // f1 mean over background = 14/3, f2 mean = 6
        assert!((s.values[0][0] - (16.0 - 14.0 / 3.0)).abs() < 1e-12);
        assert!((s.values[0][1] - (6.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn interaction_is_shared_and_efficient() {
        let f = |r: &[f64]| r[0] * r[1] + r[2].sin();
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 0.3], vec![-2.0, 0.5, 1.1]]);
        let bg = Matrix::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]);
        let s = shapley_attributions(f, &x, &ids(2), &bg, &singletons(3)).unwrap();
        assert!(s.efficiency_gap() < 1e-12);
    }

    #[test]
    fn grouping_errors() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let overlap = vec![
            FeatureGroup { name: "a".into(), columns: 0..2 },
            FeatureGroup { name: "b".into(), columns: 1..2 },
        ];
        assert!(matches!(
            shapley_attributions(|r| r[0], &x, &ids(1), &x, &overlap),
            Err(ExplainError::NotAPartition { .. })
        ));
        let wide = Matrix::from_rows(&[vec![0.0; 13]]);
        assert!(matches!(
            shapley_attributions(|r| r[0], &wide, &ids(1), &wide, &singletons(13)),
            Err(ExplainError::TooManyGroups(13))
        ));
    }

    #[test]
    fn beeswarm_rows_are_ordered_by_importance() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
        let groups = vec![
            FeatureGroup { name: "A".into(), columns: 0..1 },
            FeatureGroup { name: "B".into(), columns: 1..3 },
        ];
        let shap = ShapMatrix {
            session_ids: ids(2),
            groups,
            values: vec![vec![0.1, -2.0], vec![0.2, 1.0]],
            baseline: 0.0,
            predictions: vec![-1.9, 1.2],
        };
        let rows = emit_beeswarm_data(&shap, &x).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].confounder, "B");
        assert_eq!(rows[0].raw_value, 1.0);
        assert_eq!(rows[1].raw_value, 0.0);
        assert_eq!(rows[2].confounder, "A");
    }
}
