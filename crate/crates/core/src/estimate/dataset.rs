use std::collections::BTreeSet;
use std::ops::Range;

use super::matrix::Matrix;
use super::EstimateError;
use crate::ingest::SessionMeta;

/// Raw confounder values of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfounderRow {
    pub session_id: String,
    /// C1: 1 for creative, 0 for argumentative.
    pub genre: u8,
    /// C2
    pub topic: String,
    /// C3: 1 for native speakers.
    pub native: u8,
    /// C4
    pub temperature: f64,
    /// C5
    pub frequency_penalty: f64,
}

impl ConfounderRow {
    pub fn from_meta(session_id: &str, meta: &SessionMeta) -> Self {
        ConfounderRow {
            session_id: session_id.to_owned(),
            genre: meta.genre.code(),
            topic: meta.topic.clone(),
            native: u8::from(meta.native),
            temperature: meta.temperature,
            frequency_penalty: meta.frequency_penalty,
        }
    }
}

/// A named block of feature columns treated as one player in attributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Range<usize>,
}

/// Encoded confounders: C1, one-hot C2 over sorted topics, C3, C4, C5.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedConfounders {
    pub session_ids: Vec<String>,
    pub features: Matrix,
    pub feature_names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub topics: Vec<String>,
}

pub fn encode_confounders(rows: &[ConfounderRow]) -> EncodedConfounders {
    let topics: Vec<String> = rows.iter().map(|r| r.topic.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let k = topics.len();
    let cols = 4 + k;
    let mut data = Vec::with_capacity(rows.len() * cols);
    for r in rows {
        data.push(f64::from(r.genre));
        let hot = topics.binary_search(&r.topic).unwrap_or(usize::MAX);
        data.extend((0..k).map(|j| if j == hot { 1.0 } else { 0.0 }));
        data.push(f64::from(r.native));
        data.push(r.temperature);
        data.push(r.frequency_penalty);
    }
    let mut feature_names = vec!["C1".to_string()];
    feature_names.extend(topics.iter().map(|t| format!("C2={t}")));
    feature_names.extend(["C3", "C4", "C5"].map(String::from));
    let groups = vec![
        FeatureGroup { name: "C1".into(), columns: 0..1 },
        FeatureGroup { name: "C2".into(), columns: 1..1 + k },
        FeatureGroup { name: "C3".into(), columns: 1 + k..2 + k },
        FeatureGroup { name: "C4".into(), columns: 2 + k..3 + k },
        FeatureGroup { name: "C5".into(), columns: 3 + k..4 + k },
    ];
    EncodedConfounders {
        session_ids: rows.iter().map(|r| r.session_id.clone()).collect(),
        features: Matrix::new(data, rows.len(), cols),
        feature_names,
        groups,
        topics,
    }
}

/// Rows ready for one (treatment, outcome) estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisDataset {
    pub session_ids: Vec<String>,
    pub features: Matrix,
    pub feature_names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub treatment: Vec<u8>,
    pub outcome: Vec<f64>,
}

impl AnalysisDataset {
    pub fn new(
        session_ids: Vec<String>,
        features: Matrix,
        feature_names: Vec<String>,
        groups: Vec<FeatureGroup>,
        treatment: Vec<u8>,
        outcome: Vec<f64>,
    ) -> Result<Self, EstimateError> {
        let n = features.rows();
        if session_ids.len() != n || treatment.len() != n || outcome.len() != n {
            return Err(EstimateError::DimensionMismatch(format!(
                "{n} feature rows, {} ids, {} treatments, {} outcomes",
                session_ids.len(),
                treatment.len(),
                outcome.len()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(EstimateError::DimensionMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if treatment.iter().any(|&w| w > 1) {
            return Err(EstimateError::InvalidInput("treatment must be 0 or 1".into()));
        }
        if !features.all_finite() || outcome.iter().any(|y| !y.is_finite()) {
            return Err(EstimateError::InvalidInput("non-finite value in features or outcome".into()));
        }
        Ok(AnalysisDataset { session_ids, features, feature_names, groups, treatment, outcome })
    }

    /// Joins encoded confounders with per-session treatment bins and outcomes.
    /// Sessions whose treatment or outcome is `None` are dropped; the second
    /// element lists their ids.
    pub fn assemble(
        confounders: &EncodedConfounders,
        treatment: &[Option<u8>],
        outcome: &[Option<f64>],
    ) -> Result<(Self, Vec<String>), EstimateError> {
        let n = confounders.session_ids.len();
        if treatment.len() != n || outcome.len() != n {
            return Err(EstimateError::DimensionMismatch(format!(
                "{n} sessions, {} treatments, {} outcomes",
                treatment.len(),
                outcome.len()
            )));
        }
        let mut keep = Vec::new();
        let mut dropped = Vec::new();
        for i in 0..n {
            match (treatment[i], outcome[i]) {
                (Some(_), Some(y)) if y.is_finite() => keep.push(i),
                _ => dropped.push(confounders.session_ids[i].clone()),
            }
        }
        let data = AnalysisDataset::new(
            keep.iter().map(|&i| confounders.session_ids[i].clone()).collect(),
            confounders.features.select_rows(&keep),
            confounders.feature_names.clone(),
            confounders.groups.clone(),
            keep.iter().map(|&i| treatment[i].unwrap_or_default()).collect(),
            keep.iter().map(|&i| outcome[i].unwrap_or_default()).collect(),
        )?;
        Ok((data, dropped))
    }

    pub fn len(&self) -> usize {
        self.outcome.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcome.is_empty()
    }

    pub fn treated_count(&self) -> usize {
        self.treatment.iter().filter(|&&w| w == 1).count()
    }

    /// Fails unless both treatment groups are non-empty.
    pub fn check_overlap(&self) -> Result<(), EstimateError> {
        let treated = self.treated_count();
        if treated == 0 || treated == self.len() {
            return Err(EstimateError::SingleGroup { treated, total: self.len() });
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> AnalysisDataset {
        AnalysisDataset {
            session_ids: idx.iter().map(|&i| self.session_ids[i].clone()).collect(),
            features: self.features.select_rows(idx),
            feature_names: self.feature_names.clone(),
            groups: self.groups.clone(),
            treatment: idx.iter().map(|&i| self.treatment[i]).collect(),
            outcome: idx.iter().map(|&i| self.outcome[i]).collect(),
        }
    }

    /// Adds one feature column as its own group.
    pub fn with_extra_column(&self, name: &str, values: &[f64]) -> AnalysisDataset {
        let extra = Matrix::new(values.to_vec(), values.len(), 1);
        let p = self.features.cols();
        let mut out = self.clone();
        out.features = self.features.hstack(&extra);
        out.feature_names.push(name.to_owned());
        out.groups.push(FeatureGroup { name: name.to_owned(), columns: p..p + 1 });
        out
    }

    /// Keeps only the columns of the named groups, in their current order.
    pub fn select_groups(&self, names: &[&str]) -> AnalysisDataset {
        let mut cols = Vec::new();
        let mut groups = Vec::new();
        for g in self.groups.iter().filter(|g| names.contains(&g.name.as_str())) {
            let start = cols.len();
            cols.extend(g.columns.clone());
            groups.push(FeatureGroup { name: g.name.clone(), columns: start..cols.len() });
        }
        let mut data = Vec::with_capacity(self.len() * cols.len());
        for row in self.features.iter_rows() {
            data.extend(cols.iter().map(|&c| row[c]));
        }
        AnalysisDataset {
            features: Matrix::new(data, self.len(), cols.len()),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            groups,
            ..self.clone()
        }
    }

    pub fn with_treatment(&self, treatment: Vec<u8>) -> AnalysisDataset {
        AnalysisDataset { treatment, ..self.clone() }
    }

    pub fn with_outcome(&self, outcome: Vec<f64>) -> AnalysisDataset {
        AnalysisDataset { outcome, ..self.clone() }
    }

    /// Row indices of each treatment arm, in dataset order.
    pub fn arms(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.treatment[i] == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, topic: &str, genre: u8) -> ConfounderRow {
        ConfounderRow {
            session_id: id.into(),
            genre,
            topic: topic.into(),
            native: 1,
            temperature: 0.75,
            frequency_penalty: 0.5,
        }
    }

    #[test]
    fn one_hot_uses_sorted_topics() {
        let enc = encode_confounders(&[row("a", "zoo", 1), row("b", "apple", 0)]);
        assert_eq!(enc.topics, vec!["apple", "zoo"]);
        assert_eq!(enc.feature_names, vec!["C1", "C2=apple", "C2=zoo", "C3", "C4", "C5"]);
        assert_eq!(enc.features.row(0), &[1.0, 0.0, 1.0, 1.0, 0.75, 0.5]);
        assert_eq!(enc.features.row(1), &[0.0, 1.0, 0.0, 1.0, 0.75, 0.5]);
        assert_eq!(enc.groups[1].columns, 1..3);
        assert_eq!(enc.groups[4].columns, 5..6);
    }

    #[test]
    fn assemble_drops_undefined_rows() {
        let enc = encode_confounders(&[row("a", "t", 1), row("b", "t", 0), row("c", "t", 0)]);
        let (data, dropped) =
            AnalysisDataset::assemble(&enc, &[Some(1), None, Some(0)], &[Some(1.0), Some(2.0), Some(3.0)]).unwrap();
        assert_eq!(dropped, vec!["b"]);
        assert_eq!(data.session_ids, vec!["a", "c"]);
        assert_eq!(data.outcome, vec![1.0, 3.0]);
        data.check_overlap().unwrap();
        assert!(data.subset(&[0]).check_overlap().is_err());
    }

    #[test]
    fn select_groups_keeps_named_blocks() {
        let enc = encode_confounders(&[row("a", "x", 1), row("b", "y", 0)]);
        let (data, _) = AnalysisDataset::assemble(&enc, &[Some(1), Some(0)], &[Some(1.0), Some(2.0)]).unwrap();
        let sub = data.select_groups(&["C2", "C5"]);
        assert_eq!(sub.feature_names, vec!["C2=x", "C2=y", "C5"]);
        assert_eq!(sub.groups[1].columns, 2..3);
        assert_eq!(sub.features.row(1), &[0.0, 1.0, 0.5]);
        assert_eq!(data.select_groups(&[]).features.cols(), 0);
    }

    #[test]
    fn rejects_non_binary_treatment() {
        let enc = encode_confounders(&[row("a", "t", 1)]);
        let err = AnalysisDataset::new(
            enc.session_ids,
            enc.features,
            enc.feature_names,
            enc.groups,
            vec![2],
            vec![0.0],
        );
        assert!(matches!(err, Err(EstimateError::InvalidInput(_))));
    }
}
