//! Subgroup trends of individual effects, summarized as up / down / none.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{median, Treatment};
use crate::estimate::ConfounderRow;
use crate::metrics::Outcome;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("invalid trend rules: {0}")]
    Rules(String),
    #[error("{ite} effects for {rows} confounder rows")]
    Shape { ite: usize, rows: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrendRules {
    /// Minimum share of subgroup effects that must agree with the sign of the mean.
    pub theta: f64,
    pub min_size: usize,
}

impl Default for TrendRules {
    fn default() -> Self {
        TrendRules { theta: 0.6, min_size: 30 }
    }
}

impl TrendRules {
    pub fn validate(&self) -> Result<(), TrendError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(TrendError::Rules(format!("theta must be in (0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Up,
    Down,
    None,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Up => "up",
            Trend::Down => "down",
            Trend::None => "none",
        }
    }

    pub fn negated(self) -> Trend {
        match self {
            Trend::Up => Trend::Down,
            Trend::Down => Trend::Up,
            Trend::None => Trend::None,
        }
    }

    /// Cell text for the summary table; `*` marks a contradiction of the ATE.
    pub fn symbol(self, contradicts: bool) -> &'static str {
        match (self, contradicts) {
            (Trend::Up, false) => "↑",
            (Trend::Up, true) => "↑*",
            (Trend::Down, false) => "↓",
            (Trend::Down, true) => "↓*",
            (Trend::None, _) => "-",
        }
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgroupSummary {
    pub size: usize,
    pub mean_ite: f64,
    /// Share of effects with the same sign as the mean.
    pub consistency: f64,
    pub trend: Trend,
    pub contradicts_ate: bool,
}

pub fn classify_subgroup(ites: &[f64], ate: f64, rules: &TrendRules) -> SubgroupSummary {
    let size = ites.len();
    if size == 0 {
        return SubgroupSummary { size, mean_ite: 0.0, consistency: 0.0, trend: Trend::None, contradicts_ate: false };
    }
    let mean_ite = ites.iter().sum::<f64>() / size as f64;
    let s = sign(mean_ite);
    let consistency = ites.iter().filter(|v| sign(**v) == s).count() as f64 / size as f64;
    let trend = if size < rules.min_size || consistency < rules.theta {
        Trend::None
    } else {
        match s {
            1 => Trend::Up,
            -1 => Trend::Down,
            _ => Trend::None,
        }
    };
    let contradicts_ate = trend != Trend::None && s != sign(ate);
    SubgroupSummary { size, mean_ite, consistency, trend, contradicts_ate }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgroupKey {
    pub confounder: &'static str,
    pub value: String,
}

/// Subgroup definitions over a corpus; C4 and C5 split at the corpus median
/// (strictly above is "High").
#[derive(Debug, Clone, PartialEq)]
pub struct Subgrouping {
    pub temperature_median: f64,
    pub frequency_penalty_median: f64,
    pub topics: Vec<String>,
}

impl Subgrouping {
    pub fn from_corpus(rows: &[ConfounderRow]) -> Self {
        let temps: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
        let pens: Vec<f64> = rows.iter().map(|r| r.frequency_penalty).collect();
        Subgrouping {
            temperature_median: median(&temps).unwrap_or(0.0),
            frequency_penalty_median: median(&pens).unwrap_or(0.0),
            topics: rows.iter().map(|r| r.topic.clone()).collect::<BTreeSet<_>>().into_iter().collect(),
        }
    }

    /// All subgroups in table order.
    pub fn keys(&self) -> Vec<SubgroupKey> {
        let k = |c: &'static str, v: &str| SubgroupKey { confounder: c, value: v.to_owned() };
        let mut out = vec![k("C1", "Argumentative"), k("C1", "Creative")];
        out.extend(self.topics.iter().map(|t| k("C2", t)));
        out.extend([
            k("C3", "Non-native"),
            k("C3", "Native"),
            k("C4", "Low"),
            k("C4", "High"),
            k("C5", "Low"),
            k("C5", "High"),
        ]);
        out
    }

    pub fn member_of(&self, row: &ConfounderRow, key: &SubgroupKey) -> bool {
        let level = |high: bool| if high { "High" } else { "Low" };
        let value = match key.confounder {
            "C1" => if row.genre == 1 { "Creative" } else { "Argumentative" },
            "C2" => row.topic.as_str(),
            "C3" => if row.native == 1 { "Native" } else { "Non-native" },
            "C4" => level(row.temperature > self.temperature_median),
            "C5" => level(row.frequency_penalty > self.frequency_penalty_median),
            _ => return false,
        };
        value == key.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub key: SubgroupKey,
    pub treatment: Treatment,
    pub outcome: Outcome,
    pub summary: SubgroupSummary,
}

/// Classifies every subgroup for one (treatment, outcome) pair. `confounders`
/// must be aligned with `ite`.
pub fn classify_trends(
    treatment: Treatment,
    outcome: Outcome,
    ite: &[f64],
    ate: f64,
    confounders: &[ConfounderRow],
    grouping: &Subgrouping,
    rules: &TrendRules,
) -> Result<Vec<TrendRow>, TrendError> {
    rules.validate()?;
    if ite.len() != confounders.len() {
        return Err(TrendError::Shape { ite: ite.len(), rows: confounders.len() });
    }
    Ok(grouping
        .keys()
        .into_iter()
        .map(|key| {
            let members: Vec<f64> = confounders
                .iter()
                .zip(ite)
                .filter(|(r, _)| grouping.member_of(r, &key))
                .map(|(_, v)| *v)
                .collect();
            let summary = classify_subgroup(&members, ate, rules);
            TrendRow { key, treatment, outcome, summary }
        })
        .collect())
}

/// Summary grid: one row per subgroup, one column per outcome × treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn trend_table(rows: &[TrendRow], grouping: &Subgrouping) -> TrendTable {
    let mut header = vec!["confounder".to_string(), "value".to_string()];
    let mut cols = Vec::new();
    for y in Outcome::ALL {
        for t in Treatment::ALL {
            header.push(format!("{y}_{t}"));
            cols.push((t, y));
        }
    }
    let body = grouping
        .keys()
        .into_iter()
        .map(|key| {
            let mut line = vec![key.confounder.to_string(), key.value.clone()];
            for &(t, y) in &cols {
                let cell = rows
                    .iter()
                    .find(|r| r.key == key && r.treatment == t && r.outcome == y)
                    .map_or("-", |r| r.summary.trend.symbol(r.summary.contradicts_ate));
                line.push(cell.to_string());
            }
            line
        })
        .collect();
    TrendTable { header, rows: body }
}
