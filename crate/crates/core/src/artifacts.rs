//! Intermediate and final CSV tables written to the output directory.
//!
//! | file | producer | one row per |
//! |------|----------|-------------|
//! | `sessions.csv` | ingest | session: confounders C1..C5 and event count |
//! | `documents.csv` | ingest | session: final text and provenance character counts |
//! | `behavior.csv` | ingest | session: episode counts, raw and binarized T1..T3 |
//! | `quality.csv` | metrics | session: Y1..Y4 (empty when undefined) |
//! | `estimates.csv` | estimate | treatment × outcome × learner |
//! | `ite.csv` | estimate | treatment × outcome × session (X-learner) |
//! | `refutations.csv` | refute | treatment × outcome × refuter |
//! | `beeswarm_<T>_<Y>.csv` | explain | session × confounder |
//! | `ate_table.csv` | report | treatment × outcome, effect table layout |
//! | `trend_table.csv` | report | confounder subgroup, trend symbols per outcome × treatment |
//! | `trend_support.csv` | report | subgroup × treatment × outcome with size, mean ITE, consistency |

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SESSIONS: &str = "sessions.csv";
pub const DOCUMENTS: &str = "documents.csv";
pub const BEHAVIOR: &str = "behavior.csv";
pub const QUALITY: &str = "quality.csv";
pub const ESTIMATES: &str = "estimates.csv";
pub const ITE: &str = "ite.csv";
pub const REFUTATIONS: &str = "refutations.csv";
pub const ATE_TABLE: &str = "ate_table.csv";
pub const TREND_TABLE: &str = "trend_table.csv";
pub const TREND_SUPPORT: &str = "trend_support.csv";
pub const MANIFEST: &str = "manifest.json";

pub fn beeswarm_stem(treatment: &str, outcome: &str) -> String {
    format!("beeswarm_{treatment}_{outcome}")
}

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{file} not found in {dir}; run `draftcause {command}` first")]
    Missing { file: &'static str, dir: PathBuf, command: &'static str },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// The subcommand that writes a given artifact.
pub fn producer(file: &str) -> &'static str {
    match file {
        SESSIONS | DOCUMENTS | BEHAVIOR => "ingest",
        QUALITY => "metrics",
        ESTIMATES | ITE => "estimate",
        REFUTATIONS => "refute",
        _ => "run",
    }
}

pub fn read_table<T: DeserializeOwned>(dir: &Path, file: &'static str) -> Result<Vec<T>, ArtifactError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(ArtifactError::Missing { file, dir: dir.to_path_buf(), command: producer(file) });
    }
    let f = File::open(&path).map_err(|source| ArtifactError::Io { path: path.clone(), source })?;
    csv::Reader::from_reader(BufReader::new(f))
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| ArtifactError::Csv { path, source })
}

pub fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ArtifactError> {
    let f = File::create(path).map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })?;
    let csv_err = |source| ArtifactError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })
}

/// Writes a header plus string records (for tables with dynamic columns).
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), ArtifactError> {
    let f = File::create(path).map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })?;
    let csv_err = |source| ArtifactError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRow {
    pub session_id: String,
    pub genre: String,
    pub topic: String,
    pub native: u8,
    pub temperature: f64,
    pub frequency_penalty: f64,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRow {
    pub session_id: String,
    pub chars: usize,
    pub human_chars: usize,
    pub api_verbatim_chars: usize,
    pub api_modified_chars: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRow {
    pub session_id: String,
    pub episodes: usize,
    pub rejected: usize,
    pub accepted_verbatim: usize,
    pub accepted_modified: usize,
    pub t1_raw: f64,
    pub t2_raw: Option<f64>,
    pub t3_raw: Option<f64>,
    pub t1_bin: Option<u8>,
    pub t2_bin: Option<u8>,
    pub t3_bin: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityRow {
    pub session_id: String,
    pub y1: Option<f64>,
    pub y2: Option<f64>,
    pub y3: Option<f64>,
    pub y4: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub treatment: String,
    pub outcome: String,
    pub learner: String,
    /// Confounders adjusted for, `;`-separated.
    pub adjustment_set: String,
    pub rows: usize,
    pub treated: usize,
    pub dropped: usize,
    pub ate: f64,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub bootstrap_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteRow {
    pub treatment: String,
    pub outcome: String,
    pub session_id: String,
    pub w: u8,
    pub y: f64,
    pub ite: f64,
    pub propensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationRow {
    pub treatment: String,
    pub outcome: String,
    pub refuter: String,
    pub original_ate: f64,
    pub new_effect: f64,
    pub sd_effect: f64,
    pub p_value: f64,
    pub simulations: usize,
    pub seed: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteTableRow {
    pub treatment: String,
    pub outcome: String,
    pub ate: f64,
    pub rcc_effect: Option<f64>,
    pub rcc_p_value: Option<f64>,
    pub placebo_effect: Option<f64>,
    pub placebo_p_value: Option<f64>,
    pub dsr_effect: Option<f64>,
    pub dsr_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSupportRow {
    pub confounder: String,
    pub value: String,
    pub treatment: String,
    pub outcome: String,
    pub size: usize,
    pub mean_ite: f64,
    pub consistency: f64,
    pub trend: String,
    pub contradicts_ate: bool,
}
