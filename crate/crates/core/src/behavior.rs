//! Treatment identifiers T1..T3 per session and their corpus-level median split.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Resolution, SuggestionEpisode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Treatment {
    /// Sought suggestions without accepting them.
    T1,
    /// Accepted suggestions without revision.
    T2,
    /// Accepted suggestions and then revised them.
    T3,
}

impl Treatment {
    pub const ALL: [Treatment; 3] = [Treatment::T1, Treatment::T2, Treatment::T3];

    pub fn as_str(self) -> &'static str {
        match self {
            Treatment::T1 => "T1",
            Treatment::T2 => "T2",
            Treatment::T3 => "T3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("median split needs at least 2 sessions, got {0}")]
    TooFewSessions(usize),
    #[error("estimation impossible for {0}: no session has a defined value")]
    EstimationImpossible(Treatment),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorProfile {
    pub session_id: String,
    pub rejected: usize,
    pub accepted_verbatim: usize,
    pub accepted_modified: usize,
    pub t1_raw: f64,
    /// Meaningful only when `valid_t2t3`.
    pub t2_raw: f64,
    pub t3_raw: f64,
    pub valid_t2t3: bool,
    /// `None` until binarized, and for T2/T3 also when the session is excluded.
    pub t1_bin: Option<u8>,
    pub t2_bin: Option<u8>,
    pub t3_bin: Option<u8>,
}

impl BehaviorProfile {
    /// Raw value of a treatment, `None` when undefined for this session.
    pub fn raw(&self, t: Treatment) -> Option<f64> {
        match t {
            Treatment::T1 => Some(self.t1_raw),
            Treatment::T2 => self.valid_t2t3.then_some(self.t2_raw),
            Treatment::T3 => self.valid_t2t3.then_some(self.t3_raw),
        }
    }

    pub fn bin(&self, t: Treatment) -> Option<u8> {
        match t {
            Treatment::T1 => self.t1_bin,
            Treatment::T2 => self.t2_bin,
            Treatment::T3 => self.t3_bin,
        }
    }

    fn set_bin(&mut self, t: Treatment, v: Option<u8>) {
        match t {
            Treatment::T1 => self.t1_bin = v,
            Treatment::T2 => self.t2_bin = v,
            Treatment::T3 => self.t3_bin = v,
        }
    }
}

pub fn extract_behavior_profile(session_id: &str, episodes: &[SuggestionEpisode]) -> BehaviorProfile {
    let count = |r: Resolution| episodes.iter().filter(|e| e.resolution == r).count();
    let rejected = count(Resolution::Rejected);
    let verbatim = count(Resolution::AcceptedVerbatim);
    let modified = count(Resolution::AcceptedModified);
    let accepted = verbatim + modified;
    let valid = accepted > 0;
    let ratio = |k: usize| if valid { k as f64 / accepted as f64 } else { 0.0 };
    BehaviorProfile {
        session_id: session_id.to_owned(),
        rejected,
        accepted_verbatim: verbatim,
        accepted_modified: modified,
        t1_raw: rejected as f64,
        t2_raw: ratio(verbatim),
        t3_raw: ratio(modified),
        valid_t2t3: valid,
        t1_bin: None,
        t2_bin: None,
        t3_bin: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarizedCorpus {
    pub profiles: Vec<BehaviorProfile>,
    medians: [Option<f64>; 3],
}

impl BinarizedCorpus {
    /// Median used for the split, or an error when no session defines the treatment.
    pub fn median(&self, t: Treatment) -> Result<f64, BehaviorError> {
        self.medians[t.slot()].ok_or(BehaviorError::EstimationImpossible(t))
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Splits each treatment at its corpus median: 1 iff raw > median.
pub fn binarize_treatments(profiles: &[BehaviorProfile]) -> Result<BinarizedCorpus, BehaviorError> {
    if profiles.len() < 2 {
        return Err(BehaviorError::TooFewSessions(profiles.len()));
    }
    let mut out = profiles.to_vec();
    let mut medians = [None; 3];
    for t in Treatment::ALL {
        let raws: Vec<f64> = profiles.iter().filter_map(|p| p.raw(t)).collect();
        let m = median(&raws);
        medians[t.slot()] = m;
        for p in out.iter_mut() {
            let bin = match (p.raw(t), m) {
                (Some(raw), Some(m)) => Some(u8::from(raw > m)),
                _ => None,
            };
            p.set_bin(t, bin);
        }
    }
    Ok(BinarizedCorpus { profiles: out, medians })
}
