//! Config-driven orchestration. Every stage reads its inputs from and writes
//! its tables to one output directory, so a full run is exactly the sequence
//! ingest, metrics, estimate, refute, explain, report.

mod stages;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::artifacts::ArtifactError;
use crate::behavior::Treatment;
use crate::estimate::LearnerConfig;
use crate::graph::{parse_edge_list, CausalGraph};
use crate::metrics::{Outcome, DEFAULT_COMMON_TOP_K, DEFAULT_GENBIT_WINDOW};
use crate::refute::RefuteConfig;
use crate::trends::TrendRules;

pub use stages::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Metrics,
    Estimate,
    Refute,
    Explain,
    Report,
}

impl Stage {
    pub const PIPELINE: [Stage; 6] =
        [Stage::Ingest, Stage::Metrics, Stage::Estimate, Stage::Refute, Stage::Explain, Stage::Report];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Metrics => "metrics",
            Stage::Estimate => "estimate",
            Stage::Refute => "refute",
            Stage::Explain => "explain",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Data { stage: Stage, message: String },
    #[error("{stage}: {message}")]
    Estimation { stage: Stage, message: String },
}

impl PipelineError {
    /// Process exit code: 1 config, 2 data, 3 estimation.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data { .. } => 2,
            PipelineError::Estimation { .. } => 3,
        }
    }

    pub(crate) fn data(stage: Stage, e: impl fmt::Display) -> Self {
        PipelineError::Data { stage, message: e.to_string() }
    }

    pub(crate) fn estimation(stage: Stage, e: impl fmt::Display) -> Self {
        PipelineError::Estimation { stage, message: e.to_string() }
    }

    pub(crate) fn artifact(stage: Stage, e: ArtifactError) -> Self {
        Self::data(stage, e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Directory of `<session_id>.jsonl` logs.
    pub sessions: PathBuf,
    /// Metadata CSV with C1..C5 per session.
    pub metadata: PathBuf,
    /// Directory with replacement word lists; bundled lists when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicons: Option<PathBuf>,
    /// Edge-list DAG; the built-in graph when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub treatments: Vec<Treatment>,
    pub outcomes: Vec<Outcome>,
    /// Also report S- and T-learner point estimates.
    pub baselines: bool,
    /// Bootstrap replicates for the X-learner interval; 0 disables it.
    pub bootstrap: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { treatments: Treatment::ALL.to_vec(), outcomes: Outcome::ALL.to_vec(), baselines: true, bootstrap: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub genbit_window: usize,
    pub common_top_k: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { genbit_window: DEFAULT_GENBIT_WINDOW, common_top_k: DEFAULT_COMMON_TOP_K }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapConfig {
    pub background: usize,
    pub svg: bool,
}

impl Default for ShapConfig {
    fn default() -> Self {
        ShapConfig { background: crate::explain::DEFAULT_BACKGROUND, svg: true }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub input: InputConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub refute: RefuteConfig,
    #[serde(default)]
    pub shap: ShapConfig,
    #[serde(default)]
    pub trends: TrendRules,
}

impl PipelineConfig {
    /// Parses TOML; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.output);
        fix(&mut cfg.input.sessions);
        fix(&mut cfg.input.metadata);
        if let Some(p) = cfg.input.lexicons.as_mut() {
            fix(p);
        }
        if let Some(p) = cfg.input.graph.as_mut() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let base = std::fs::canonicalize(parent)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", parent.display())))?;
        Self::from_toml(&text, &base)
    }

    /// Checks values and that every referenced input exists.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg_err = |m: String| Err(PipelineError::Config(m));
        let need = |p: &Path, dir: bool, what: &str| {
            let ok = if dir { p.is_dir() } else { p.is_file() };
            if ok {
                Ok(())
            } else {
                Err(PipelineError::Config(format!("{what} {} does not exist", p.display())))
            }
        };
        need(&self.input.sessions, true, "session directory")?;
        need(&self.input.metadata, false, "metadata file")?;
        if let Some(p) = &self.input.lexicons {
            need(p, true, "lexicon directory")?;
        }
        if let Some(p) = &self.input.graph {
            need(p, false, "graph file")?;
        }
        let a = &self.analysis;
        if a.treatments.is_empty() || a.outcomes.is_empty() {
            return cfg_err("analysis needs at least one treatment and one outcome".into());
        }
        let mut t = a.treatments.clone();
        t.sort();
        t.dedup();
        let mut o = a.outcomes.clone();
        o.sort();
        o.dedup();
        if t.len() != a.treatments.len() || o.len() != a.outcomes.len() {
            return cfg_err("treatments and outcomes must not repeat".into());
        }
        if a.bootstrap != 0 && a.bootstrap < crate::estimate::MIN_REPLICATES {
            return cfg_err(format!(
                "bootstrap must be 0 or at least {}, got {}",
                crate::estimate::MIN_REPLICATES,
                a.bootstrap
            ));
        }
        if self.metrics.genbit_window == 0 || self.metrics.common_top_k == 0 {
            return cfg_err("genbit_window and common_top_k must be positive".into());
        }
        if self.shap.background == 0 {
            return cfg_err("shap background must be positive".into());
        }
        self.learner.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.refute.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.trends.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let g = self.graph()?;
        for name in t.iter().map(|t| t.as_str()).chain(o.iter().map(|o| o.as_str())) {
            if !g.contains(name) {
                return cfg_err(format!("graph has no node {name}"));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<CausalGraph, PipelineError> {
        match &self.input.graph {
            None => Ok(CausalGraph::default_graph()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
                parse_edge_list(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// SHA-256 of the canonical configuration, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        let text = toml::to_string(&c).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Treatment × outcome pairs in configured order.
    pub fn pairs(&self) -> Vec<(Treatment, Outcome)> {
        let mut out = Vec::new();
        for &t in &self.analysis.treatments {
            for &o in &self.analysis.outcomes {
                out.push((t, o));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Store wall-clock time in the manifest (makes outputs run-dependent).
    pub record_timing: bool,
}

/// Files written by the current invocation, removed again if it fails.
pub(crate) struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| PipelineError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub(crate) fn dir(&self) -> &Path {
        &self.dir
    }

    pub(crate) fn claim(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn discard(self) {
        for p in self.written {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn with_outputs<T>(
    cfg: &PipelineConfig,
    body: impl FnOnce(&mut Outputs) -> Result<T, PipelineError>,
) -> Result<T, PipelineError> {
    cfg.validate()?;
    let mut out = Outputs::new(&cfg.output)?;
    match body(&mut out) {
        Ok(v) => Ok(v),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

/// Runs a single stage against the output directory.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage, opts: RunOptions) -> Result<(), PipelineError> {
    let start = Instant::now();
    with_outputs(cfg, |out| stages::run(cfg, stage, out, opts, start))
}

/// Runs every stage in order and returns the manifest.
pub fn run_pipeline(cfg: &PipelineConfig, opts: RunOptions) -> Result<Manifest, PipelineError> {
    let start = Instant::now();
    with_outputs(cfg, |out| {
        for stage in Stage::PIPELINE {
            stages::run(cfg, stage, out, opts, start)?;
        }
        stages::read_manifest(out.dir())
    })
}
