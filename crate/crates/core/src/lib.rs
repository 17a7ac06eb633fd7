//! Causal analysis of AI-assisted writing sessions.
//!
//! The crate turns raw session event logs into an analysis table and then into
//! causal estimates:
//!
//! - [`ingest`] replays logs into final documents with provenance and splits
//!   them into suggestion episodes,
//! - [`behavior`] derives the three behavioral treatments and binarizes them,
//! - [`metrics`] scores the final essays (lexical sophistication, mean length
//!   of T-unit, semantic overlap, gender bias),
//! - [`graph`] holds the causal DAG and the back-door machinery,
//! - [`estimate`] fits X-learner (plus S/T baselines) effect estimates,
//! - [`refute`] runs random-common-cause, placebo and data-subset checks,
//! - [`explain`] computes exact grouped Shapley attributions of the ITEs,
//! - [`trends`] summarizes subgroup ITE directions,
//! - [`pipeline`] wires everything together behind a config file.

pub mod artifacts;
pub mod behavior;
pub mod estimate;
pub mod explain;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod refute;
pub mod trends;
