use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Outputs, PipelineConfig, PipelineError, RunOptions, Stage};
use crate::artifacts::{
    beeswarm_stem, read_table, write_records, write_table, AteTableRow, BehaviorRow, DocumentRow, EstimateRow, IteRow,
    QualityRow, RefutationRow, SessionRow, TrendSupportRow, ATE_TABLE, BEHAVIOR, DOCUMENTS, ESTIMATES, ITE, MANIFEST,
    QUALITY, REFUTATIONS, SESSIONS, TREND_SUPPORT, TREND_TABLE,
};
use crate::behavior::{binarize_treatments, extract_behavior_profile, Treatment};
use crate::estimate::{
    encode_confounders, estimate, estimate_with_ci, AnalysisDataset, ConfounderRow, EffectModel, EncodedConfounders,
    LearnerConfig, MetaLearner,
};
use crate::explain::{background_sample, emit_beeswarm_data, shapley_attributions, write_beeswarm_csv, write_beeswarm_svg};
use crate::graph::CausalGraph;
use crate::ingest::{load_corpus, replay, segment_with_replay, Genre, Origin};
use crate::metrics::text::words;
use crate::metrics::{advanced_guiraud, genbit_score, mean_length_tunit, semantic_overlap, Lexicons, Outcome};
use crate::refute::{run_refuter, RefuteConfig, Refuter};
use crate::trends::{classify_trends, trend_table, Subgrouping, TrendRow};

const CONFOUNDERS: [&str; 5] = ["C1", "C2", "C3", "C4", "C5"];

pub(super) fn run(
    cfg: &PipelineConfig,
    stage: Stage,
    out: &mut Outputs,
    opts: RunOptions,
    start: Instant,
) -> Result<(), PipelineError> {
    match stage {
        Stage::Config => Ok(()),
        Stage::Ingest => ingest(cfg, out),
        Stage::Metrics => metrics(cfg, out),
        Stage::Estimate => estimate_stage(cfg, out),
        Stage::Refute => refute_stage(cfg, out),
        Stage::Explain => explain_stage(cfg, out),
        Stage::Report => report(cfg, out, opts.record_timing.then(|| start.elapsed().as_millis() as u64)),
    }
}

fn write<T: Serialize>(out: &mut Outputs, stage: Stage, name: &str, rows: &[T]) -> Result<(), PipelineError> {
    let path = out.claim(name);
    write_table(&path, rows).map_err(|e| PipelineError::artifact(stage, e))
}

fn read<T: serde::de::DeserializeOwned>(dir: &Path, stage: Stage, file: &'static str) -> Result<Vec<T>, PipelineError> {
    read_table(dir, file).map_err(|e| PipelineError::artifact(stage, e))
}

fn genre_name(g: Genre) -> &'static str {
    match g {
        Genre::Argumentative => "argumentative",
        Genre::Creative => "creative",
    }
}

fn ingest(cfg: &PipelineConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let st = Stage::Ingest;
    let corpus = load_corpus(&cfg.input.sessions, &cfg.input.metadata).map_err(|e| PipelineError::data(st, e))?;
    let per_session: Vec<_> = corpus
        .sessions
        .par_iter()
        .map(|log| {
            let context = |e: crate::ingest::IngestError| PipelineError::data(st, format!("session {}: {e}", log.session_id));
            let replayed = replay(log).map_err(context)?;
            let episodes = segment_with_replay(log, &replayed).map_err(context)?;
            let profile = extract_behavior_profile(&log.session_id, &episodes);
            let mut by_origin = [0usize; 3];
            for span in &replayed.document.spans {
                let slot = match span.origin {
                    Origin::Human => 0,
                    Origin::ApiVerbatim => 1,
                    Origin::ApiModified => 2,
                };
                by_origin[slot] += span.len();
            }
            let m = &log.meta;
            let session = SessionRow {
                session_id: log.session_id.clone(),
                genre: genre_name(m.genre).to_owned(),
                topic: m.topic.clone(),
                native: u8::from(m.native),
                temperature: m.temperature,
                frequency_penalty: m.frequency_penalty,
                events: log.events.len(),
            };
            let document = DocumentRow {
                session_id: log.session_id.clone(),
                chars: replayed.document.char_len(),
                human_chars: by_origin[0],
                api_verbatim_chars: by_origin[1],
                api_modified_chars: by_origin[2],
                text: replayed.document.text.clone(),
            };
            Ok((session, document, profile, episodes.len()))
        })
        .collect::<Vec<Result<_, PipelineError>>>()
        .into_iter()
        .collect::<Result<_, _>>()?;

    let profiles: Vec<_> = per_session.iter().map(|s| s.2.clone()).collect();
    let binned = binarize_treatments(&profiles).map_err(|e| PipelineError::data(st, e))?;
    let behavior: Vec<BehaviorRow> = binned
        .profiles
        .iter()
        .zip(&per_session)
        .map(|(p, s)| BehaviorRow {
            session_id: p.session_id.clone(),
            episodes: s.3,
            rejected: p.rejected,
            accepted_verbatim: p.accepted_verbatim,
            accepted_modified: p.accepted_modified,
            t1_raw: p.t1_raw,
            t2_raw: p.raw(Treatment::T2),
            t3_raw: p.raw(Treatment::T3),
            t1_bin: p.t1_bin,
            t2_bin: p.t2_bin,
            t3_bin: p.t3_bin,
        })
        .collect();
    let sessions: Vec<SessionRow> = per_session.iter().map(|s| s.0.clone()).collect();
    let documents: Vec<DocumentRow> = per_session.into_iter().map(|s| s.1).collect();
    write(out, st, SESSIONS, &sessions)?;
    write(out, st, DOCUMENTS, &documents)?;
    write(out, st, BEHAVIOR, &behavior)
}

fn metrics(cfg: &PipelineConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let st = Stage::Metrics;
    let docs: Vec<DocumentRow> = read(out.dir(), st, DOCUMENTS)?;
    let k = cfg.metrics.common_top_k;
    let lex = match &cfg.input.lexicons {
        Some(dir) => Lexicons::load_dir(dir, k),
        None => Lexicons::bundled_with_top_k(k),
    }
    .map_err(|e| PipelineError::Config(e.to_string()))?;
    let window = cfg.metrics.genbit_window;
    let rows: Vec<QualityRow> = docs
        .par_iter()
        .map(|d| {
            let has_words = !words(&d.text).is_empty();
            QualityRow {
                session_id: d.session_id.clone(),
                y1: has_words.then(|| advanced_guiraud(&d.text, &lex)),
                y2: mean_length_tunit(&d.text).ok(),
                y3: semantic_overlap(&d.text, &lex).ok(),
                y4: has_words.then(|| genbit_score(&d.text, &lex, window)),
            }
        })
        .collect();
    write(out, st, QUALITY, &rows)
}

fn session_confounders(rows: &[SessionRow]) -> Vec<ConfounderRow> {
    rows.iter()
        .map(|s| ConfounderRow {
            session_id: s.session_id.clone(),
            genre: u8::from(s.genre == "creative"),
            topic: s.topic.clone(),
            native: s.native,
            temperature: s.temperature,
            frequency_penalty: s.frequency_penalty,
        })
        .collect()
}

struct Inputs {
    encoded: EncodedConfounders,
    behavior: Vec<BehaviorRow>,
    quality: Vec<QualityRow>,
}

fn load_inputs(dir: &Path, st: Stage) -> Result<Inputs, PipelineError> {
    let sessions: Vec<SessionRow> = read(dir, st, SESSIONS)?;
    let behavior: Vec<BehaviorRow> = read(dir, st, BEHAVIOR)?;
    let quality: Vec<QualityRow> = read(dir, st, QUALITY)?;
    let aligned = |ids: Vec<&str>| ids.len() == sessions.len() && ids.iter().zip(&sessions).all(|(a, s)| *a == s.session_id);
    if !aligned(behavior.iter().map(|b| b.session_id.as_str()).collect()) {
        return Err(PipelineError::data(st, format!("{BEHAVIOR} does not match {SESSIONS}; rerun `draftcause ingest`")));
    }
    if !aligned(quality.iter().map(|q| q.session_id.as_str()).collect()) {
        return Err(PipelineError::data(st, format!("{QUALITY} does not match {SESSIONS}; rerun `draftcause metrics`")));
    }
    Ok(Inputs { encoded: encode_confounders(&session_confounders(&sessions)), behavior, quality })
}

fn bin(b: &BehaviorRow, t: Treatment) -> Option<u8> {
    match t {
        Treatment::T1 => b.t1_bin,
        Treatment::T2 => b.t2_bin,
        Treatment::T3 => b.t3_bin,
    }
}

fn outcome_value(q: &QualityRow, y: Outcome) -> Option<f64> {
    match y {
        Outcome::Y1 => q.y1,
        Outcome::Y2 => q.y2,
        Outcome::Y3 => q.y3,
        Outcome::Y4 => q.y4,
    }
}

/// Prefers the treatment's parent set (all confounders on the default graph),
/// otherwise the smallest valid set.
fn adjustment_set(graph: &CausalGraph, t: Treatment, y: Outcome) -> Result<Vec<String>, PipelineError> {
    let sets = graph.backdoor_sets(t.as_str(), y.as_str()).map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut parents: Vec<String> = graph
        .parents_of(t.as_str())
        .map_err(|e| PipelineError::Config(e.to_string()))?
        .into_iter()
        .filter(|p| *p != y.as_str())
        .map(String::from)
        .collect();
    parents.sort();
    let chosen = if sets.contains(&parents) {
        parents
    } else {
        sets.into_iter().next().ok_or_else(|| {
            PipelineError::estimation(Stage::Estimate, format!("{t}/{y}: no back-door adjustment set exists in the graph"))
        })?
    };
    if let Some(bad) = chosen.iter().find(|n| !CONFOUNDERS.contains(&n.as_str())) {
        return Err(PipelineError::Config(format!(
            "{t}/{y}: adjustment set needs {bad}, which is not a measured confounder (C1..C5)"
        )));
    }
    Ok(chosen)
}

struct PairData {
    dataset: AnalysisDataset,
    dropped: usize,
    adjustment: Vec<String>,
}

fn pair_data(inputs: &Inputs, graph: &CausalGraph, t: Treatment, y: Outcome, st: Stage) -> Result<PairData, PipelineError> {
    let adjustment = adjustment_set(graph, t, y)?;
    let treatment: Vec<Option<u8>> = inputs.behavior.iter().map(|b| bin(b, t)).collect();
    let outcome: Vec<Option<f64>> = inputs.quality.iter().map(|q| outcome_value(q, y)).collect();
    let (dataset, dropped) = AnalysisDataset::assemble(&inputs.encoded, &treatment, &outcome)
        .map_err(|e| PipelineError::data(st, format!("{t}/{y}: {e}")))?;
    let names: Vec<&str> = adjustment.iter().map(String::as_str).collect();
    let dataset = dataset.select_groups(&names);
    dataset.check_overlap().map_err(|e| PipelineError::estimation(st, format!("{t}/{y}: {e}")))?;
    Ok(PairData { dataset, dropped: dropped.len(), adjustment })
}

#[derive(Clone, Copy)]
enum Purpose {
    Learner = 0,
    Bootstrap = 1,
    Refute = 2,
    Shap = 6,
}

/// Independent per-pair, per-purpose seed derived from the run seed.
fn derive_seed(base: u64, t: Treatment, y: Outcome, purpose: Purpose, extra: u64) -> u64 {
    let tag = ((t as u64) << 40) | ((y as u64) << 32) | ((purpose as u64 + extra) << 8);
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn learner_config(cfg: &PipelineConfig, t: Treatment, y: Outcome) -> LearnerConfig {
    LearnerConfig { seed: derive_seed(cfg.seed, t, y, Purpose::Learner, 0), ..cfg.learner.clone() }
}

fn estimate_stage(cfg: &PipelineConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let st = Stage::Estimate;
    let inputs = load_inputs(out.dir(), st)?;
    let graph = cfg.graph()?;
    let mut estimates = Vec::new();
    let mut ites = Vec::new();
    for (t, y) in cfg.pairs() {
        let pd = pair_data(&inputs, &graph, t, y, st)?;
        let lc = learner_config(cfg, t, y);
        let fail = |e: crate::estimate::EstimateError| PipelineError::estimation(st, format!("{t}/{y}: {e}"));
        let boot_seed = derive_seed(cfg.seed, t, y, Purpose::Bootstrap, 0);
        let x = estimate_with_ci(&pd.dataset, MetaLearner::X, &lc, cfg.analysis.bootstrap, boot_seed).map_err(fail)?;
        let row = |learner: MetaLearner, ate: f64, ci: Option<(f64, f64)>, boot_dropped: usize| EstimateRow {
            treatment: t.to_string(),
            outcome: y.to_string(),
            learner: learner.as_str().to_owned(),
            adjustment_set: pd.adjustment.join(";"),
            rows: pd.dataset.len(),
            treated: pd.dataset.treated_count(),
            dropped: pd.dropped,
            ate,
            ci_lower: ci.map(|c| c.0),
            ci_upper: ci.map(|c| c.1),
            bootstrap_dropped: boot_dropped,
        };
        estimates.push(row(MetaLearner::X, x.ate, x.ci95.map(|c| (c.lower, c.upper)), x.bootstrap_dropped));
        let propensity = x.propensity.clone().unwrap_or_default();
        for i in 0..pd.dataset.len() {
            ites.push(IteRow {
                treatment: t.to_string(),
                outcome: y.to_string(),
                session_id: pd.dataset.session_ids[i].clone(),
                w: pd.dataset.treatment[i],
                y: pd.dataset.outcome[i],
                ite: x.ite[i],
                propensity: propensity.get(i).copied().unwrap_or(f64::NAN),
            });
        }
        if cfg.analysis.baselines {
            for learner in [MetaLearner::S, MetaLearner::T] {
                let r = estimate(&pd.dataset, learner, &lc).map_err(fail)?;
                estimates.push(row(learner, r.ate, None, 0));
            }
        }
    }
    write(out, st, ESTIMATES, &estimates)?;
    write(out, st, ITE, &ites)
}

fn x_estimate<'a>(rows: &'a [EstimateRow], t: Treatment, y: Outcome, st: Stage) -> Result<&'a EstimateRow, PipelineError> {
    rows.iter()
        .find(|r| r.learner == MetaLearner::X.as_str() && r.treatment == t.as_str() && r.outcome == y.as_str())
        .ok_or_else(|| {
            PipelineError::data(st, format!("{ESTIMATES} has no X-learner row for {t}/{y}; rerun `draftcause estimate`"))
        })
}

fn refute_stage(cfg: &PipelineConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let st = Stage::Refute;
    let inputs = load_inputs(out.dir(), st)?;
    let estimates: Vec<EstimateRow> = read(out.dir(), st, ESTIMATES)?;
    let graph = cfg.graph()?;
    let mut rows = Vec::new();
    for (t, y) in cfg.pairs() {
        let original = x_estimate(&estimates, t, y, st)?.ate;
        let pd = pair_data(&inputs, &graph, t, y, st)?;
        let lc = learner_config(cfg, t, y);
        for (k, refuter) in Refuter::ALL.into_iter().enumerate() {
            let rc = RefuteConfig { seed: derive_seed(cfg.seed, t, y, Purpose::Refute, k as u64), ..cfg.refute.clone() };
            let report = run_refuter(&pd.dataset, original, refuter, &rc, |d| estimate(d, MetaLearner::X, &lc).map(|r| r.ate))
                .map_err(|e| PipelineError::estimation(st, format!("{t}/{y} {}: {e}", refuter.as_str())))?;
            rows.push(RefutationRow {
                treatment: t.to_string(),
                outcome: y.to_string(),
                refuter: refuter.as_str().to_owned(),
                original_ate: original,
                new_effect: report.mean_effect,
                sd_effect: report.sd_effect,
                p_value: report.p_value,
                simulations: report.simulations,
                seed: report.seed,
                passed: report.p_value > 0.05,
            });
        }
    }
    write(out, st, REFUTATIONS, &rows)
}

fn explain_stage(cfg: &PipelineConfig, out: &mut Outputs) -> Result<(), PipelineError> {
    let st = Stage::Explain;
    let inputs = load_inputs(out.dir(), st)?;
    let graph = cfg.graph()?;
    for (t, y) in cfg.pairs() {
        let pd = pair_data(&inputs, &graph, t, y, st)?;
        let fail = |e: &dyn std::fmt::Display| PipelineError::estimation(st, format!("{t}/{y}: {e}"));
        let model = EffectModel::fit(&pd.dataset, MetaLearner::X, &learner_config(cfg, t, y)).map_err(|e| fail(&e))?;
        let x = &pd.dataset.features;
        let bg = background_sample(x, cfg.shap.background, derive_seed(cfg.seed, t, y, Purpose::Shap, 0));
        let shap = shapley_attributions(|r| model.predict_ite(r), x, &pd.dataset.session_ids, &bg, &pd.dataset.groups)
            .map_err(|e| fail(&e))?;
        let rows = emit_beeswarm_data(&shap, x).map_err(|e| fail(&e))?;
        let stem = beeswarm_stem(t.as_str(), y.as_str());
        let csv_path = out.claim(&format!("{stem}.csv"));
        let file = File::create(&csv_path).map_err(|e| PipelineError::data(st, format!("{}: {e}", csv_path.display())))?;
        write_beeswarm_csv(&rows, BufWriter::new(file)).map_err(|e| PipelineError::data(st, e))?;
        if cfg.shap.svg {
            let svg_path = out.claim(&format!("{stem}.svg"));
            std::fs::write(&svg_path, write_beeswarm_svg(&rows, &format!("{t} on {y}")))
                .map_err(|e| PipelineError::data(st, format!("{}: {e}", svg_path.display())))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairManifest {
    pub treatment: String,
    pub outcome: String,
    pub rows: usize,
    pub treated: usize,
    pub dropped_sessions: Vec<String>,
}

/// Run record written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub sessions: usize,
    pub pairs: Vec<PairManifest>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

pub(super) fn read_manifest(dir: &Path) -> Result<Manifest, PipelineError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::data(Stage::Report, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::data(Stage::Report, format!("{}: {e}", path.display())))
}

fn report(cfg: &PipelineConfig, out: &mut Outputs, wall_time_ms: Option<u64>) -> Result<(), PipelineError> {
    let st = Stage::Report;
    let dir = out.dir().to_path_buf();
    let sessions: Vec<SessionRow> = read(&dir, st, SESSIONS)?;
    let estimates: Vec<EstimateRow> = read(&dir, st, ESTIMATES)?;
    let refutations: Vec<RefutationRow> = read(&dir, st, REFUTATIONS)?;
    let ites: Vec<IteRow> = read(&dir, st, ITE)?;

    let find_ref = |t: &str, y: &str, r: Refuter| {
        refutations.iter().find(|x| x.treatment == t && x.outcome == y && x.refuter == r.as_str())
    };
    let mut ate_rows = Vec::new();
    for e in estimates.iter().filter(|e| e.learner == MetaLearner::X.as_str()) {
        let cell = |r: Refuter| find_ref(&e.treatment, &e.outcome, r).map(|x| (x.new_effect, x.p_value));
        let (rcc, placebo, dsr) = (cell(Refuter::RandomCommonCause), cell(Refuter::Placebo), cell(Refuter::DataSubset));
        ate_rows.push(AteTableRow {
            treatment: e.treatment.clone(),
            outcome: e.outcome.clone(),
            ate: e.ate,
            rcc_effect: rcc.map(|v| v.0),
            rcc_p_value: rcc.map(|v| v.1),
            placebo_effect: placebo.map(|v| v.0),
            placebo_p_value: placebo.map(|v| v.1),
            dsr_effect: dsr.map(|v| v.0),
            dsr_p_value: dsr.map(|v| v.1),
        });
    }

    let confounders = session_confounders(&sessions);
    let by_id: HashMap<&str, &ConfounderRow> = confounders.iter().map(|c| (c.session_id.as_str(), c)).collect();
    let grouping = Subgrouping::from_corpus(&confounders);
    let mut trend_rows: Vec<TrendRow> = Vec::new();
    let mut pairs = Vec::new();
    for e in estimates.iter().filter(|e| e.learner == MetaLearner::X.as_str()) {
        let bad = || PipelineError::data(st, format!("{ESTIMATES}: unknown pair {}/{}", e.treatment, e.outcome));
        let t = Treatment::parse(&e.treatment).ok_or_else(bad)?;
        let y = Outcome::parse(&e.outcome).ok_or_else(bad)?;
        let pair_ites: Vec<&IteRow> = ites.iter().filter(|r| r.treatment == e.treatment && r.outcome == e.outcome).collect();
        let mut rows = Vec::with_capacity(pair_ites.len());
        for r in &pair_ites {
            let c = by_id.get(r.session_id.as_str()).ok_or_else(|| {
                PipelineError::data(st, format!("{ITE} names unknown session {}; rerun `draftcause estimate`", r.session_id))
            })?;
            rows.push((*c).clone());
        }
        let values: Vec<f64> = pair_ites.iter().map(|r| r.ite).collect();
        trend_rows.extend(
            classify_trends(t, y, &values, e.ate, &rows, &grouping, &cfg.trends).map_err(|err| PipelineError::data(st, err))?,
        );
        let kept: std::collections::HashSet<&str> = pair_ites.iter().map(|r| r.session_id.as_str()).collect();
        pairs.push(PairManifest {
            treatment: e.treatment.clone(),
            outcome: e.outcome.clone(),
            rows: e.rows,
            treated: e.treated,
            dropped_sessions: sessions
                .iter()
                .filter(|s| !kept.contains(s.session_id.as_str()))
                .map(|s| s.session_id.clone())
                .collect(),
        });
    }
    let table = trend_table(&trend_rows, &grouping);
    let support: Vec<TrendSupportRow> = trend_rows
        .iter()
        .map(|r| TrendSupportRow {
            confounder: r.key.confounder.to_owned(),
            value: r.key.value.clone(),
            treatment: r.treatment.to_string(),
            outcome: r.outcome.to_string(),
            size: r.summary.size,
            mean_ite: r.summary.mean_ite,
            consistency: r.summary.consistency,
            trend: r.summary.trend.as_str().to_owned(),
            contradicts_ate: r.summary.contradicts_ate,
        })
        .collect();

    write(out, st, ATE_TABLE, &ate_rows)?;
    let table_path = out.claim(TREND_TABLE);
    write_records(&table_path, &table.header, &table.rows).map_err(|e| PipelineError::artifact(st, e))?;
    write(out, st, TREND_SUPPORT, &support)?;

    let mut outputs: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| PipelineError::data(st, format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .filter_map(|entry| entry.file_name().into_string().ok())
        .filter(|name| name != MANIFEST)
        .collect();
    outputs.push(MANIFEST.to_owned());
    outputs.sort();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        sessions: sessions.len(),
        pairs,
        outputs,
        wall_time_ms,
    };
    let path = out.claim(MANIFEST);
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::data(st, e))?;
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| PipelineError::data(st, format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_pair_and_purpose() {
        let a = derive_seed(1, Treatment::T1, Outcome::Y1, Purpose::Learner, 0);
        assert_ne!(a, derive_seed(1, Treatment::T1, Outcome::Y2, Purpose::Learner, 0));
        assert_ne!(a, derive_seed(1, Treatment::T2, Outcome::Y1, Purpose::Learner, 0));
        assert_ne!(a, derive_seed(1, Treatment::T1, Outcome::Y1, Purpose::Bootstrap, 0));
        assert_ne!(a, derive_seed(2, Treatment::T1, Outcome::Y1, Purpose::Learner, 0));
        assert_eq!(a, derive_seed(1, Treatment::T1, Outcome::Y1, Purpose::Learner, 0));
    }

    #[test]
    fn default_graph_adjusts_for_all_confounders() {
        let g = CausalGraph::default_graph();
        for t in Treatment::ALL {
            for y in Outcome::ALL {
                assert_eq!(adjustment_set(&g, t, y).unwrap(), CONFOUNDERS.map(String::from).to_vec());
            }
        }
    }

    #[test]
    fn unmeasured_adjustment_is_a_config_error() {
        let g = CausalGraph::from_edges(&[("U", "T1"), ("U", "Y1"), ("T1", "Y1")]);
        let err = adjustment_set(&g, Treatment::T1, Outcome::Y1).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
