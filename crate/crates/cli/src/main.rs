use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use draftcause::graph::write_edge_list;
use draftcause::pipeline::{run_pipeline, run_stage, PipelineConfig, PipelineError, RunOptions, Stage};

/// Causal analysis of AI-assisted writing sessions.
#[derive(Parser, Debug)]
#[command(name = "draftcause", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Causal graph as an edge list (`A -> B` per line); overrides the config.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Record wall-clock time in the manifest.
    #[arg(long, global = true)]
    record_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run every stage.
    Run,
    /// Replay logs into sessions.csv, documents.csv and behavior.csv.
    Ingest,
    /// Score documents into quality.csv.
    Metrics,
    /// Fit effect estimates into estimates.csv and ite.csv.
    Estimate,
    /// Run refuters into refutations.csv.
    Refute,
    /// Write Shapley beeswarm data.
    Explain,
    /// Build the effect and trend tables plus manifest.json from cached CSVs.
    Report,
    /// Print the configured causal graph as an edge list.
    Graph,
}

fn load(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let path = cli.config.as_ref().ok_or_else(|| PipelineError::Config("--config is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(graph) = &cli.graph {
        cfg.input.graph = Some(graph.clone());
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(PipelineError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;
    }
    let cfg = load(cli)?;
    let opts = RunOptions { record_timing: cli.record_timing };
    let stage = match cli.command {
        Command::Run => {
            let manifest = run_pipeline(&cfg, opts)?;
            eprintln!(
                "{} sessions, {} pairs, outputs in {}",
                manifest.sessions,
                manifest.pairs.len(),
                cfg.output.display()
            );
            return Ok(());
        }
        Command::Graph => {
            cfg.validate()?;
            print!("{}", write_edge_list(&cfg.graph()?));
            return Ok(());
        }
        Command::Ingest => Stage::Ingest,
        Command::Metrics => Stage::Metrics,
        Command::Estimate => Stage::Estimate,
        Command::Refute => Stage::Refute,
        Command::Explain => Stage::Explain,
        Command::Report => Stage::Report,
    };
    run_stage(&cfg, stage, opts)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("draftcause: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
