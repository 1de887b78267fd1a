//! `lasp`: run repair episodes on scenario bundles and benchmark them.

mod bench;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use lasp_core::engine::{run_episode, EngineError, EpisodeOptions, EpisodeResult, Outcome};
use lasp_core::llm::LlmError;
use lasp_core::oracle::{validate_bundle, ObservationMode};
use lasp_core::planner::{render_plan, Heuristic};
use lasp_core::{Rational, Scenario};
use rayon::prelude::*;
use serde_json::json;

use bench::{build_report, EpisodeRecord};
use config::{BackendSpec, FileConfig, RunConfig};

const EXIT_SUCCESS: u8 = 0;
const EXIT_UNSOLVED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "lasp", version, about = "Plan with an incomplete model and repair it from execution errors")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Overrides {
    /// live | replay[:FILE] | scripted[:FILE]
    #[arg(long)]
    backend: Option<String>,
    #[arg(long, value_enum)]
    observation: Option<ObservationArg>,
    #[arg(long, value_enum)]
    heuristic: Option<HeuristicArg>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_reasons: Option<usize>,
    #[arg(long)]
    max_replans: Option<usize>,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Planner time limit per call, in milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// Model id for the live backend.
    #[arg(long)]
    model: Option<String>,
    /// Chat-completions base URL for the live backend.
    #[arg(long)]
    endpoint: Option<String>,
    /// Sampling seed sent to the live backend.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy)]
enum ObservationArg {
    Template,
    Paraphrase,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy)]
enum HeuristicArg {
    Blind,
    Additive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one episode.
    Run {
        scenario: PathBuf,
        /// Directory for the event log, plan and result summary.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_validate: bool,
        #[command(flatten)]
        o: Overrides,
    },
    /// Run one episode (live by default) and save the language-model transcript.
    Record {
        scenario: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Run one episode answering every role from a transcript.
    Replay {
        scenario: PathBuf,
        transcript: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Run every scenario several times and report success rates.
    Bench {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Text report path; a `.json` sibling is written next to it.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall time in the report.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        o: Overrides,
    },
    /// Check scenario bundles.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

fn merge(file: &FileConfig, o: &Overrides, default_backend: &str) -> Result<RunConfig> {
    let backend = BackendSpec::parse(o.backend.as_deref().or(file.backend.as_deref()).unwrap_or(default_backend))?;
    let mut budgets = file.budgets;
    let set = |dst: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut budgets.max_recursion_depth, o.max_depth);
    set(&mut budgets.max_reasons_per_error, o.max_reasons);
    set(&mut budgets.max_replans, o.max_replans);
    set(&mut budgets.search.max_nodes, o.max_nodes);
    if let Some(ms) = o.time_limit_ms {
        budgets.search.time_limit = Some(Duration::from_millis(ms));
    }
    if let Some(h) = o.heuristic {
        budgets.search.heuristic = match h {
            HeuristicArg::Blind => Heuristic::Blind,
            HeuristicArg::Additive => Heuristic::Additive,
        };
    }
    let observation = match o.observation {
        Some(ObservationArg::Template) => ObservationMode::Template,
        Some(ObservationArg::Paraphrase) => ObservationMode::Paraphrase,
        None => file.observation.unwrap_or_default(),
    };
    let mut live = file.live.clone();
    if let Some(m) = &o.model {
        live.model = m.clone();
    }
    if let Some(e) = &o.endpoint {
        live.endpoint = e.clone();
    }
    if let Some(s) = o.seed.or(file.seed) {
        live.seed = Some(s);
    }
    let cfg = RunConfig {
        backend,
        budgets,
        observation,
        live,
        repetitions: file.repetitions.unwrap_or(5),
        workers: file.workers.unwrap_or(0),
        report: file.report.clone(),
    };
    Ok(cfg)
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_INVALID, error: e.into() }
    }

    fn backend(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_BACKEND, error: e.into() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::Llm(_) => EXIT_BACKEND,
            _ => EXIT_INVALID,
        };
        Failure { code, error: e.into() }
    }
}

fn load(dir: &Path) -> Result<Scenario, Failure> {
    Scenario::load(dir).with_context(|| format!("loading {}", dir.display())).map_err(Failure::invalid)
}

fn episode(
    scenario: &Scenario,
    cfg: &RunConfig,
    validate: bool,
) -> Result<EpisodeResult<Rational>, Failure> {
    let backend = cfg.backend.build(&scenario.dir, &cfg.live).map_err(Failure::backend)?;
    let opts = EpisodeOptions { validate, observation: cfg.observation };
    Ok(run_episode(scenario, backend.as_ref(), &cfg.budgets, &opts)?)
}

fn summary(r: &EpisodeResult<Rational>) -> serde_json::Value {
    json!({
        "scenario": r.scenario,
        "outcome": r.outcome,
        "executions": r.executions,
        "oracle_steps": r.oracle_steps,
        "max_depth": r.max_depth,
        "refinements": r.mutations(),
        "events": r.events.len(),
        "plan": r.final_plan.as_ref().map(|p| p.steps.iter().map(ToString::to_string).collect::<Vec<_>>()),
        "last_error": r.last_error,
    })
}

fn write_outputs(out: &Path, r: &EpisodeResult<Rational>) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("events.jsonl"), r.event_log())?;
    let plan = r.final_plan.as_ref().map(|p| render_plan(&p.steps)).unwrap_or_default();
    fs::write(out.join("plan.txt"), plan)?;
    fs::write(out.join("result.json"), serde_json::to_string_pretty(&summary(r))? + "\n")?;
    Ok(())
}

fn report_episode(r: &EpisodeResult<Rational>) {
    println!("{}: {}", r.scenario, r.outcome.name());
    for e in &r.events {
        let class = e.error_class.as_ref().map(|c| format!(" [{c}]")).unwrap_or_default();
        let detail = match &e.kind {
            lasp_core::engine::EventKind::PreconditionAdded { schema, conjunct, .. } => format!("{schema} += {conjunct}"),
            lasp_core::engine::EventKind::PropertyAdded { signature, matched, .. } => format!("{signature} <- {matched}"),
            lasp_core::engine::EventKind::ObjectAdded { object, ty, .. } => format!("{object} - {ty}"),
            lasp_core::engine::EventKind::ReasonSkipped { cause, detail } => format!("{cause:?}: {detail}"),
        };
        println!("  {:>2} d{}{} {} {}", e.seq, e.depth, class, e.kind.name(), detail);
    }
    if let Some(p) = &r.final_plan {
        println!("plan ({} steps):", p.len());
        for s in &p.steps {
            println!("  {s}");
        }
    }
    println!("executions: {}  oracle steps: {}  depth: {}", r.executions, r.oracle_steps, r.max_depth);
}

fn exit_for(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Success => EXIT_SUCCESS,
        Outcome::Exhausted | Outcome::Budget => EXIT_UNSOLVED,
    }
}

fn single(
    scenario: &Path,
    cfg: &RunConfig,
    validate: bool,
    out: Option<&Path>,
    transcript: Option<&Path>,
) -> Result<u8, Failure> {
    cfg.check().map_err(Failure::invalid)?;
    let sc = load(scenario)?;
    let r = episode(&sc, cfg, validate)?;
    report_episode(&r);
    if let Some(out) = out {
        write_outputs(out, &r).map_err(Failure::invalid)?;
    }
    if let Some(path) = transcript {
        r.transcript.save(path).map_err(Failure::backend)?;
        println!("transcript: {} exchanges -> {}", r.transcript.exchanges.len(), path.display());
    }
    Ok(exit_for(r.outcome))
}

fn validate_all(scenarios: &[PathBuf], cfg: &RunConfig) -> Result<u8, Failure> {
    let mut code = EXIT_SUCCESS;
    for dir in scenarios {
        let checked = Scenario::load(dir)
            .map_err(|e| vec![e.to_string()])
            .and_then(|sc| validate_bundle(&sc, &cfg.budgets.search));
        match checked {
            Ok(()) => println!("{}: ok", dir.display()),
            Err(issues) => {
                code = EXIT_INVALID;
                println!("{}: {} problem(s)", dir.display(), issues.len());
                for i in issues {
                    println!("  {i}");
                }
            }
        }
    }
    Ok(code)
}

fn bench(scenarios: &[PathBuf], cfg: &RunConfig, timings: bool) -> Result<u8, Failure> {
    cfg.check().map_err(Failure::invalid)?;
    let start = Instant::now();
    let mut loaded = Vec::new();
    for dir in scenarios {
        let sc = load(dir)?;
        validate_bundle(&sc, &cfg.budgets.search)
            .map_err(|issues| Failure::invalid(anyhow::anyhow!("{}: {}", dir.display(), issues.join("; "))))?;
        loaded.push(sc);
    }
    let jobs: Vec<(usize, usize)> =
        (0..loaded.len()).flat_map(|i| (0..cfg.repetitions).map(move |r| (i, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(Failure::invalid)?;
    let records: Vec<(usize, EpisodeRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, _)| {
                let rec = match episode(&loaded[i], cfg, false) {
                    Ok(r) => EpisodeRecord::Finished {
                        outcome: r.outcome.name().to_string(),
                        mutations: r.mutations(),
                        oracle_steps: r.oracle_steps,
                        plan_steps: r.final_plan.as_ref().map(|p| p.len()),
                    },
                    Err(f) => EpisodeRecord::Failed { message: chain(&f.error) },
                };
                (i, rec)
            })
            .collect()
    });
    let rows = loaded
        .iter()
        .enumerate()
        .map(|(i, sc)| {
            let eps = records.iter().filter(|(j, _)| *j == i).map(|(_, r)| r.clone()).collect();
            ((sc.id.clone(), sc.case, sc.task.clone()), eps)
        })
        .collect();
    let mut report = build_report(&cfg.backend.label(), cfg.repetitions, rows);
    if timings {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = report.to_text();
    print!("{text}");
    if let Some(path) = &cfg.report {
        let json = serde_json::to_string_pretty(&report).map_err(Failure::invalid)? + "\n";
        fs::write(path, &text).with_context(|| format!("writing {}", path.display())).map_err(Failure::invalid)?;
        fs::write(path.with_extension("json"), json).map_err(Failure::invalid)?;
    }
    Ok(EXIT_SUCCESS)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(Failure::invalid)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Run { scenario, out, no_validate, o } => {
            let cfg = merge(&file, &o, "scripted").map_err(Failure::invalid)?;
            single(&scenario, &cfg, !no_validate, out.as_deref(), None)
        }
        Command::Record { scenario, transcript, out, o } => {
            let cfg = merge(&file, &o, "live").map_err(Failure::invalid)?;
            single(&scenario, &cfg, true, out.as_deref(), Some(&transcript))
        }
        Command::Replay { scenario, transcript, out, mut o } => {
            o.backend = Some(format!("replay:{}", transcript.display()));
            let cfg = merge(&file, &o, "replay").map_err(Failure::invalid)?;
            single(&scenario, &cfg, true, out.as_deref(), None)
        }
        Command::Bench { scenarios, reps, workers, report, timings, o } => {
            let mut cfg = merge(&file, &o, "scripted").map_err(Failure::invalid)?;
            cfg.repetitions = reps.unwrap_or(cfg.repetitions);
            cfg.workers = workers.unwrap_or(cfg.workers);
            cfg.report = report.or(cfg.report);
            bench(&scenarios, &cfg, timings)
        }
        Command::Validate { scenarios } => {
            let cfg = merge(&file, &Overrides::default(), "scripted").map_err(Failure::invalid)?;
            validate_all(&scenarios, &cfg)
        }
    }
}

/// The error and its causes, skipping causes already quoted by their parent.
fn chain(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    let mut last = out.clone();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !last.contains(&c) {
            out.push_str(": ");
            out.push_str(&c);
        }
        last = c;
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if let Some(LlmError::ReplayMismatch { .. }) = f.error.downcast_ref::<EngineError>().and_then(|e| match e {
                EngineError::Llm(l) => Some(l),
                _ => None,
            }) {
                eprintln!("hint: the transcript was recorded for a different scenario or prompt set");
            }
            eprintln!("error: {}", chain(&f.error));
            ExitCode::from(f.code)
        }
    }
}
