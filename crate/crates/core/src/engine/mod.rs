//! The repair loop: plan, execute against the oracle, and on failure refine
//! preconditions, properties and objects before replanning.

mod acquire;
mod knowledge;
mod refine;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{paraphrase_observation, LlmBackend, LlmError, RoleCaller, Transcript};
use crate::numeric::Scalar;
use crate::oracle::{validate_bundle, ErrorClass, ExecOutcome, ExecutionError, ObservationMode, OracleError, PropertyKind, Scenario};
use crate::planner::{find_plan, GroundError, Plan, SearchBudget, SearchOutcome, Step};

pub use acquire::{jaccard, normalize_name, MatchTier};
pub use knowledge::{canonical, AgentKnowledge, ModelSize};
pub use refine::cause_context;

pub const EVENT_LOG_VERSION: u32 = 1;

/// Caps that keep every episode finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub max_recursion_depth: usize,
    pub max_reasons_per_error: usize,
    /// Planner calls per reason, counting replans after object expansion.
    pub max_replans: usize,
    pub search: SearchBudget,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_recursion_depth: 3, max_reasons_per_error: 7, max_replans: 2, search: SearchBudget::default() }
    }
}

impl Budgets {
    pub fn check(&self) -> Result<(), String> {
        let fields = [
            ("max_recursion_depth", self.max_recursion_depth),
            ("max_reasons_per_error", self.max_reasons_per_error),
            ("max_replans", self.max_replans),
            ("search.max_nodes", self.search.max_nodes),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(format!("budget {name} must be at least 1")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// Every reason was tried without reaching the goal.
    Exhausted,
    Budget,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Exhausted => "exhausted",
            Outcome::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipCause {
    PreconditionParse,
    EvaluatorParse,
    TranslatorParse,
    ExpanderParse,
    Grammar,
    Typecheck,
    Duplicate,
    PropertyUnmatched,
    UnsupportedProperty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    PreconditionAdded {
        schema: String,
        conjunct: String,
        nl_precondition: String,
    },
    PropertyAdded {
        name: String,
        property_kind: PropertyKind,
        /// False when the symbol was already declared and only values were acquired.
        declared: bool,
        signature: String,
        matched: String,
        tier: MatchTier,
        /// Object to acquired value.
        values: BTreeMap<String, String>,
    },
    ObjectAdded {
        object: String,
        #[serde(rename = "type")]
        ty: String,
        facts: Vec<String>,
    },
    ReasonSkipped {
        cause: SkipCause,
        detail: String,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::PreconditionAdded { .. } => "precondition_added",
            EventKind::PropertyAdded { .. } => "property_added",
            EventKind::ObjectAdded { .. } => "object_added",
            EventKind::ReasonSkipped { .. } => "reason_skipped",
        }
    }

    pub fn is_mutation(&self) -> bool {
        !matches!(self, EventKind::ReasonSkipped { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementEvent {
    pub seq: usize,
    pub depth: usize,
    #[serde(default)]
    pub error_class: Option<ErrorClass>,
    #[serde(default)]
    pub reason: Option<String>,
    pub model_version: u64,
    /// Model size after the event.
    pub size: ModelSize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLogHeader {
    pub event_log_version: u32,
    pub scenario: String,
    pub initial_size: ModelSize,
}

/// Versioned JSON lines: a header then one event per line.
pub fn event_log_jsonl(scenario: &str, initial_size: ModelSize, events: &[RefinementEvent]) -> String {
    let header = EventLogHeader { event_log_version: EVENT_LOG_VERSION, scenario: scenario.to_string(), initial_size };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_event_log(text: &str) -> Result<(EventLogHeader, Vec<RefinementEvent>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: EventLogHeader =
        serde_json::from_str(lines.next().ok_or("empty event log")?).map_err(|e| format!("event log header: {e}"))?;
    if header.event_log_version != EVENT_LOG_VERSION {
        return Err(format!("unsupported event log version {}", header.event_log_version));
    }
    let events = lines.map(|l| serde_json::from_str(l).map_err(|e| format!("event: {e}"))).collect::<Result<_, _>>()?;
    Ok((header, events))
}

/// Errors are the same when they violate the same truth conjunct of the same
/// schema; bound objects and observation text are ignored.
pub fn same_error(a: &ExecutionError, b: &ExecutionError) -> bool {
    a.error_class == b.error_class
}

#[derive(Debug, Clone)]
pub struct EpisodeResult<N> {
    pub scenario: String,
    pub outcome: Outcome,
    /// The last plan handed to the oracle.
    pub final_plan: Option<Plan>,
    pub last_error: Option<ExecutionError>,
    pub events: Vec<RefinementEvent>,
    pub executions: usize,
    /// Actions attempted in the oracle, failing ones included.
    pub oracle_steps: usize,
    pub max_depth: usize,
    pub transcript: Transcript,
    pub initial_size: ModelSize,
    pub knowledge: AgentKnowledge<N>,
}

impl<N> EpisodeResult<N> {
    pub fn mutations(&self) -> usize {
        self.events.iter().filter(|e| e.kind.is_mutation()).count()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.events.iter().filter(|e| e.kind.name() == kind).count()
    }

    pub fn event_log(&self) -> String {
        event_log_jsonl(&self.scenario, self.initial_size, &self.events)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("scenario is invalid:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("budgets: {0}")]
    Budgets(String),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("language model: {0}")]
    Llm(#[from] LlmError),
    #[error("grounding agent model: {0}")]
    Ground(#[from] GroundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeOptions {
    /// Run bundle validation before the episode.
    pub validate: bool,
    pub observation: ObservationMode,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions { validate: true, observation: ObservationMode::Template }
    }
}

pub(crate) struct Episode<'a, N> {
    pub(crate) sc: &'a Scenario<N>,
    pub(crate) caller: RoleCaller<'a>,
    pub(crate) k: AgentKnowledge<N>,
    pub(crate) events: Vec<RefinementEvent>,
    budgets: Budgets,
    opts: EpisodeOptions,
    executions: usize,
    oracle_steps: usize,
    max_depth: usize,
    final_plan: Option<Plan>,
    last_error: Option<ExecutionError>,
}

/// Where an event came from.
#[derive(Debug, Clone, Default)]
pub(crate) struct Trigger {
    pub(crate) depth: usize,
    pub(crate) error_class: Option<ErrorClass>,
    pub(crate) reason: Option<String>,
}

impl<'a, N: Scalar> Episode<'a, N> {
    pub(crate) fn new(sc: &'a Scenario<N>, backend: &'a dyn LlmBackend, budgets: Budgets, opts: EpisodeOptions) -> Self {
        Episode {
            sc,
            caller: RoleCaller::new(backend),
            k: AgentKnowledge::new(sc.agent_domain.clone(), sc.agent_problem.clone()),
            events: Vec::new(),
            budgets,
            opts,
            executions: 0,
            oracle_steps: 0,
            max_depth: 0,
            final_plan: None,
            last_error: None,
        }
    }

    pub(crate) fn emit(&mut self, trigger: &Trigger, kind: EventKind) {
        let e = RefinementEvent {
            seq: self.events.len(),
            depth: trigger.depth,
            error_class: trigger.error_class.clone(),
            reason: trigger.reason.clone(),
            model_version: self.k.version,
            size: self.k.size(),
            kind,
        };
        log::info!("event {} {}", e.seq, e.kind.name());
        self.events.push(e);
    }

    fn plan(&self) -> Result<SearchOutcome, EngineError> {
        let (outcome, stats) = find_plan(&self.k.domain, &self.k.problem, &self.budgets.search)?;
        log::debug!("planner v{}: {:?} after {} expansions", self.k.version, outcome_name(&outcome), stats.expanded);
        Ok(outcome)
    }

    fn execute(&mut self, steps: Vec<Step>) -> Result<ExecOutcome, EngineError> {
        let ex = self.sc.world.execute(&steps)?;
        self.executions += 1;
        self.oracle_steps += ex.executed.len() + usize::from(matches!(ex.outcome, ExecOutcome::Failed(_)));
        self.k.history = ex.executed.iter().map(|s| self.sc.world.describe_action(s)).collect::<Result<_, _>>()?;
        self.final_plan = Some(Plan { steps, model_version: self.k.version });
        let outcome = match ex.outcome {
            ExecOutcome::Failed(mut err) => {
                if self.opts.observation == ObservationMode::Paraphrase {
                    match paraphrase_observation(&mut self.caller, &err.observation) {
                        Ok(text) => err.observation = text,
                        Err(e) if e.is_parse() => log::warn!("paraphrase unusable, keeping template: {e}"),
                        Err(e) => return Err(e.into()),
                    }
                }
                self.last_error = Some(err.clone());
                ExecOutcome::Failed(err)
            }
            other => other,
        };
        Ok(outcome)
    }

    /// Object expansion followed by a replan, at most `max_replans - 1` times.
    fn expand_until_plan(
        &mut self,
        mut outcome: SearchOutcome,
        err: Option<&ExecutionError>,
        precondition: &str,
        trigger: &Trigger,
    ) -> Result<SearchOutcome, EngineError> {
        let mut calls = 1;
        while outcome == SearchOutcome::NoPlan && calls < self.budgets.max_replans {
            if !self.refine_object_set(err, precondition, trigger)? {
                break;
            }
            outcome = self.plan()?;
            calls += 1;
        }
        Ok(outcome)
    }

    fn run(&mut self) -> Result<Outcome, EngineError> {
        let mut outcome = self.plan()?;
        if outcome == SearchOutcome::NoPlan {
            let goal = self.sc.world.task_description.clone();
            outcome = self.expand_until_plan(outcome, None, &goal, &Trigger::default())?;
        }
        let steps = match outcome {
            SearchOutcome::Plan(steps) => steps,
            SearchOutcome::NoPlan => return Ok(Outcome::Exhausted),
            SearchOutcome::BudgetExhausted => return Ok(Outcome::Budget),
        };
        match self.execute(steps)? {
            ExecOutcome::GoalReached => Ok(Outcome::Success),
            ExecOutcome::RanOut => Ok(Outcome::Exhausted),
            ExecOutcome::Failed(err) => self.refine_and_replan(err, 1),
        }
    }

    fn refine_and_replan(&mut self, err: ExecutionError, depth: usize) -> Result<Outcome, EngineError> {
        if depth > self.budgets.max_recursion_depth {
            return Ok(Outcome::Budget);
        }
        self.max_depth = self.max_depth.max(depth);
        let reasons = self.analyze(&err)?;
        for reason in reasons.into_iter().take(self.budgets.max_reasons_per_error) {
            let trigger = Trigger { depth, error_class: Some(err.error_class.clone()), reason: Some(reason.clone()) };
            let Some(precondition) = self.refine_prec_and_prop_set(&err, &reason, &trigger)? else {
                continue;
            };
            let first = self.plan()?;
            let outcome = self.expand_until_plan(first, Some(&err), &precondition, &trigger)?;
            let steps = match outcome {
                SearchOutcome::Plan(steps) => steps,
                SearchOutcome::NoPlan => continue,
                SearchOutcome::BudgetExhausted => return Ok(Outcome::Budget),
            };
            match self.execute(steps)? {
                ExecOutcome::GoalReached => return Ok(Outcome::Success),
                ExecOutcome::RanOut => continue,
                ExecOutcome::Failed(next) if same_error(&err, &next) => continue,
                ExecOutcome::Failed(next) => return self.refine_and_replan(next, depth + 1),
            }
        }
        Ok(Outcome::Exhausted)
    }

    fn finish(self, outcome: Outcome, initial_size: ModelSize) -> EpisodeResult<N> {
        let backend = self.caller.backend_id();
        EpisodeResult {
            scenario: self.sc.id.clone(),
            outcome,
            final_plan: self.final_plan,
            last_error: self.last_error,
            events: self.events,
            executions: self.executions,
            oracle_steps: self.oracle_steps,
            max_depth: self.max_depth,
            transcript: Transcript::new(self.sc.id.clone(), backend, self.caller.into_exchanges()),
            initial_size,
            knowledge: self.k,
        }
    }
}

fn outcome_name(o: &SearchOutcome) -> &'static str {
    match o {
        SearchOutcome::Plan(_) => "plan",
        SearchOutcome::NoPlan => "no plan",
        SearchOutcome::BudgetExhausted => "budget exhausted",
    }
}

/// Runs one episode of the repair loop on `scenario`.
pub fn run_episode<N: Scalar>(
    scenario: &Scenario<N>,
    backend: &dyn LlmBackend,
    budgets: &Budgets,
    opts: &EpisodeOptions,
) -> Result<EpisodeResult<N>, EngineError> {
    budgets.check().map_err(EngineError::Budgets)?;
    if opts.validate {
        validate_bundle(scenario, &budgets.search).map_err(EngineError::Invalid)?;
    }
    let mut ep = Episode::new(scenario, backend, *budgets, *opts);
    let initial_size = ep.k.size();
    let outcome = ep.run()?;
    log::info!("{}: {} after {} executions", scenario.id, outcome.name(), ep.executions);
    Ok(ep.finish(outcome, initial_size))
}

/// Runs only the precondition and property refinement for one reason of a
/// recorded failure, as the first step of `refine_and_replan` would.
pub fn refine_for_reason<N: Scalar>(
    scenario: &Scenario<N>,
    backend: &dyn LlmBackend,
    err: &ExecutionError,
    reason: &str,
) -> Result<(Vec<RefinementEvent>, AgentKnowledge<N>), EngineError> {
    let mut ep = Episode::new(scenario, backend, Budgets::default(), EpisodeOptions::default());
    let trigger = Trigger { depth: 1, error_class: Some(err.error_class.clone()), reason: Some(reason.to_string()) };
    ep.refine_prec_and_prop_set(err, reason, &trigger)?;
    Ok((ep.events, ep.k))
}
