//! Complete-knowledge environment: executes plans against the truth model
//! and answers property queries.

mod bundle;
mod check;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Scalar;
use crate::planner::{GroundError, GroundTask, State, Step};
use crate::pddl::{Domain, Ground, Problem};

pub use bundle::{CatalogueJson, EnvFile, ExpectedRepair, Scenario, ENV_VERSION};
pub use check::validate_bundle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("env.json: {0}")]
    Env(String),
    #[error("{file}: {message}")]
    Pddl { file: String, message: String },
    #[error("grounding truth model: {0}")]
    Ground(#[from] GroundError),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("no truth action {0}")]
    UnknownAction(String),
    #[error("no observation template for {0}")]
    MissingTemplate(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue<N> {
    Bool(bool),
    Number(N),
    Absent,
}

impl<N: Scalar> fmt::Display for PropertyValue<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Number(n) => f.write_str(&n.to_literal()),
            PropertyValue::Absent => f.write_str("absent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    Bool,
    Number,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogueEntry<N> {
    pub name: String,
    pub ty: String,
    pub properties: BTreeMap<String, PropertyValue<N>>,
}

/// Loop-control token for an execution failure: the schema and the
/// identifier of its first violated truth conjunct.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ErrorClass {
    pub schema: String,
    pub conjunct: String,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.schema, self.conjunct)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionError {
    pub step: usize,
    pub action: Step,
    pub action_text: String,
    pub error_class: ErrorClass,
    pub observation: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecOutcome {
    GoalReached,
    Failed(ExecutionError),
    /// Every step ran but the goal does not hold.
    RanOut,
}

#[derive(Debug, Clone)]
pub struct Execution<N> {
    pub outcome: ExecOutcome,
    /// Steps that executed successfully, in order.
    pub executed: Vec<Step>,
    pub final_state: State<N>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    #[default]
    Template,
    Paraphrase,
}

#[derive(Debug, Clone)]
pub struct OracleWorld<N> {
    pub truth_domain: Domain<N>,
    pub truth_problem: Problem<N>,
    pub task: GroundTask<N>,
    pub catalogue: Vec<CatalogueEntry<N>>,
    pub observations: BTreeMap<String, String>,
    pub action_texts: BTreeMap<String, String>,
    pub task_description: String,
}

/// Replaces `{?var}` placeholders with the bound objects.
pub fn fill_template(template: &str, params: &[String], args: &[String]) -> String {
    let mut out = template.to_string();
    for (p, a) in params.iter().zip(args) {
        out = out.replace(&format!("{{{p}}}"), a);
    }
    out
}

impl<N: Scalar> OracleWorld<N> {
    pub fn new(
        truth_domain: Domain<N>,
        truth_problem: Problem<N>,
        catalogue: Vec<CatalogueEntry<N>>,
        observations: BTreeMap<String, String>,
        action_texts: BTreeMap<String, String>,
        task_description: String,
    ) -> Result<Self, OracleError> {
        let task = GroundTask::new(&truth_domain, &truth_problem)?;
        Ok(OracleWorld { truth_domain, truth_problem, task, catalogue, observations, action_texts, task_description })
    }

    fn params(&self, schema: &str) -> Result<Vec<String>, OracleError> {
        let s = self.truth_domain.action(schema).ok_or_else(|| OracleError::UnknownAction(schema.to_string()))?;
        Ok(s.params.iter().map(|p| p.name.clone()).collect())
    }

    /// Natural-language description of a ground action.
    pub fn describe_action(&self, step: &Step) -> Result<String, OracleError> {
        let t = self.action_texts.get(&step.schema).ok_or_else(|| OracleError::MissingTemplate(step.schema.clone()))?;
        Ok(fill_template(t, &self.params(&step.schema)?, &step.args))
    }

    /// Template-mode observation for a violation.
    pub fn observe(&self, class: &ErrorClass, step: &Step) -> Result<String, OracleError> {
        let key = class.to_string();
        let t = self.observations.get(&key).ok_or(OracleError::MissingTemplate(key))?;
        Ok(fill_template(t, &self.params(&step.schema)?, &step.args))
    }

    /// Runs `steps` from the truth initial state until the first violated
    /// truth precondition or the end of the plan.
    pub fn execute(&self, steps: &[Step]) -> Result<Execution<N>, OracleError> {
        let mut s = self.task.init.clone();
        let mut executed = Vec::new();
        for (i, step) in steps.iter().enumerate() {
            let a = self.task.action(&step.schema, &step.args).ok_or_else(|| OracleError::UnknownAction(step.to_string()))?;
            let unmet = a.pre.first_unmet(&s).map_err(|e| OracleError::Fixture(format!("{step}: {e}")))?;
            if let Some(c) = unmet {
                let schema = self.truth_domain.action(&step.schema).expect("grounded from this domain");
                let error_class = ErrorClass { schema: step.schema.clone(), conjunct: schema.precondition.conjuncts[c].id() };
                let error = ExecutionError {
                    step: i,
                    action: step.clone(),
                    action_text: self.describe_action(step)?,
                    observation: self.observe(&error_class, step)?,
                    error_class,
                };
                return Ok(Execution { outcome: ExecOutcome::Failed(error), executed, final_state: s });
            }
            s = a.apply_effects(&s).map_err(|e| OracleError::Fixture(format!("{step}: {e}")))?;
            executed.push(step.clone());
        }
        let reached = self.task.goal.satisfied(&s).map_err(|e| OracleError::Fixture(format!("goal: {e}")))?;
        let outcome = if reached { ExecOutcome::GoalReached } else { ExecOutcome::RanOut };
        Ok(Execution { outcome, executed, final_state: s })
    }

    pub fn entry(&self, object: &str) -> Option<&CatalogueEntry<N>> {
        self.catalogue.iter().find(|c| c.name == object)
    }

    pub fn query_property_value(&self, object: &str, property: &str) -> Result<PropertyValue<N>, OracleError> {
        let e = self.entry(object).ok_or_else(|| OracleError::UnknownObject(object.to_string()))?;
        Ok(e.properties.get(property).cloned().unwrap_or(PropertyValue::Absent))
    }

    /// Unary truth predicates and functions: the properties the catalogue describes.
    pub fn property_kinds(&self) -> BTreeMap<String, PropertyKind> {
        let d = &self.truth_domain;
        let preds = d.predicates.iter().filter(|p| p.params.len() == 1).map(|p| (p.name.clone(), PropertyKind::Bool));
        let fns = d.functions.iter().filter(|f| f.params.len() == 1).map(|f| (f.name.clone(), PropertyKind::Number));
        preds.chain(fns).collect()
    }

    /// Catalogue objects the agent does not know, sorted by name.
    pub fn candidate_objects(&self, agent: &Problem<N>) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .catalogue
            .iter()
            .filter(|c| !agent.has_object(&c.name))
            .map(|c| (c.name.clone(), c.ty.clone()))
            .collect();
        v.sort();
        v
    }

    /// Initial non-unary atoms and fluents mentioning `object`.
    pub fn relational_facts(&self, object: &str) -> (Vec<&Ground>, Vec<(&Ground, &N)>) {
        let p = &self.truth_problem;
        let atoms = p.init_atoms.iter().filter(|g| g.args.len() != 1 && g.mentions(object)).collect();
        let fluents = p.init_fluents.iter().filter(|(g, _)| g.args.len() != 1 && g.mentions(object)).collect();
        (atoms, fluents)
    }
}
