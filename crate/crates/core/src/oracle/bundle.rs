use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CatalogueEntry, OracleError, OracleWorld, PropertyValue};
use crate::numeric::Scalar;
use crate::pddl::{parse_domain, parse_problem, Domain, Problem};

pub const ENV_VERSION: u32 = 1;

/// A conjunct the agent model lacks, as recorded for repair checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedRepair {
    pub schema: String,
    pub conjunct: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogueJson {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub properties: BTreeMap<String, Value>,
}

/// On-disk `env.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvFile {
    pub version: u32,
    pub id: String,
    #[serde(default)]
    pub case: Option<u32>,
    pub task: String,
    pub task_description: String,
    pub catalogue: Vec<CatalogueJson>,
    /// `schema/conjunct-id` to observation template.
    pub observations: BTreeMap<String, String>,
    /// Schema name to action description template.
    pub actions: BTreeMap<String, String>,
    #[serde(default)]
    pub expected_repairs: Vec<ExpectedRepair>,
    /// Agent predicates and functions kept out of candidate lists shown to the model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unlisted: Vec<String>,
}

/// A loaded scenario directory.
#[derive(Debug, Clone)]
pub struct Scenario<N> {
    pub dir: PathBuf,
    pub id: String,
    pub case: Option<u32>,
    pub task: String,
    pub agent_domain: Domain<N>,
    pub agent_problem: Problem<N>,
    pub world: OracleWorld<N>,
    pub expected_repairs: Vec<ExpectedRepair>,
    pub unlisted: Vec<String>,
}

fn read(dir: &Path, name: &str) -> Result<String, OracleError> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|e| OracleError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn value<N: Scalar>(v: &Value) -> Option<PropertyValue<N>> {
    match v {
        Value::Bool(b) => Some(PropertyValue::Bool(*b)),
        Value::Number(n) => N::parse_literal(&n.to_string()).map(PropertyValue::Number),
        Value::String(s) => N::parse_literal(s).map(PropertyValue::Number),
        _ => None,
    }
}

impl EnvFile {
    pub fn parse(text: &str) -> Result<EnvFile, OracleError> {
        let env: EnvFile = serde_json::from_str(text).map_err(|e| OracleError::Env(e.to_string()))?;
        if env.version != ENV_VERSION {
            return Err(OracleError::Env(format!("unsupported env.json version {}", env.version)));
        }
        Ok(env)
    }

    pub fn catalogue<N: Scalar>(&self) -> Result<Vec<CatalogueEntry<N>>, OracleError> {
        self.catalogue
            .iter()
            .map(|c| {
                let properties = c
                    .properties
                    .iter()
                    .map(|(k, v)| {
                        value(v)
                            .map(|v| (k.clone(), v))
                            .ok_or_else(|| OracleError::Env(format!("bad value for {}.{k}: {v}", c.name)))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(CatalogueEntry { name: c.name.clone(), ty: c.ty.clone(), properties })
            })
            .collect()
    }
}

impl<N: Scalar> Scenario<N> {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, OracleError> {
        let dir = dir.as_ref();
        let pddl = |name: &str| -> Result<String, OracleError> { read(dir, name) };
        let bad = |file: &str, e: String| OracleError::Pddl { file: file.to_string(), message: e };
        let agent_domain = parse_domain(&pddl("agent_domain.pddl")?).map_err(|e| bad("agent_domain.pddl", e.to_string()))?;
        let agent_problem = parse_problem(&pddl("agent_problem.pddl")?, &agent_domain)
            .map_err(|e| bad("agent_problem.pddl", e.to_string()))?;
        let truth_domain =
            parse_domain(&pddl("oracle_domain.pddl")?).map_err(|e| bad("oracle_domain.pddl", e.to_string()))?;
        let truth_problem = parse_problem(&pddl("oracle_problem.pddl")?, &truth_domain)
            .map_err(|e| bad("oracle_problem.pddl", e.to_string()))?;
        let env = EnvFile::parse(&read(dir, "env.json")?)?;
        let world = OracleWorld::new(
            truth_domain,
            truth_problem,
            env.catalogue()?,
            env.observations.clone(),
            env.actions.clone(),
            env.task_description.clone(),
        )?;
        Ok(Scenario {
            dir: dir.to_path_buf(),
            id: env.id,
            case: env.case,
            task: env.task,
            agent_domain,
            agent_problem,
            world,
            expected_repairs: env.expected_repairs,
            unlisted: env.unlisted,
        })
    }
}
