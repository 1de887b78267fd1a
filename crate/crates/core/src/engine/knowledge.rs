use std::collections::BTreeMap;

use crate::numeric::Scalar;
use crate::pddl::{Conjunct, Domain, Ground, Problem};

/// The agent's planning model plus what it has learned while acting.
#[derive(Debug, Clone)]
pub struct AgentKnowledge<N> {
    pub domain: Domain<N>,
    pub problem: Problem<N>,
    /// Descriptions of the steps executed in the latest oracle run.
    pub history: Vec<String>,
    /// Incremented on every model mutation.
    pub version: u64,
    /// Agent property name to the environment property its values come from.
    pub property_map: BTreeMap<String, String>,
}

/// Size of the model along each monotone axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, serde::Serialize, serde::Deserialize)]
pub struct ModelSize {
    pub preconditions: usize,
    pub properties: usize,
    pub objects: usize,
    pub init_facts: usize,
}

impl<N: Scalar> AgentKnowledge<N> {
    pub fn new(domain: Domain<N>, problem: Problem<N>) -> Self {
        let property_map = domain
            .predicates
            .iter()
            .map(|p| &p.name)
            .chain(domain.functions.iter().map(|f| &f.name))
            .map(|n| (n.clone(), n.clone()))
            .collect();
        AgentKnowledge { domain, problem, history: Vec::new(), version: 0, property_map }
    }

    pub fn size(&self) -> ModelSize {
        ModelSize {
            preconditions: self.domain.actions.iter().map(|a| a.precondition.len()).sum(),
            properties: self.domain.predicates.len() + self.domain.functions.len(),
            objects: self.problem.objects.len(),
            init_facts: self.problem.init_atoms.len() + self.problem.init_fluents.len(),
        }
    }

    /// Environment property behind an agent property.
    pub fn source_of<'a>(&'a self, property: &'a str) -> &'a str {
        self.property_map.get(property).map(String::as_str).unwrap_or(property)
    }

    pub fn has_conjunct(&self, schema: &str, c: &Conjunct<N>) -> bool {
        let canon = canonical(c);
        self.domain.action(schema).is_some_and(|a| a.precondition.conjuncts.iter().any(|x| canonical(x) == canon))
    }

    pub(crate) fn bump(&mut self) -> u64 {
        self.version += 1;
        self.version
    }

    pub(crate) fn add_atom(&mut self, g: Ground) -> bool {
        self.problem.init_atoms.insert(g)
    }

    pub(crate) fn set_fluent(&mut self, g: Ground, v: N) -> bool {
        self.problem.init_fluents.insert(g, v).is_none()
    }
}

/// Comparison direction normalised to `<` / `<=` / `=`; literals unchanged.
pub fn canonical<N: Scalar>(c: &Conjunct<N>) -> Conjunct<N> {
    use crate::pddl::CmpOp;
    match c {
        Conjunct::Compare { op: CmpOp::Gt, lhs, rhs } => Conjunct::Compare { op: CmpOp::Lt, lhs: rhs.clone(), rhs: lhs.clone() },
        Conjunct::Compare { op: CmpOp::Ge, lhs, rhs } => Conjunct::Compare { op: CmpOp::Le, lhs: rhs.clone(), rhs: lhs.clone() },
        other => other.clone(),
    }
}
