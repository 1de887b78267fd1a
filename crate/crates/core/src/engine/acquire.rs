use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::refine::{declare, NewSymbol};
use super::{EngineError, Episode, EventKind, SkipCause, Trigger};
use crate::llm::{expand_object, match_property, ExpanderContext};
use crate::numeric::Scalar;
use crate::oracle::{ExecutionError, PropertyKind, PropertyValue};
use crate::pddl::{render_signature, Ground, TypedVar};

/// How an agent property was tied to an environment property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchTier {
    /// The agent already knew where the property comes from.
    Known,
    /// Names equal after normalisation.
    Exact,
    /// Token overlap above the threshold.
    Overlap,
    /// Chosen by the property matcher role.
    Llm,
}

pub const OVERLAP_THRESHOLD: f64 = 0.5;

/// Lower-case with `-` and `_` removed.
pub fn normalize_name(name: &str) -> String {
    name.chars().filter(|c| *c != '-' && *c != '_').flat_map(char::to_lowercase).collect()
}

fn tokens(name: &str) -> BTreeSet<String> {
    name.split(['-', '_']).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Jaccard similarity of the hyphen/underscore-separated tokens.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokens(a), tokens(b));
    let union = ta.union(&tb).count();
    if union == 0 {
        return 0.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

/// A property whose values are about to be fetched.
#[derive(Debug, Clone)]
pub(crate) struct PendingProperty {
    pub(crate) name: String,
    pub(crate) kind: PropertyKind,
    pub(crate) params: Vec<TypedVar>,
    /// Set when the symbol still has to be declared.
    pub(crate) symbol: Option<NewSymbol>,
}

impl PendingProperty {
    pub(crate) fn from_new(s: &NewSymbol) -> Self {
        let (kind, params) = match s {
            NewSymbol::Predicate(p) => (PropertyKind::Bool, p.params.clone()),
            NewSymbol::Function(f) => (PropertyKind::Number, f.params.clone()),
        };
        PendingProperty { name: s.name().to_string(), kind, params, symbol: Some(s.clone()) }
    }

    fn param_type(&self) -> &str {
        &self.params[0].ty
    }
}

type Skip = (SkipCause, String);

impl<N: Scalar> Episode<'_, N> {
    /// Environment properties a new agent property may be matched to.
    fn match_candidates(&self, p: &PendingProperty) -> Vec<(String, String)> {
        let td = &self.sc.world.truth_domain;
        let taken: BTreeSet<&str> = self.k.property_map.values().map(String::as_str).collect();
        let fits = |params: &[TypedVar]| {
            let (a, b) = (params[0].ty.as_str(), p.param_type());
            td.types.is_subtype(a, b) || td.types.is_subtype(b, a)
        };
        let known = |name: &str| match p.kind {
            PropertyKind::Bool => self.k.domain.predicate(name).is_some(),
            PropertyKind::Number => self.k.domain.function(name).is_some() && self.k.problem.has_values_for(name),
        };
        self.sc
            .world
            .property_kinds()
            .into_iter()
            .filter(|(name, kind)| *kind == p.kind && (name == &p.name || (!known(name) && !taken.contains(name.as_str()))))
            .filter_map(|(name, _)| {
                let params = match p.kind {
                    PropertyKind::Bool => &td.predicate(&name)?.params,
                    PropertyKind::Number => &td.function(&name)?.params,
                };
                fits(params).then(|| {
                    let sig = render_signature(&name, params);
                    (name, sig)
                })
            })
            .collect()
    }

    /// Finds the environment property that supplies values for `p`.
    pub(crate) fn resolve_property(
        &mut self,
        p: &PendingProperty,
    ) -> Result<Result<(String, MatchTier), Skip>, EngineError> {
        if p.params.len() != 1 {
            return Ok(Err((SkipCause::UnsupportedProperty, format!("`{}` is not a unary property", p.name))));
        }
        let kinds = self.sc.world.property_kinds();
        if let Some(src) = self.k.property_map.get(&p.name) {
            if kinds.get(src) == Some(&p.kind) {
                return Ok(Ok((src.clone(), MatchTier::Known)));
            }
        }
        let candidates = self.match_candidates(p);
        let wanted = normalize_name(&p.name);
        if let Some((name, _)) = candidates.iter().find(|(n, _)| normalize_name(n) == wanted) {
            return Ok(Ok((name.clone(), MatchTier::Exact)));
        }
        let mut best: Option<(&String, f64)> = None;
        for (name, _) in &candidates {
            let score = jaccard(&p.name, name);
            if score >= OVERLAP_THRESHOLD && best.is_none_or(|(_, b)| score > b) {
                best = Some((name, score));
            }
        }
        if let Some((name, _)) = best {
            return Ok(Ok((name.clone(), MatchTier::Overlap)));
        }
        if candidates.is_empty() {
            return Ok(Err((SkipCause::PropertyUnmatched, format!("no environment property can supply `{}`", p.name))));
        }
        let sig = render_signature(&p.name, &p.params);
        match match_property(&mut self.caller, &sig, &candidates) {
            Ok(Some(name)) => Ok(Ok((name, MatchTier::Llm))),
            Ok(None) => Ok(Err((SkipCause::PropertyUnmatched, format!("no match for `{}`", p.name)))),
            Err(e) if e.is_parse() => Ok(Err((SkipCause::PropertyUnmatched, e.to_string()))),
            Err(e) => Err(e.into()),
        }
    }

    /// Declares `p` if needed and writes its values for every agent object.
    pub(crate) fn commit_property(
        &mut self,
        p: &PendingProperty,
        (src, tier): (String, MatchTier),
        trigger: &Trigger,
    ) -> Result<(), EngineError> {
        if let Some(s) = &p.symbol {
            declare(&mut self.k.domain, s);
        }
        self.k.property_map.insert(p.name.clone(), src.clone());
        let objects: Vec<String> = self
            .k
            .problem
            .objects_of(&self.k.domain.types, p.param_type())
            .map(str::to_string)
            .collect();
        let mut values = BTreeMap::new();
        for obj in objects {
            let v = self.sc.world.query_property_value(&obj, &src)?;
            self.write_value(&p.name, &obj, &v);
            if v != PropertyValue::Absent {
                values.insert(obj, v.to_string());
            }
        }
        self.k.bump();
        self.emit(
            trigger,
            EventKind::PropertyAdded {
                name: p.name.clone(),
                property_kind: p.kind,
                declared: p.symbol.is_some(),
                signature: render_signature(&p.name, &p.params),
                matched: src,
                tier,
                values,
            },
        );
        Ok(())
    }

    /// Returns the fact written, if any.
    fn write_value(&mut self, property: &str, obj: &str, v: &PropertyValue<N>) -> Option<String> {
        match v {
            PropertyValue::Bool(true) => {
                let g = Ground::new(property, [obj]);
                let s = g.to_string();
                self.k.add_atom(g);
                Some(s)
            }
            PropertyValue::Number(n) => {
                let g = Ground::new(property, [obj]);
                let s = format!("(= {g} {})", n.to_literal());
                self.k.set_fluent(g, n.clone());
                Some(s)
            }
            PropertyValue::Bool(false) | PropertyValue::Absent => None,
        }
    }

    /// Asks for one catalogue object and adds it with everything the agent's
    /// vocabulary can say about it. Returns false when nothing was added.
    pub(crate) fn refine_object_set(
        &mut self,
        err: Option<&ExecutionError>,
        precondition: &str,
        trigger: &Trigger,
    ) -> Result<bool, EngineError> {
        let types = &self.k.domain.types;
        let candidates: Vec<(String, String)> =
            self.sc.world.candidate_objects(&self.k.problem).into_iter().filter(|(_, ty)| types.contains(ty)).collect();
        if candidates.is_empty() {
            return Ok(false);
        }
        let ctx = ExpanderContext {
            task: self.sc.world.task_description.clone(),
            action: err.map(|e| e.action_text.clone()),
            precondition: precondition.to_string(),
            candidates: candidates.iter().map(|(o, _)| o.clone()).collect(),
        };
        let object = match expand_object(&mut self.caller, &ctx) {
            Ok(o) => o,
            Err(e) if e.is_parse() => {
                self.emit(trigger, EventKind::ReasonSkipped { cause: SkipCause::ExpanderParse, detail: e.to_string() });
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        };
        let ty = candidates.iter().find(|(o, _)| *o == object).map(|(_, t)| t.clone()).expect("parser checks candidates");
        self.k.problem.objects.push((object.clone(), ty.clone()));

        let mut facts = Vec::new();
        let unary: Vec<(String, PropertyKind)> = self
            .k
            .domain
            .predicates
            .iter()
            .filter(|p| p.params.len() == 1 && self.k.domain.types.is_subtype(&ty, &p.params[0].ty))
            .map(|p| (p.name.clone(), PropertyKind::Bool))
            .chain(
                self.k
                    .domain
                    .functions
                    .iter()
                    .filter(|f| f.params.len() == 1 && self.k.domain.types.is_subtype(&ty, &f.params[0].ty))
                    .filter(|f| self.k.problem.has_values_for(&f.name))
                    .map(|f| (f.name.clone(), PropertyKind::Number)),
            )
            .collect();
        for (name, _) in unary {
            let src = self.k.source_of(&name).to_string();
            let v = self.sc.world.query_property_value(&object, &src)?;
            facts.extend(self.write_value(&name, &object, &v));
        }

        let known = |g: &Ground, k: &super::AgentKnowledge<N>| g.args.iter().all(|a| k.problem.has_object(a));
        let (atoms, fluents) = self.sc.world.relational_facts(&object);
        for g in atoms {
            let declared = self.k.domain.predicate(&g.name).is_some_and(|p| p.params.len() == g.args.len());
            if declared && known(g, &self.k) && self.k.add_atom(g.clone()) {
                facts.push(g.to_string());
            }
        }
        for (g, n) in fluents {
            let declared = self.k.domain.function(&g.name).is_some_and(|f| f.params.len() == g.args.len());
            if declared && known(g, &self.k) {
                self.k.set_fluent(g.clone(), n.clone());
                facts.push(format!("(= {g} {})", n.to_literal()));
            }
        }
        self.k.bump();
        self.emit(trigger, EventKind::ObjectAdded { object, ty, facts });
        Ok(true)
    }
}
