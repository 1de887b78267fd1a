use std::collections::BTreeSet;

use super::{ExecOutcome, PropertyKind, PropertyValue, Scenario};
use crate::numeric::Scalar;
use crate::pddl::Ground;
use crate::planner::{search, SearchBudget, SearchOutcome};

/// Structural checks on a scenario bundle. Returns every problem found.
pub fn validate_bundle<N: Scalar>(sc: &Scenario<N>, budget: &SearchBudget) -> Result<(), Vec<String>> {
    let mut issues = Vec::new();
    let w = &sc.world;
    let (ad, td) = (&sc.agent_domain, &w.truth_domain);

    for name in &sc.unlisted {
        if !ad.declares(name) {
            issues.push(format!("unlisted symbol {name} is not declared by the agent domain"));
        }
    }
    for a in &ad.actions {
        let Some(t) = td.action(&a.name) else {
            issues.push(format!("agent action {} missing from truth domain", a.name));
            continue;
        };
        if a.params != t.params {
            issues.push(format!("action {}: parameters differ", a.name));
        }
        if a.add != t.add || a.del != t.del || a.numeric != t.numeric {
            issues.push(format!("action {}: effects differ", a.name));
        }
        for c in &a.precondition.conjuncts {
            if !t.precondition.conjuncts.contains(c) {
                issues.push(format!("action {}: agent conjunct {} not in truth precondition", a.name, c.render()));
            }
        }
    }
    for t in &td.actions {
        if ad.action(&t.name).is_none() {
            issues.push(format!("truth action {} missing from agent domain", t.name));
        }
        let mut ids = BTreeSet::new();
        for c in &t.precondition.conjuncts {
            let id = c.id();
            if !ids.insert(id.clone()) {
                issues.push(format!("action {}: duplicate conjunct id {id}", t.name));
            }
            let key = format!("{}/{id}", t.name);
            if !w.observations.contains_key(&key) {
                issues.push(format!("missing observation template {key}"));
            }
        }
        if !w.action_texts.contains_key(&t.name) {
            issues.push(format!("missing action description for {}", t.name));
        }
    }
    for p in &ad.predicates {
        if td.predicate(&p.name).is_none_or(|t| t.params != p.params) {
            issues.push(format!("agent predicate {} not declared identically in truth domain", p.name));
        }
    }
    for f in &ad.functions {
        if td.function(&f.name).is_none_or(|t| t.params != f.params) {
            issues.push(format!("agent function {} not declared identically in truth domain", f.name));
        }
    }

    let (ap, tp) = (&sc.agent_problem, &w.truth_problem);
    for (o, ty) in &tp.objects {
        match w.entry(o) {
            None => issues.push(format!("catalogue lacks object {o}")),
            Some(e) if &e.ty != ty => issues.push(format!("catalogue type of {o} is {}, truth says {ty}", e.ty)),
            _ => {}
        }
    }
    for e in &w.catalogue {
        if !tp.has_object(&e.name) {
            issues.push(format!("catalogue object {} not in truth problem", e.name));
        }
    }
    for (o, ty) in &ap.objects {
        if tp.object_type(o) != Some(ty.as_str()) {
            issues.push(format!("agent object {o} - {ty} not in truth problem with that type"));
        }
    }
    for a in &ap.init_atoms {
        if !tp.init_atoms.contains(a) {
            issues.push(format!("agent init atom {a} not true in truth init"));
        }
    }
    for (k, v) in &ap.init_fluents {
        if tp.init_fluents.get(k) != Some(v) {
            issues.push(format!("agent init value of {k} disagrees with truth"));
        }
    }
    if ap.goal != tp.goal {
        issues.push("agent and truth goals differ".to_string());
    }

    let kinds = w.property_kinds();
    for e in &w.catalogue {
        for prop in e.properties.keys() {
            if !kinds.contains_key(prop) {
                issues.push(format!("catalogue property {}.{prop} is not a unary truth predicate or function", e.name));
            }
        }
        let Some(ty) = tp.object_type(&e.name) else { continue };
        for (prop, kind) in &kinds {
            let g = Ground::new(prop.clone(), [e.name.clone()]);
            let param_ty = match kind {
                PropertyKind::Bool => &td.predicate(prop).expect("listed").params[0].ty,
                PropertyKind::Number => &td.function(prop).expect("listed").params[0].ty,
            };
            let applies = td.types.is_subtype(ty, param_ty);
            let truth = match kind {
                PropertyKind::Bool if applies => PropertyValue::Bool(tp.init_atoms.contains(&g)),
                PropertyKind::Number => tp.init_fluents.get(&g).cloned().map_or(PropertyValue::Absent, PropertyValue::Number),
                PropertyKind::Bool => PropertyValue::Absent,
            };
            let listed = e.properties.get(prop).cloned().unwrap_or(PropertyValue::Absent);
            if listed != truth {
                issues.push(format!("catalogue {}.{prop} = {listed}, truth init says {truth}", e.name));
            }
        }
    }

    match search(&w.task, budget).0 {
        SearchOutcome::Plan(steps) => match w.execute(&steps) {
            Ok(ex) if ex.outcome == ExecOutcome::GoalReached => {}
            Ok(ex) => issues.push(format!("complete-knowledge plan does not reach the goal: {:?}", ex.outcome)),
            Err(e) => issues.push(e.to_string()),
        },
        SearchOutcome::NoPlan => issues.push("no complete-knowledge solution".to_string()),
        SearchOutcome::BudgetExhausted => issues.push("complete-knowledge search exhausted its budget".to_string()),
    }

    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}
