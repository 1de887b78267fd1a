//! Grounding, forward A* search and plan simulation.

mod ground;
mod search;
mod state;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::Scalar;
use crate::pddl::{render_ground_action, Domain, Problem};

pub use ground::{ApplyError, GroundAction, GroundError, GroundTask};
pub use search::{search, Heuristic, SearchBudget, SearchOutcome, SearchStats};
pub use state::{EvalError, GroundAssign, GroundCondition, GroundConjunct, GroundExpr, State};
pub use validate::{validate_steps, FailureKind, PlanFailure};

/// A ground action reference: schema name plus bound objects in parameter order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub schema: String,
    pub args: Vec<String>,
}

impl Step {
    pub fn new(schema: impl Into<String>, args: Vec<String>) -> Self {
        Step { schema: schema.into(), args }
    }

    /// Parses `(name a b)`.
    pub fn parse(text: &str) -> Option<Step> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        let mut words = inner.split_whitespace().map(str::to_lowercase);
        let schema = words.next()?;
        Some(Step { schema, args: words.collect() })
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_ground_action(&self.schema, &self.args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<Step>,
    /// Version of the model that produced the plan.
    pub model_version: u64,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One ground action per line.
pub fn render_plan(steps: &[Step]) -> String {
    steps.iter().map(|s| format!("{s}\n")).collect()
}

/// Reads a plan dump; blank lines and `;` comments are skipped.
pub fn parse_plan(text: &str) -> Option<Vec<Step>> {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(Step::parse)
        .collect()
}

pub fn ground<N: Scalar>(domain: &Domain<N>, problem: &Problem<N>) -> Result<Vec<GroundAction<N>>, GroundError> {
    Ok(GroundTask::new(domain, problem)?.actions)
}

pub fn find_plan<N: Scalar>(
    domain: &Domain<N>,
    problem: &Problem<N>,
    budget: &SearchBudget,
) -> Result<(SearchOutcome, SearchStats), GroundError> {
    Ok(search(&GroundTask::new(domain, problem)?, budget))
}

pub fn validate_plan<N: Scalar>(
    domain: &Domain<N>,
    problem: &Problem<N>,
    steps: &[Step],
) -> Result<Result<State<N>, PlanFailure>, GroundError> {
    Ok(validate_steps(&GroundTask::new(domain, problem)?, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem, Ground};
    use crate::Rational;

    const DOMAIN: &str = r#"
(define (domain fruit)
  (:requirements :typing :negative-preconditions :numeric-fluents)
  (:types receptacle - location robot location object)
  (:predicates (at ?o - object ?l - location) (holding ?r - robot ?o - object)
               (is-open ?c - receptacle) (empty ?r - robot) (in ?o - object ?c - receptacle))
  (:functions (temperature ?o - object))
  (:action open :parameters (?r - robot ?c - receptacle)
    :precondition (and (not (is-open ?c)))
    :effect (is-open ?c))
  (:action take :parameters (?r - robot ?o - object ?l - location)
    :precondition (and (at ?o ?l) (empty ?r))
    :effect (and (holding ?r ?o) (not (at ?o ?l)) (not (empty ?r))))
  (:action put :parameters (?r - robot ?o - object ?c - receptacle)
    :precondition (and (holding ?r ?o) (is-open ?c))
    :effect (and (in ?o ?c) (empty ?r) (not (holding ?r ?o)) (assign (temperature ?o) 5))))
"#;

    fn problem(goal: &str) -> (Domain<Rational>, Problem<Rational>) {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(
            &format!(
                "(define (problem p) (:domain fruit) (:objects rob - robot table - location fridge box - receptacle apple - object)
                 (:init (at apple table) (empty rob) (= (temperature apple) 20)) (:goal {goal}))"
            ),
            &d,
        )
        .unwrap();
        (d, p)
    }

    fn steps(text: &str) -> Vec<Step> {
        parse_plan(text).unwrap()
    }

    #[test]
    fn grounding_counts_typed_bindings() {
        let (d, p) = problem("(in apple fridge)");
        // locations: table fridge box; receptacles: fridge box
        assert_eq!(ground(&d, &p).unwrap().len(), 2 + 3 + 2);
        let acts = ground(&d, &p).unwrap();
        let rank = |o: &String| p.objects.iter().position(|(n, _)| n == o);
        let order = |a: &GroundAction<Rational>| {
            (d.actions.iter().position(|s| s.name == a.schema), a.args.iter().map(rank).collect::<Vec<_>>())
        };
        assert!(acts.windows(2).all(|w| order(&w[0]) < order(&w[1])));
        assert_eq!(acts[0].schema, "open");
    }

    #[test]
    fn finds_optimal_plan_with_both_heuristics() {
        let (d, p) = problem("(and (in apple fridge) (< (temperature apple) 10))");
        for heuristic in [Heuristic::Blind, Heuristic::Additive] {
            let budget = SearchBudget { heuristic, ..SearchBudget::default() };
            let (out, _) = find_plan(&d, &p, &budget).unwrap();
            assert_eq!(out, SearchOutcome::Plan(steps("(open rob fridge)\n(take rob apple table)\n(put rob apple fridge)")));
        }
    }

    #[test]
    fn unreachable_goal_is_no_plan() {
        let (d, p) = problem("(at apple fridge)");
        for heuristic in [Heuristic::Blind, Heuristic::Additive] {
            let budget = SearchBudget { heuristic, ..SearchBudget::default() };
            assert_eq!(find_plan(&d, &p, &budget).unwrap().0, SearchOutcome::NoPlan);
        }
    }

    #[test]
    fn node_cap_is_budget_exhausted() {
        let (d, p) = problem("(in apple fridge)");
        let budget = SearchBudget { max_nodes: 1, ..SearchBudget::default() };
        assert_eq!(find_plan(&d, &p, &budget).unwrap().0, SearchOutcome::BudgetExhausted);
    }

    #[test]
    fn validation_reports_first_unmet_conjunct() {
        let (d, p) = problem("(in apple fridge)");
        let good = steps("(open rob fridge)\n(take rob apple table)\n(put rob apple fridge)");
        let end = validate_plan(&d, &p, &good).unwrap().unwrap();
        let task = GroundTask::new(&d, &p).unwrap();
        assert!(task.holds(&end, &Ground::new("in", ["apple", "fridge"])));
        assert_eq!(task.value_of(&end, &Ground::new("temperature", ["apple"])), Some(&Rational::from_integer(5)));

        let swapped = steps("(open rob fridge)\n(put rob apple fridge)\n(take rob apple table)");
        let err = validate_plan(&d, &p, &swapped).unwrap().unwrap_err();
        assert_eq!(err, PlanFailure { step: 1, kind: FailureKind::Unmet(0) });

        let short = steps("(open rob fridge)");
        assert_eq!(validate_plan(&d, &p, &short).unwrap().unwrap_err().kind, FailureKind::GoalUnmet(0));
        assert_eq!(
            validate_plan(&d, &p, &steps("(fly rob)")).unwrap().unwrap_err().kind,
            FailureKind::UnknownAction
        );
    }

    #[test]
    fn empty_plan_validates_when_goal_already_holds() {
        let (d, p) = problem("(at apple table)");
        assert!(validate_plan(&d, &p, &[]).unwrap().is_ok());
        assert_eq!(find_plan(&d, &p, &SearchBudget::default()).unwrap().0, SearchOutcome::Plan(vec![]));
    }

    #[test]
    fn apply_leaves_input_untouched() {
        let (d, p) = problem("(in apple fridge)");
        let task = GroundTask::new(&d, &p).unwrap();
        let open = task.action("open", &["rob".into(), "fridge".into()]).unwrap();
        let before = task.init.clone();
        let after = open.apply(&task.init).unwrap();
        assert_eq!(task.init, before);
        assert_ne!(after, before);
        assert_eq!(open.apply(&after), Err(ApplyError::Unsatisfied(0)));
    }

    #[test]
    fn valueless_fluent_is_strict_error_but_lenient_false() {
        let d = parse_domain::<Rational>(DOMAIN).unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain fruit) (:objects rob - robot apple - object) (:init) (:goal (< (temperature apple) 10)))",
            &d,
        )
        .unwrap();
        let task = GroundTask::new(&d, &p).unwrap();
        assert!(task.goal.satisfied(&task.init).is_err());
        assert!(!task.goal.holds_lenient(&task.init));
        assert_eq!(search(&task, &SearchBudget::default()).0, SearchOutcome::NoPlan);
    }

    #[test]
    fn plan_dump_round_trips() {
        let s = steps("; header\n(open rob fridge)\n\n(TAKE rob apple table)\n");
        assert_eq!(render_plan(&s), "(open rob fridge)\n(take rob apple table)\n");
    }
}
