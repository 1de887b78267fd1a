//! Property checks shared by the dedicated suites and the acceptance runner.
//! Each returns `Err` with a reproducible description on the first disagreement.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use lasp_core::oracle::{ExecOutcome, OracleWorld};
use lasp_core::pddl::{parse_domain, parse_problem, render_domain, render_problem};
use lasp_core::planner::{find_plan, validate_plan, FailureKind, GroundTask, Heuristic, SearchBudget, SearchOutcome, State, Step};
use lasp_core::{Domain, Problem, Rational};

use super::{apply, bfs, first_unmet, goal_holds, initial, naive_ground, random_model, simulate, Bfs, Features, SetState};

pub const BFS_CAP: usize = 200_000;

#[derive(Debug, Default)]
pub struct SearchSummary {
    pub solvable: usize,
    /// Solvable models whose optimum is three steps or more.
    pub deep: usize,
    pub unsolvable: usize,
    pub skipped: usize,
}

/// A*(h=0) and A*(additive) against breadth-first search on one finite random model.
pub fn search_agreement(seed: u64, summary: &mut SearchSummary) -> Result<(), String> {
    let blind = SearchBudget { max_nodes: 4 * BFS_CAP, ..SearchBudget::default() };
    let additive = SearchBudget { heuristic: Heuristic::Additive, ..blind };
    let m = random_model(seed, Features::Finite);
    let ctx = |msg: String| format!("seed {seed}: {msg}\n{}\n{}", m.domain_text, m.problem_text);
    let expected = bfs(&m.domain, &m.problem, BFS_CAP);
    if matches!(expected, Bfs::TooLarge) {
        summary.skipped += 1;
        return Ok(());
    }
    let (out, _) = find_plan(&m.domain, &m.problem, &blind).map_err(|e| ctx(e.to_string()))?;
    let (out_add, _) = find_plan(&m.domain, &m.problem, &additive).map_err(|e| ctx(e.to_string()))?;
    let reaches_goal = |steps: &[Step]| simulate(&m.domain, &m.problem, steps).is_ok_and(|s| goal_holds(&m.problem, &s));
    match expected {
        Bfs::Optimal(n) => {
            summary.solvable += 1;
            summary.deep += usize::from(n >= 3);
            let SearchOutcome::Plan(steps) = out else { return Err(ctx(format!("blind: {out:?}, BFS optimum {n}"))) };
            if steps.len() != n {
                return Err(ctx(format!("blind plan has {} steps, BFS optimum {n}", steps.len())));
            }
            if !reaches_goal(&steps) {
                return Err(ctx("blind plan misses the goal".into()));
            }
            let SearchOutcome::Plan(steps) = out_add else { return Err(ctx(format!("additive: {out_add:?}"))) };
            if !reaches_goal(&steps) {
                return Err(ctx("additive plan misses the goal".into()));
            }
        }
        Bfs::Unsolvable => {
            summary.unsolvable += 1;
            if out != SearchOutcome::NoPlan || out_add != SearchOutcome::NoPlan {
                return Err(ctx(format!("BFS proves no plan; blind {out:?}, additive {out_add:?}")));
            }
        }
        Bfs::TooLarge => unreachable!(),
    }
    Ok(())
}

pub fn snapshot(task: &GroundTask<Rational>, s: &State<Rational>) -> SetState {
    SetState { atoms: task.atoms_of(s).into_iter().cloned().collect::<BTreeSet<_>>(), fluents: task.fluents_of(s) }
}

/// Walks the planner and the set-algebra reference side by side, comparing
/// applicability of every ground action and every successor state.
pub fn apply_agreement(seed: u64, choices: &[u16]) -> Result<(), String> {
    let m = random_model(seed, Features::Full);
    let fail = |msg: String| Err(format!("seed {seed} {choices:?}: {msg}"));
    let task = GroundTask::new(&m.domain, &m.problem).map_err(|e| e.to_string())?;
    let naive = naive_ground(&m.domain, &m.problem);
    let ours: Vec<Step> = task.actions.iter().map(|a| Step::new(a.schema.clone(), a.args.clone())).collect();
    let theirs: Vec<Step> = naive.iter().map(|a| a.step.clone()).collect();
    if ours != theirs {
        return fail("ground actions differ".into());
    }
    let mut s = task.init.clone();
    let mut reference = initial(&m.problem);
    if snapshot(&task, &s) != reference {
        return fail("initial states differ".into());
    }
    for &c in choices {
        let mut applicable = Vec::new();
        for (a, n) in task.actions.iter().zip(&naive) {
            let mine = matches!(a.pre.first_unmet(&s), Ok(None));
            let theirs = first_unmet(&n.schema.precondition, &n.binding, &reference).is_none();
            if mine != theirs {
                return fail(format!("applicability of {}: planner {mine}, reference {theirs}", a.render()));
            }
            if mine {
                applicable.push((a, n));
            }
        }
        if applicable.is_empty() {
            break;
        }
        let (a, n) = applicable[c as usize % applicable.len()];
        let before = snapshot(&task, &s);
        let next = a.apply(&s);
        if snapshot(&task, &s) != before {
            return fail(format!("apply of {} changed its input", a.render()));
        }
        match (next, apply(n, &reference)) {
            (Ok(next), Some(expected)) => {
                if snapshot(&task, &next) != expected {
                    return fail(format!("{}: successor differs from (s \\ del) + add", a.render()));
                }
                s = next;
                reference = expected;
            }
            (Err(_), None) => break,
            (got, want) => return fail(format!("{}: planner ok {}, reference ok {}", a.render(), got.is_ok(), want.is_some())),
        }
    }
    Ok(())
}

/// Steps of a walk guided by `choices`; a last choice divisible by 3 picks any
/// ground action, applicable or not.
fn walk(d: &Domain, p: &Problem, choices: &[u16]) -> Vec<Step> {
    let actions = naive_ground(d, p);
    let mut s = initial(p);
    let mut steps = Vec::new();
    for (i, &c) in choices.iter().enumerate() {
        if actions.is_empty() {
            break;
        }
        if i + 1 == choices.len() && c % 3 == 0 {
            steps.push(actions[c as usize % actions.len()].step.clone());
            break;
        }
        let ok: Vec<_> = actions
            .iter()
            .filter(|a| first_unmet(&a.schema.precondition, &a.binding, &s).is_none())
            .filter_map(|a| apply(a, &s).map(|n| (a, n)))
            .collect();
        if ok.is_empty() {
            break;
        }
        let (a, next) = &ok[c as usize % ok.len()];
        steps.push(a.step.clone());
        s = next.clone();
    }
    steps
}

/// An oracle over the model itself, with a template for every conjunct.
pub fn world(d: &Domain, p: &Problem) -> OracleWorld<Rational> {
    let mut observations = BTreeMap::new();
    let mut texts = BTreeMap::new();
    for a in &d.actions {
        texts.insert(a.name.clone(), format!("do {}", a.name));
        for c in &a.precondition.conjuncts {
            observations.insert(format!("{}/{}", a.name, c.id()), format!("{} failed on {}", a.name, c.id()));
        }
    }
    OracleWorld::new(d.clone(), p.clone(), Vec::new(), observations, texts, "Reach the goal.".into()).unwrap()
}

/// validate_plan, oracle execution and the reference simulator agree on a walk.
pub fn validation_agreement(seed: u64, choices: &[u16]) -> Result<(), String> {
    let m = random_model(seed, Features::Full);
    let steps = walk(&m.domain, &m.problem, choices);
    let fail = |msg: &str| Err(format!("seed {seed} {choices:?}: {msg}"));
    let w = world(&m.domain, &m.problem);
    let validated = validate_plan(&m.domain, &m.problem, &steps).map_err(|e| e.to_string())?;
    let executed = w.execute(&steps);
    let reference = simulate(&m.domain, &m.problem, &steps);
    match validated {
        Ok(end) => {
            let Ok(ex) = executed else { return fail("oracle errored on a valid plan") };
            if ex.outcome != ExecOutcome::GoalReached {
                return fail("validated plan does not reach the goal in the oracle");
            }
            if snapshot(&w.task, &ex.final_state) != snapshot(&w.task, &end) || reference != Ok(snapshot(&w.task, &end)) {
                return fail("final states differ");
            }
        }
        Err(f) => match f.kind {
            FailureKind::GoalUnmet(_) => {
                let ran_out = matches!(executed, Ok(ref ex) if ex.outcome == ExecOutcome::RanOut);
                if f.step != steps.len() || !ran_out || reference.is_err() {
                    return fail("goal failure not mirrored by the oracle");
                }
            }
            FailureKind::Unmet(c) => {
                let Ok(ExecOutcome::Failed(e)) = executed.map(|ex| ex.outcome) else {
                    return fail("oracle did not fail");
                };
                let schema = m.domain.action(&steps[f.step].schema).expect("walk uses declared schemas");
                if e.step != f.step || e.error_class.conjunct != schema.precondition.conjuncts[c].id() {
                    return fail("oracle failed at a different step or conjunct");
                }
                if reference != Err((f.step, c)) {
                    return fail("reference simulator disagrees on the failure");
                }
            }
            FailureKind::Eval(_) => {
                if executed.is_ok() {
                    return fail("evaluation error not mirrored by the oracle");
                }
            }
            FailureKind::UnknownAction => return fail("walk produced an unknown action"),
        },
    }
    Ok(())
}

/// parse(render(parse(text))) == parse(text) for a domain/problem pair, and render is stable.
pub fn roundtrip(label: &str, domain_text: &str, problem_text: &str) -> Result<(), String> {
    let d: Domain = parse_domain(domain_text).map_err(|e| format!("{label}: {e}"))?;
    let rendered = render_domain(&d);
    let again: Domain = parse_domain(&rendered).map_err(|e| format!("{label}: rendered domain: {e}\n{rendered}"))?;
    if again != d || render_domain(&again) != rendered {
        return Err(format!("{label}: domain changes across a round trip\n{rendered}"));
    }
    let p = parse_problem(problem_text, &d).map_err(|e| format!("{label}: {e}"))?;
    let rendered = render_problem(&p);
    let again = parse_problem(&rendered, &d).map_err(|e| format!("{label}: rendered problem: {e}\n{rendered}"))?;
    if again != p || render_problem(&again) != rendered {
        return Err(format!("{label}: problem changes across a round trip\n{rendered}"));
    }
    Ok(())
}

/// Every scenario directory shipped with the repository.
pub fn scenario_dirs() -> Vec<PathBuf> {
    let root = super::golden::root().join("scenarios");
    let mut dirs: Vec<PathBuf> =
        fs::read_dir(&root).unwrap().map(|e| e.unwrap().path()).filter(|d| d.join("env.json").exists()).collect();
    dirs.sort();
    dirs
}

/// Round trip of all four PDDL files of every scenario; returns the file count.
pub fn fixture_roundtrips() -> Result<usize, String> {
    let mut files = 0;
    for dir in scenario_dirs() {
        for side in ["agent", "oracle"] {
            let read = |f: String| fs::read_to_string(dir.join(&f)).map_err(|e| format!("{f}: {e}"));
            let label = format!("{}/{side}", dir.display());
            roundtrip(&label, &read(format!("{side}_domain.pddl"))?, &read(format!("{side}_problem.pddl"))?)?;
            files += 2;
        }
    }
    Ok(files)
}
