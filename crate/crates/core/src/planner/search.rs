use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::ground::GroundTask;
use super::state::{GroundConjunct, State};
use super::Step;
use crate::numeric::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    /// h = 0; plans are length-optimal.
    #[default]
    Blind,
    /// Additive delete relaxation. Comparisons and negative literals are
    /// assumed satisfiable.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: usize,
    #[serde(default, with = "opt_millis")]
    pub time_limit: Option<Duration>,
    #[serde(default)]
    pub heuristic: Heuristic,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 1_000_000, time_limit: None, heuristic: Heuristic::Blind }
    }
}

mod opt_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&(d.as_millis() as u64)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Plan(Vec<Step>),
    /// The reachable space was exhausted without meeting the goal.
    NoPlan,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
}

struct Node {
    parent: Option<(usize, usize)>,
    g: usize,
}

const INF: usize = usize::MAX;

fn additive<N: Scalar>(task: &GroundTask<N>, s: &State<N>, cost: &mut Vec<usize>) -> usize {
    cost.clear();
    cost.resize(task.atoms.len(), INF);
    for i in s.true_atoms() {
        if i < cost.len() {
            cost[i] = 0;
        }
    }
    let pre_cost = |cost: &[usize], pre: &[GroundConjunct<N>]| {
        let mut total = 0usize;
        for c in pre {
            if let GroundConjunct::Atom { atom, positive: true } = c {
                if cost[*atom] == INF {
                    return INF;
                }
                total += cost[*atom];
            }
        }
        total
    };
    loop {
        let mut changed = false;
        for a in &task.actions {
            let p = pre_cost(cost, &a.pre.conjuncts);
            if p == INF {
                continue;
            }
            for &e in &a.add {
                if p + 1 < cost[e] {
                    cost[e] = p + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    pre_cost(cost, &task.goal.conjuncts)
}

/// A* over ground states with FIFO tie-breaking among equal (f, h).
/// Successors are generated in the task's sorted action order.
pub fn search<N: Scalar>(task: &GroundTask<N>, budget: &SearchBudget) -> (SearchOutcome, SearchStats) {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let mut scratch = Vec::new();
    let mut h_of = |s: &State<N>| match budget.heuristic {
        Heuristic::Blind => 0,
        Heuristic::Additive => additive(task, s, &mut scratch),
    };

    let h0 = h_of(&task.init);
    if h0 == INF {
        return (SearchOutcome::NoPlan, stats);
    }
    let mut nodes: Vec<Node> = vec![Node { parent: None, g: 0 }];
    let mut states: Vec<State<N>> = vec![task.init.clone()];
    let mut best: HashMap<State<N>, usize> = HashMap::new();
    best.insert(task.init.clone(), 0);
    let mut open = BinaryHeap::new();
    let mut seq = 0usize;
    open.push(Reverse((h0, h0, seq, 0usize)));

    while let Some(Reverse((_, _, _, id))) = open.pop() {
        let g = nodes[id].g;
        if best.get(&states[id]).is_some_and(|&b| b < g) {
            continue;
        }
        if task.goal.holds_lenient(&states[id]) {
            let mut steps = Vec::new();
            let mut cur = id;
            while let Some((p, a)) = nodes[cur].parent {
                let act = &task.actions[a];
                steps.push(Step::new(act.schema.clone(), act.args.clone()));
                cur = p;
            }
            steps.reverse();
            return (SearchOutcome::Plan(steps), stats);
        }
        if stats.expanded >= budget.max_nodes || budget.time_limit.is_some_and(|t| start.elapsed() >= t) {
            return (SearchOutcome::BudgetExhausted, stats);
        }
        stats.expanded += 1;
        for (ai, a) in task.actions.iter().enumerate() {
            if !a.pre.holds_lenient(&states[id]) {
                continue;
            }
            let Ok(next) = a.apply_effects(&states[id]) else { continue };
            stats.generated += 1;
            let ng = g + 1;
            match best.entry(next.clone()) {
                Entry::Occupied(mut e) => {
                    if *e.get() <= ng {
                        continue;
                    }
                    e.insert(ng);
                }
                Entry::Vacant(e) => {
                    e.insert(ng);
                }
            }
            let h = h_of(&next);
            if h == INF {
                continue;
            }
            nodes.push(Node { parent: Some((id, ai)), g: ng });
            states.push(next);
            seq += 1;
            open.push(Reverse((ng + h, h, seq, nodes.len() - 1)));
        }
    }
    (SearchOutcome::NoPlan, stats)
}
