//! Random planning models and a naive set-based simulator used as the
//! reference in property tests. The simulator works on the parsed
//! `Domain`/`Problem` directly and shares no code with the planner.

#![allow(dead_code)]

pub mod checks;
pub mod golden;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use lasp_core::pddl::{
    parse_domain, parse_problem, ActionSchema, ArithOp, AssignOp, Condition, Conjunct, Domain, Ground, NumExpr, Problem,
};
use lasp_core::planner::Step;
use lasp_core::Rational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// Which PDDL features the generator may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Features {
    /// Finite state spaces: numeric effects only assign constants, no division.
    Finite,
    /// Everything the parser accepts: arithmetic, increase/decrease, fractions, object constants in goals.
    Full,
}

pub struct Generated {
    pub domain_text: String,
    pub problem_text: String,
    pub domain: Domain<Rational>,
    pub problem: Problem<Rational>,
}

struct Sig {
    name: String,
    params: Vec<String>,
}

struct Gen {
    rng: StdRng,
    features: Features,
    types: Vec<(String, String)>,
    objects: Vec<(String, String)>,
    preds: Vec<Sig>,
    funcs: Vec<Sig>,
    /// Object constants may fill argument slots.
    constants: bool,
}

impl Gen {
    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut t = sub.to_string();
        loop {
            if t == sup {
                return true;
            }
            match self.types.iter().find(|(n, _)| *n == t) {
                Some((_, parent)) => t = parent.clone(),
                None => return false,
            }
        }
    }

    fn type_names(&self) -> Vec<String> {
        std::iter::once("object".to_string()).chain(self.types.iter().map(|(n, _)| n.clone())).collect()
    }

    fn literal(&mut self) -> String {
        match self.features {
            Features::Finite => self.rng.random_range(0..4).to_string(),
            Features::Full => match self.rng.random_range(0..4) {
                0 => format!("{}/3", self.rng.random_range(-5..6)),
                1 => format!("{}.5", self.rng.random_range(0..4)),
                _ => self.rng.random_range(-3..6).to_string(),
            },
        }
    }

    /// Arguments for `params` drawn from `vars` (`(name, type)`), or from
    /// object constants when `constants` is set. `None` when a slot has no fit.
    fn args(&mut self, params: &[String], vars: &[(String, String)]) -> Option<Vec<String>> {
        let mut out = Vec::new();
        for ty in params {
            let mut fits: Vec<String> = vars.iter().filter(|(_, t)| self.is_subtype(t, ty)).map(|(v, _)| v.clone()).collect();
            if self.constants && (fits.is_empty() || self.chance(0.15)) {
                fits.extend(self.objects.iter().filter(|(_, t)| self.is_subtype(t, ty)).map(|(o, _)| o.clone()));
            }
            if fits.is_empty() {
                return None;
            }
            out.push(self.pick(&fits).clone());
        }
        Some(out)
    }

    fn app(name: &str, args: &[String]) -> String {
        if args.is_empty() {
            format!("({name})")
        } else {
            format!("({name} {})", args.join(" "))
        }
    }

    fn pred_app(&mut self, vars: &[(String, String)]) -> Option<String> {
        let i = self.rng.random_range(0..self.preds.len());
        let params = self.preds[i].params.clone();
        let args = self.args(&params, vars)?;
        Some(Self::app(&self.preds[i].name.clone(), &args))
    }

    fn func_app(&mut self, vars: &[(String, String)]) -> Option<String> {
        if self.funcs.is_empty() {
            return None;
        }
        let i = self.rng.random_range(0..self.funcs.len());
        let params = self.funcs[i].params.clone();
        let args = self.args(&params, vars)?;
        Some(Self::app(&self.funcs[i].name.clone(), &args))
    }

    fn num_expr(&mut self, vars: &[(String, String)], depth: u32) -> String {
        if self.features == Features::Full && depth < 2 && self.chance(0.25) {
            let op = *self.pick(&["+", "-", "*", "/"]);
            // Constant factors keep repeated effects far from i64 overflow.
            let rhs = if matches!(op, "*" | "/") {
                self.rng.random_range(1..4).to_string()
            } else {
                self.num_expr(vars, depth + 1)
            };
            return format!("({op} {} {rhs})", self.num_expr(vars, depth + 1));
        }
        if self.chance(0.6) {
            if let Some(f) = self.func_app(vars) {
                return f;
            }
        }
        self.literal()
    }

    fn comparison(&mut self, vars: &[(String, String)]) -> Option<String> {
        let lhs = self.func_app(vars)?;
        let ops: &[&str] = match self.features {
            Features::Finite => &["<", "<=", ">", ">="],
            Features::Full => &["<", "<=", ">", ">=", "="],
        };
        let op = *self.pick(ops);
        let rhs = self.num_expr(vars, 0);
        Some(format!("({op} {lhs} {rhs})"))
    }

    fn conjuncts(&mut self, vars: &[(String, String)], n: usize, neg: f64, cmp: f64) -> Vec<String> {
        let mut out = Vec::new();
        for _ in 0..n {
            let c = if self.chance(cmp) {
                self.comparison(vars)
            } else {
                self.pred_app(vars).map(|a| if self.chance(neg) { format!("(not {a})") } else { a })
            };
            out.extend(c);
        }
        out
    }

    fn action(&mut self, i: usize) -> String {
        let names = self.type_names();
        let nparams = self.rng.random_range(0..3);
        let vars: Vec<(String, String)> = (0..nparams).map(|j| (format!("?x{j}"), self.pick(&names).clone())).collect();
        let npre = self.rng.random_range(0..4);
        let pre = self.conjuncts(&vars, npre, 0.2, 0.2);
        let mut eff = Vec::new();
        // Consuming a precondition orders actions against each other.
        if let Some(used) = pre.iter().find(|c| c.starts_with("(p")) {
            if self.chance(0.5) {
                eff.push(format!("(not {used})"));
            }
        }
        for _ in 0..self.rng.random_range(1..3) {
            eff.extend(self.pred_app(&vars));
        }
        for _ in 0..self.rng.random_range(0..3) {
            eff.extend(self.pred_app(&vars).map(|a| format!("(not {a})")));
        }
        if self.chance(0.4) {
            if let Some(target) = self.func_app(&vars) {
                let e = match self.features {
                    Features::Finite => format!("(assign {target} {})", self.literal()),
                    Features::Full => {
                        let kw = *self.pick(&["assign", "increase", "decrease"]);
                        format!("({kw} {target} {})", self.num_expr(&vars, 0))
                    }
                };
                eff.push(e);
            }
        }
        let params: Vec<String> = vars.iter().map(|(v, t)| format!("{v} - {t}")).collect();
        format!(
            "  (:action a{i}\n    :parameters ({})\n    :precondition (and {})\n    :effect (and {}))\n",
            params.join(" "),
            pre.join(" "),
            eff.join(" ")
        )
    }

    fn sig_text(s: &Sig) -> String {
        let params: Vec<String> = s.params.iter().enumerate().map(|(j, t)| format!("?p{j} - {t}")).collect();
        if params.is_empty() {
            format!("({})", s.name)
        } else {
            format!("({} {})", s.name, params.join(" "))
        }
    }

    fn ground_all(&self, s: &Sig) -> Vec<String> {
        let mut out = vec![Vec::new()];
        for ty in &s.params {
            let objs: Vec<&String> = self.objects.iter().filter(|(_, t)| self.is_subtype(t, ty)).map(|(o, _)| o).collect();
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<String>| {
                    objs.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.push((*o).clone());
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(|args| Self::app(&s.name, &args)).collect()
    }
}

/// A random well-typed domain and problem: at most 6 objects, 5 schemas and 8 predicates.
pub fn random_model(seed: u64, features: Features) -> Generated {
    let mut g = Gen {
        rng: StdRng::seed_from_u64(seed),
        features,
        types: Vec::new(),
        objects: Vec::new(),
        preds: Vec::new(),
        funcs: Vec::new(),
        constants: false,
    };
    for i in 0..g.rng.random_range(0..3) {
        let parents = g.type_names();
        let parent = g.pick(&parents).clone();
        g.types.push((format!("t{i}"), parent));
    }
    let names = g.type_names();
    for i in 0..g.rng.random_range(1..7) {
        let t = g.pick(&names).clone();
        g.objects.push((format!("o{i}"), t));
    }
    for i in 0..g.rng.random_range(1..9) {
        let params = (0..g.rng.random_range(0..3)).map(|_| g.pick(&names).clone()).collect();
        g.preds.push(Sig { name: format!("p{i}"), params });
    }
    for i in 0..g.rng.random_range(0..3) {
        let params = (0..g.rng.random_range(0..2)).map(|_| g.pick(&names).clone()).collect();
        g.funcs.push(Sig { name: format!("f{i}"), params });
    }

    let mut d = String::from("(define (domain rnd)\n  (:requirements :strips :typing :negative-preconditions :numeric-fluents)\n");
    if !g.types.is_empty() {
        let ts: Vec<String> = g.types.iter().map(|(n, p)| format!("{n} - {p}")).collect();
        d.push_str(&format!("  (:types {})\n", ts.join(" ")));
    }
    d.push_str(&format!("  (:predicates {})\n", g.preds.iter().map(Gen::sig_text).collect::<Vec<_>>().join(" ")));
    if !g.funcs.is_empty() {
        d.push_str(&format!("  (:functions {})\n", g.funcs.iter().map(Gen::sig_text).collect::<Vec<_>>().join(" ")));
    }
    for i in 0..g.rng.random_range(1..6) {
        let a = g.action(i);
        d.push_str(&a);
    }
    d.push_str(")\n");

    let objs: Vec<String> = g.objects.iter().map(|(o, t)| format!("{o} - {t}")).collect();
    let mut init = Vec::new();
    for i in 0..g.preds.len() {
        for atom in g.ground_all(&g.preds[i]) {
            if g.chance(0.2) {
                init.push(atom);
            }
        }
    }
    for i in 0..g.funcs.len() {
        for term in g.ground_all(&g.funcs[i]) {
            let v = g.literal();
            init.push(format!("(= {term} {v})"));
        }
    }
    let problem_text = |goal: &[String]| {
        format!(
            "(define (problem rnd-{seed})\n  (:domain rnd)\n  (:objects {})\n  (:init {})\n  (:goal (and {})))\n",
            objs.join(" "),
            init.join(" "),
            goal.join(" ")
        )
    };
    let domain = parse_domain(&d).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{d}"));
    let scratch = parse_problem(&problem_text(&[]), &domain).unwrap_or_else(|e| panic!("seed {seed}: {e}"));

    // Most goals describe where a random walk ends up, so plans have some depth.
    let mut goal = if g.chance(0.75) { walk_goal(&mut g.rng, &domain, &scratch) } else { Vec::new() };
    g.constants = true;
    for _ in 0..20 {
        if !goal.is_empty() {
            break;
        }
        let n = g.rng.random_range(1..4);
        goal = g.conjuncts(&[], n, 0.2, 0.15);
    }
    let p = problem_text(&goal);
    let problem = parse_problem(&p, &domain).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{p}"));
    Generated { domain_text: d, problem_text: p, domain, problem }
}

fn walk_goal(rng: &mut StdRng, d: &Domain<Rational>, p: &Problem<Rational>) -> Vec<String> {
    let actions = naive_ground(d, p);
    let start = initial(p);
    let mut s = start.clone();
    let mut seen = HashSet::from([s.clone()]);
    for _ in 0..rng.random_range(4..16) {
        let next: Vec<SetState> = actions
            .iter()
            .filter(|a| first_unmet(&a.schema.precondition, &a.binding, &s).is_none())
            .filter_map(|a| apply(a, &s))
            .filter(|n| !seen.contains(n))
            .collect();
        if next.is_empty() {
            break;
        }
        s = next[rng.random_range(0..next.len())].clone();
        seen.insert(s.clone());
    }
    let mut diff: Vec<String> = s.atoms.difference(&start.atoms).map(|a| a.to_string()).collect();
    diff.extend(start.atoms.difference(&s.atoms).map(|a| format!("(not {a})")));
    diff.extend(s.fluents.iter().filter(|(k, v)| start.fluents.get(*k) != Some(*v)).map(|(k, v)| format!("(= {k} {v})")));
    let mut goal = Vec::new();
    for _ in 0..rng.random_range(3..7).min(diff.len()) {
        goal.push(diff.swap_remove(rng.random_range(0..diff.len())));
    }
    goal
}

/// Explicit state: true atoms and fluent values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetState {
    pub atoms: BTreeSet<Ground>,
    pub fluents: BTreeMap<Ground, Rational>,
}

pub struct NaiveAction<'a> {
    pub schema: &'a ActionSchema<Rational>,
    pub binding: BTreeMap<String, String>,
    pub step: Step,
}

/// Every binding of every schema, schema order then object order.
pub fn naive_ground<'a>(d: &'a Domain<Rational>, p: &Problem<Rational>) -> Vec<NaiveAction<'a>> {
    let mut out = Vec::new();
    for schema in &d.actions {
        let mut bindings: Vec<Vec<String>> = vec![Vec::new()];
        for param in &schema.params {
            let objs: Vec<&String> =
                p.objects.iter().filter(|(_, t)| d.types.is_subtype(t, &param.ty)).map(|(o, _)| o).collect();
            bindings = bindings
                .into_iter()
                .flat_map(|prefix| {
                    objs.iter().map(move |o| {
                        let mut v = prefix.clone();
                        v.push((*o).clone());
                        v
                    })
                })
                .collect();
        }
        for args in bindings {
            let binding = schema.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
            out.push(NaiveAction { schema, binding, step: Step::new(schema.name.clone(), args) });
        }
    }
    out
}

pub fn initial(p: &Problem<Rational>) -> SetState {
    SetState { atoms: p.init_atoms.clone(), fluents: p.init_fluents.clone() }
}

fn eval(e: &NumExpr<Rational>, b: &BTreeMap<String, String>, s: &SetState) -> Option<Rational> {
    match e {
        NumExpr::Const(n) => Some(*n),
        NumExpr::App(a) => s.fluents.get(&a.ground(b)?).copied(),
        NumExpr::Bin(op, l, r) => {
            let (l, r) = (eval(l, b, s)?, eval(r, b, s)?);
            match op {
                ArithOp::Add => Some(l + r),
                ArithOp::Sub => Some(l - r),
                ArithOp::Mul => Some(l * r),
                ArithOp::Div => (!r.is_zero()).then(|| l / r),
            }
        }
    }
}

/// `None` when a comparison reads an undefined value.
pub fn holds(c: &Conjunct<Rational>, b: &BTreeMap<String, String>, s: &SetState) -> Option<bool> {
    match c {
        Conjunct::Literal { atom, positive } => Some(s.atoms.contains(&atom.ground(b)?) == *positive),
        Conjunct::Compare { op, lhs, rhs } => Some(op.holds(&eval(lhs, b, s)?, &eval(rhs, b, s)?)),
    }
}

/// Index of the first conjunct that fails (an undefined value counts as failing).
pub fn first_unmet(cond: &Condition<Rational>, b: &BTreeMap<String, String>, s: &SetState) -> Option<usize> {
    cond.conjuncts.iter().position(|c| holds(c, b, s) != Some(true))
}

/// `(s \ Del) ∪ Add`, numeric effects read from `s`. `None` if a value is undefined.
pub fn apply(a: &NaiveAction, s: &SetState) -> Option<SetState> {
    let b = &a.binding;
    let mut values = Vec::new();
    for e in &a.schema.numeric {
        let target = e.target.ground(b)?;
        let v = eval(&e.value, b, s)?;
        let new = match e.op {
            AssignOp::Assign => v,
            AssignOp::Increase => *s.fluents.get(&target)? + v,
            AssignOp::Decrease => *s.fluents.get(&target)? - v,
        };
        values.push((target, new));
    }
    let del: BTreeSet<Ground> = a.schema.del.iter().map(|d| d.ground(b)).collect::<Option<_>>()?;
    let add: BTreeSet<Ground> = a.schema.add.iter().map(|d| d.ground(b)).collect::<Option<_>>()?;
    let atoms = s.atoms.difference(&del).cloned().collect::<BTreeSet<_>>().union(&add).cloned().collect();
    let mut fluents = s.fluents.clone();
    fluents.extend(values);
    Some(SetState { atoms, fluents })
}

pub fn goal_holds(p: &Problem<Rational>, s: &SetState) -> bool {
    first_unmet(&p.goal, &BTreeMap::new(), s).is_none()
}

pub enum Bfs {
    Optimal(usize),
    Unsolvable,
    TooLarge,
}

/// Breadth-first search over explicit states, giving up after `cap` states.
pub fn bfs(d: &Domain<Rational>, p: &Problem<Rational>, cap: usize) -> Bfs {
    let actions = naive_ground(d, p);
    let start = initial(p);
    if goal_holds(p, &start) {
        return Bfs::Optimal(0);
    }
    let mut seen: HashSet<SetState> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, g)) = queue.pop_front() {
        for a in &actions {
            if first_unmet(&a.schema.precondition, &a.binding, &s).is_some() {
                continue;
            }
            let Some(next) = apply(a, &s) else { continue };
            if seen.contains(&next) {
                continue;
            }
            if goal_holds(p, &next) {
                return Bfs::Optimal(g + 1);
            }
            if seen.len() >= cap {
                return Bfs::TooLarge;
            }
            seen.insert(next.clone());
            queue.push_back((next, g + 1));
        }
    }
    Bfs::Unsolvable
}

/// Runs `steps` with the naive simulator: the final state, or the failing
/// step and its first unmet conjunct.
pub fn simulate(d: &Domain<Rational>, p: &Problem<Rational>, steps: &[Step]) -> Result<SetState, (usize, usize)> {
    let actions = naive_ground(d, p);
    let mut s = initial(p);
    for (i, step) in steps.iter().enumerate() {
        let a = actions.iter().find(|a| &a.step == step).ok_or((i, usize::MAX))?;
        if let Some(c) = first_unmet(&a.schema.precondition, &a.binding, &s) {
            return Err((i, c));
        }
        s = apply(a, &s).ok_or((i, usize::MAX))?;
    }
    Ok(s)
}
