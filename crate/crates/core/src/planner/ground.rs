use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::state::{EvalError, GroundAssign, GroundCondition, GroundConjunct, GroundExpr, State};
use crate::numeric::Scalar;
use crate::pddl::{render_ground_action, AssignOp, Condition, Conjunct, Domain, Ground, NumExpr, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("unbound variable in {0}")]
    Unbound(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("precondition conjunct {0} does not hold")]
    Unsatisfied(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction<N> {
    pub schema: String,
    pub args: Vec<String>,
    pub pre: GroundCondition<N>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub assignments: Vec<GroundAssign<N>>,
}

impl<N: Scalar> GroundAction<N> {
    pub fn render(&self) -> String {
        render_ground_action(&self.schema, &self.args)
    }

    /// Successor state. Numeric effects read the pre-state; deletes apply before adds.
    pub fn apply(&self, s: &State<N>) -> Result<State<N>, ApplyError> {
        if let Some(i) = self.pre.first_unmet(s)? {
            return Err(ApplyError::Unsatisfied(i));
        }
        Ok(self.apply_effects(s)?)
    }

    pub(crate) fn apply_effects(&self, s: &State<N>) -> Result<State<N>, EvalError> {
        let mut values = Vec::with_capacity(self.assignments.len());
        for a in &self.assignments {
            let v = a.value.eval(s)?;
            let new = match a.op {
                AssignOp::Assign => v,
                AssignOp::Increase => s.value(a.target).cloned().ok_or(EvalError::MissingFluent(a.target))? + v,
                AssignOp::Decrease => s.value(a.target).cloned().ok_or(EvalError::MissingFluent(a.target))? - v,
            };
            values.push((a.target, new));
        }
        let mut next = s.clone();
        for &d in &self.del {
            next.set(d, false);
        }
        for &a in &self.add {
            next.set(a, true);
        }
        for (t, v) in values {
            next.set_value(t, v);
        }
        Ok(next)
    }
}

/// A problem compiled against its domain: interned atoms and fluents,
/// every ground action (schema declaration order, then object declaration order), the initial state and the goal.
#[derive(Debug, Clone)]
pub struct GroundTask<N> {
    pub atoms: Vec<Ground>,
    pub fluents: Vec<Ground>,
    pub actions: Vec<GroundAction<N>>,
    pub init: State<N>,
    pub goal: GroundCondition<N>,
    atom_index: HashMap<Ground, usize>,
    fluent_index: HashMap<Ground, usize>,
    action_index: HashMap<(String, Vec<String>), usize>,
}

#[derive(Default)]
struct Interner {
    atoms: Vec<Ground>,
    atom_index: HashMap<Ground, usize>,
    fluents: Vec<Ground>,
    fluent_index: HashMap<Ground, usize>,
}

impl Interner {
    fn atom(&mut self, g: Ground) -> usize {
        if let Some(&i) = self.atom_index.get(&g) {
            return i;
        }
        self.atoms.push(g.clone());
        self.atom_index.insert(g, self.atoms.len() - 1);
        self.atoms.len() - 1
    }

    fn fluent(&mut self, g: Ground) -> usize {
        if let Some(&i) = self.fluent_index.get(&g) {
            return i;
        }
        self.fluents.push(g.clone());
        self.fluent_index.insert(g, self.fluents.len() - 1);
        self.fluents.len() - 1
    }

    fn expr<N: Scalar>(&mut self, e: &NumExpr<N>, b: &BTreeMap<String, String>) -> Result<GroundExpr<N>, GroundError> {
        Ok(match e {
            NumExpr::Const(c) => GroundExpr::Const(c.clone()),
            NumExpr::App(a) => {
                let g = a.ground(b).ok_or_else(|| GroundError::Unbound(a.name.clone()))?;
                GroundExpr::Fluent(self.fluent(g))
            }
            NumExpr::Bin(op, l, r) => GroundExpr::Bin(*op, Box::new(self.expr(l, b)?), Box::new(self.expr(r, b)?)),
        })
    }

    fn condition<N: Scalar>(
        &mut self,
        c: &Condition<N>,
        b: &BTreeMap<String, String>,
    ) -> Result<GroundCondition<N>, GroundError> {
        let mut conjuncts = Vec::with_capacity(c.len());
        for cj in &c.conjuncts {
            conjuncts.push(match cj {
                Conjunct::Literal { atom, positive } => {
                    let g = atom.ground(b).ok_or_else(|| GroundError::Unbound(atom.name.clone()))?;
                    GroundConjunct::Atom { atom: self.atom(g), positive: *positive }
                }
                Conjunct::Compare { op, lhs, rhs } => {
                    GroundConjunct::Compare { op: *op, lhs: self.expr(lhs, b)?, rhs: self.expr(rhs, b)? }
                }
            });
        }
        Ok(GroundCondition { conjuncts })
    }
}

/// Every type-consistent binding of `params`, objects in declaration order.
/// Repeated objects are allowed.
fn bindings<N: Scalar>(domain: &Domain<N>, problem: &Problem<N>, param_types: &[&str]) -> Vec<Vec<String>> {
    let pools: Vec<Vec<&str>> = param_types.iter().map(|t| problem.objects_of(&domain.types, t).collect()).collect();
    let mut out = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for o in &pool {
                let mut v = prefix.clone();
                v.push((*o).to_string());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl<N: Scalar> GroundTask<N> {
    pub fn new(domain: &Domain<N>, problem: &Problem<N>) -> Result<Self, GroundError> {
        let mut int = Interner::default();
        let init_atoms: Vec<usize> = problem.init_atoms.iter().map(|g| int.atom(g.clone())).collect();
        let init_fluents: Vec<(usize, N)> =
            problem.init_fluents.iter().map(|(k, v)| (int.fluent(k.clone()), v.clone())).collect();
        let mut actions = Vec::new();
        for schema in &domain.actions {
            let types: Vec<&str> = schema.params.iter().map(|p| p.ty.as_str()).collect();
            for args in bindings(domain, problem, &types) {
                let b: BTreeMap<String, String> =
                    schema.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
                let pre = int.condition(&schema.precondition, &b)?;
                let mut add = Vec::new();
                for a in &schema.add {
                    let g = a.ground(&b).ok_or_else(|| GroundError::Unbound(a.name.clone()))?;
                    add.push(int.atom(g));
                }
                let mut del = Vec::new();
                for d in &schema.del {
                    let g = d.ground(&b).ok_or_else(|| GroundError::Unbound(d.name.clone()))?;
                    let i = int.atom(g);
                    if !add.contains(&i) {
                        del.push(i);
                    }
                }
                let mut assignments = Vec::new();
                for e in &schema.numeric {
                    let g = e.target.ground(&b).ok_or_else(|| GroundError::Unbound(e.target.name.clone()))?;
                    let target = int.fluent(g);
                    assignments.push(GroundAssign { op: e.op, target, value: int.expr(&e.value, &b)? });
                }
                actions.push(GroundAction { schema: schema.name.clone(), args, pre, add, del, assignments });
            }
        }
        let action_index =
            actions.iter().enumerate().map(|(i, a)| ((a.schema.clone(), a.args.clone()), i)).collect();
        let goal = int.condition(&problem.goal, &BTreeMap::new())?;
        for g in int.atoms.iter().chain(int.fluents.iter()) {
            if let Some(o) = g.args.iter().find(|o| !problem.has_object(o)) {
                return Err(GroundError::UnknownObject(o.clone()));
            }
        }
        let mut init = State::empty(int.atoms.len(), int.fluents.len());
        for a in init_atoms {
            init.set(a, true);
        }
        for (f, v) in init_fluents {
            init.set_value(f, v);
        }
        Ok(GroundTask {
            atoms: int.atoms,
            fluents: int.fluents,
            actions,
            init,
            goal,
            atom_index: int.atom_index,
            fluent_index: int.fluent_index,
            action_index,
        })
    }

    pub fn atom_id(&self, g: &Ground) -> Option<usize> {
        self.atom_index.get(g).copied()
    }

    pub fn fluent_id(&self, g: &Ground) -> Option<usize> {
        self.fluent_index.get(g).copied()
    }

    pub fn action(&self, schema: &str, args: &[String]) -> Option<&GroundAction<N>> {
        self.action_index.get(&(schema.to_string(), args.to_vec())).map(|&i| &self.actions[i])
    }

    /// True atoms of `s`, sorted.
    pub fn atoms_of(&self, s: &State<N>) -> Vec<&Ground> {
        let mut v: Vec<&Ground> = s.true_atoms().filter_map(|i| self.atoms.get(i)).collect();
        v.sort();
        v
    }

    /// Known fluent values of `s`, sorted by key.
    pub fn fluents_of(&self, s: &State<N>) -> BTreeMap<Ground, N> {
        self.fluents.iter().enumerate().filter_map(|(i, g)| s.value(i).map(|v| (g.clone(), v.clone()))).collect()
    }

    pub fn holds(&self, s: &State<N>, g: &Ground) -> bool {
        self.atom_id(g).is_some_and(|i| s.has(i))
    }

    pub fn value_of<'s>(&self, s: &'s State<N>, g: &Ground) -> Option<&'s N> {
        self.fluent_id(g).and_then(|i| s.value(i))
    }
}
