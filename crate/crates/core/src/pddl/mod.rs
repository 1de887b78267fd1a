//! PDDL subset: typing, negative preconditions and numeric fluents.
//!
//! Values are immutable once parsed; the repair loop clones and extends them.

mod parse;
mod render;
mod typecheck;
mod types;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::numeric::Scalar;

pub use parse::{parse_conjunct_syntax, parse_condition_sexpr, parse_domain, parse_problem, ConditionError, ParseError};
pub use render::{render_domain, render_ground_action, render_problem, render_signature};
pub use typecheck::{typecheck_action, typecheck_condition, typecheck_conjunct, Scope, TypeCheckError};
pub use types::{TypeTree, TypeTreeError, ROOT_TYPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    NumericFluents,
    Fluents,
}

impl Requirement {
    pub fn from_flag(flag: &str) -> Option<Self> {
        Some(match flag {
            ":strips" => Requirement::Strips,
            ":typing" => Requirement::Typing,
            ":negative-preconditions" => Requirement::NegativePreconditions,
            ":numeric-fluents" => Requirement::NumericFluents,
            ":fluents" => Requirement::Fluents,
            _ => return None,
        })
    }

    pub fn flag(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::NumericFluents => ":numeric-fluents",
            Requirement::Fluents => ":fluents",
        }
    }
}

/// `?name - type`. The variable name keeps its leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedVar {
    pub name: String,
    pub ty: String,
}

impl TypedVar {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedVar { name: name.into(), ty: ty.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSignature {
    pub name: String,
    pub params: Vec<TypedVar>,
}

/// Numeric function; the codomain is always the scalar type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSignature {
    pub name: String,
    pub params: Vec<TypedVar>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Object(String),
}

impl Term {
    pub fn parse(text: &str) -> Term {
        if text.starts_with('?') {
            Term::Var(text.to_string())
        } else {
            Term::Object(text.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Term::Var(s) | Term::Object(s) => s,
        }
    }
}

/// Predicate or function applied to terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Application {
    pub name: String,
    pub args: Vec<Term>,
}

impl Application {
    pub fn new(name: impl Into<String>, args: Vec<Term>) -> Self {
        Application { name: name.into(), args }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Object(_) => None,
        })
    }

    /// Substitutes variables; unbound variables yield `None`.
    pub fn ground(&self, binding: &BTreeMap<String, String>) -> Option<Ground> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => binding.get(v).cloned(),
                Term::Object(o) => Some(o.clone()),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Ground { name: self.name.clone(), args })
    }
}

/// A ground atom or a ground function term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ground {
    pub name: String,
    pub args: Vec<String>,
}

impl Ground {
    pub fn new<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Ground { name: name.into(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn mentions(&self, object: &str) -> bool {
        self.args.iter().any(|a| a == object)
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

pub type GroundAtom = Ground;
pub type FluentKey = Ground;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr<N> {
    Const(N),
    App(Application),
    Bin(ArithOp, Box<NumExpr<N>>, Box<NumExpr<N>>),
}

impl<N: Scalar> NumExpr<N> {
    pub fn applications(&self) -> Vec<&Application> {
        match self {
            NumExpr::Const(_) => Vec::new(),
            NumExpr::App(a) => vec![a],
            NumExpr::Bin(_, l, r) => {
                let mut v = l.applications();
                v.extend(r.applications());
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<" => CmpOp::Lt,
            ">" => CmpOp::Gt,
            "<=" => CmpOp::Le,
            ">=" => CmpOp::Ge,
            "=" => CmpOp::Eq,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
        }
    }

    pub fn holds<N: PartialOrd>(self, lhs: &N, rhs: &N) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Conjunct<N> {
    Literal { atom: Application, positive: bool },
    Compare { op: CmpOp, lhs: NumExpr<N>, rhs: NumExpr<N> },
}

impl<N: Scalar> Conjunct<N> {
    pub fn positive(atom: Application) -> Self {
        Conjunct::Literal { atom, positive: true }
    }

    pub fn negative(atom: Application) -> Self {
        Conjunct::Literal { atom, positive: false }
    }

    /// Short stable identifier: the predicate name (`not-` prefixed when
    /// negated) or, for comparisons, the first function mentioned.
    pub fn id(&self) -> String {
        match self {
            Conjunct::Literal { atom, positive: true } => atom.name.clone(),
            Conjunct::Literal { atom, positive: false } => format!("not-{}", atom.name),
            Conjunct::Compare { lhs, rhs, .. } => lhs
                .applications()
                .into_iter()
                .chain(rhs.applications())
                .next()
                .map(|a| a.name.clone())
                .unwrap_or_else(|| "compare".to_string()),
        }
    }

    /// Names of predicates and functions referenced.
    pub fn symbols(&self) -> Vec<&str> {
        match self {
            Conjunct::Literal { atom, .. } => vec![atom.name.as_str()],
            Conjunct::Compare { lhs, rhs, .. } => {
                lhs.applications().into_iter().chain(rhs.applications()).map(|a| a.name.as_str()).collect()
            }
        }
    }

    pub fn render(&self) -> String {
        render::conjunct(self)
    }
}

/// Conjunction of literals and numeric comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition<N> {
    pub conjuncts: Vec<Conjunct<N>>,
}

impl<N> Default for Condition<N> {
    fn default() -> Self {
        Condition { conjuncts: Vec::new() }
    }
}

impl<N: Scalar> Condition<N> {
    pub fn new(conjuncts: Vec<Conjunct<N>>) -> Self {
        Condition { conjuncts }
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Assign,
    Increase,
    Decrease,
}

impl AssignOp {
    pub fn keyword(self) -> &'static str {
        match self {
            AssignOp::Assign => "assign",
            AssignOp::Increase => "increase",
            AssignOp::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericEffect<N> {
    pub op: AssignOp,
    pub target: Application,
    pub value: NumExpr<N>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSchema<N> {
    pub name: String,
    pub params: Vec<TypedVar>,
    pub precondition: Condition<N>,
    pub add: Vec<Application>,
    pub del: Vec<Application>,
    pub numeric: Vec<NumericEffect<N>>,
}

impl<N: Scalar> ActionSchema<N> {
    pub fn param(&self, var: &str) -> Option<&TypedVar> {
        self.params.iter().find(|p| p.name == var)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain<N> {
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub types: TypeTree,
    pub predicates: Vec<PredicateSignature>,
    pub functions: Vec<FunctionSignature>,
    pub actions: Vec<ActionSchema<N>>,
}

impl<N: Scalar> Domain<N> {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSignature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSignature> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema<N>> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn action_mut(&mut self, name: &str) -> Option<&mut ActionSchema<N>> {
        self.actions.iter_mut().find(|a| a.name == name)
    }

    /// Whether `name` is declared as a predicate or a function.
    pub fn declares(&self, name: &str) -> bool {
        self.predicate(name).is_some() || self.function(name).is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem<N> {
    pub name: String,
    pub domain_name: String,
    /// `(object, type)` in declaration order.
    pub objects: Vec<(String, String)>,
    pub init_atoms: BTreeSet<GroundAtom>,
    pub init_fluents: BTreeMap<FluentKey, N>,
    pub goal: Condition<N>,
}

impl<N: Scalar> Problem<N> {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|(o, _)| o == name).map(|(_, t)| t.as_str())
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.object_type(name).is_some()
    }

    /// Objects whose type is a subtype of `ty`, in declaration order.
    pub fn objects_of<'a>(&'a self, types: &'a TypeTree, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects.iter().filter(move |(_, t)| types.is_subtype(t, ty)).map(|(o, _)| o.as_str())
    }

    /// True when at least one initial value of `function` is known.
    pub fn has_values_for(&self, function: &str) -> bool {
        self.init_fluents.keys().any(|k| k.name == function)
    }
}
