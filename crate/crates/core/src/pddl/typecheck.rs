use std::collections::BTreeMap;

use thiserror::Error;

use super::{ActionSchema, Application, Condition, Conjunct, Domain, NumExpr, Term, TypedVar};
use crate::numeric::Scalar;

/// Type errors are returned as data; callers decide whether they are fatal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeCheckError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("variable `{0}` is not bound by the parameter list")]
    UnboundVariable(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("argument {index} of `{name}`: `{term}` has type `{found}`, expected `{expected}`")]
    TypeMismatch { name: String, index: usize, term: String, found: String, expected: String },
    #[error("predicate `{0}` used as a numeric operand")]
    PredicateAsNumber(String),
    #[error("function `{0}` used as a literal")]
    FunctionAsLiteral(String),
    #[error("undeclared type `{0}`")]
    UnknownType(String),
}

/// Names visible while checking: bound variables and problem objects.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    vars: BTreeMap<String, String>,
    objects: BTreeMap<String, String>,
}

impl Scope {
    pub fn from_params(params: &[TypedVar]) -> Self {
        Scope { vars: params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(), objects: BTreeMap::new() }
    }

    pub fn from_objects(objects: &[(String, String)]) -> Self {
        Scope { vars: BTreeMap::new(), objects: objects.iter().cloned().collect() }
    }

    fn term_type(&self, term: &Term) -> Result<&str, TypeCheckError> {
        match term {
            Term::Var(v) => self.vars.get(v).map(String::as_str).ok_or_else(|| TypeCheckError::UnboundVariable(v.clone())),
            Term::Object(o) => self.objects.get(o).map(String::as_str).ok_or_else(|| TypeCheckError::UnknownObject(o.clone())),
        }
    }
}

fn check_args<N: Scalar>(
    domain: &Domain<N>,
    scope: &Scope,
    app: &Application,
    params: &[TypedVar],
    errors: &mut Vec<TypeCheckError>,
) {
    if params.len() != app.args.len() {
        errors.push(TypeCheckError::Arity { name: app.name.clone(), expected: params.len(), found: app.args.len() });
        return;
    }
    for (index, (term, param)) in app.args.iter().zip(params).enumerate() {
        match scope.term_type(term) {
            Err(e) => errors.push(e),
            Ok(found) if !domain.types.is_subtype(found, &param.ty) => errors.push(TypeCheckError::TypeMismatch {
                name: app.name.clone(),
                index: index + 1,
                term: term.as_str().to_string(),
                found: found.to_string(),
                expected: param.ty.clone(),
            }),
            Ok(_) => {}
        }
    }
}

fn check_atom<N: Scalar>(domain: &Domain<N>, scope: &Scope, atom: &Application, errors: &mut Vec<TypeCheckError>) {
    match domain.predicate(&atom.name) {
        Some(sig) => check_args(domain, scope, atom, &sig.params, errors),
        None if domain.function(&atom.name).is_some() => errors.push(TypeCheckError::FunctionAsLiteral(atom.name.clone())),
        None => errors.push(TypeCheckError::UnknownPredicate(atom.name.clone())),
    }
}

fn check_fn<N: Scalar>(domain: &Domain<N>, scope: &Scope, app: &Application, errors: &mut Vec<TypeCheckError>) {
    match domain.function(&app.name) {
        Some(sig) => check_args(domain, scope, app, &sig.params, errors),
        None if domain.predicate(&app.name).is_some() => errors.push(TypeCheckError::PredicateAsNumber(app.name.clone())),
        None => errors.push(TypeCheckError::UnknownFunction(app.name.clone())),
    }
}

fn check_expr<N: Scalar>(domain: &Domain<N>, scope: &Scope, expr: &NumExpr<N>, errors: &mut Vec<TypeCheckError>) {
    match expr {
        NumExpr::Const(_) => {}
        NumExpr::App(app) => check_fn(domain, scope, app, errors),
        NumExpr::Bin(_, l, r) => {
            check_expr(domain, scope, l, errors);
            check_expr(domain, scope, r, errors);
        }
    }
}

pub fn typecheck_conjunct<N: Scalar>(domain: &Domain<N>, scope: &Scope, conjunct: &Conjunct<N>) -> Vec<TypeCheckError> {
    let mut errors = Vec::new();
    match conjunct {
        Conjunct::Literal { atom, .. } => check_atom(domain, scope, atom, &mut errors),
        Conjunct::Compare { lhs, rhs, .. } => {
            check_expr(domain, scope, lhs, &mut errors);
            check_expr(domain, scope, rhs, &mut errors);
        }
    }
    errors
}

/// Checks every conjunct of `cond` against the signatures of `domain`.
pub fn typecheck_condition<N: Scalar>(
    domain: &Domain<N>,
    scope: &Scope,
    cond: &Condition<N>,
) -> Result<(), Vec<TypeCheckError>> {
    let errors: Vec<_> = cond.conjuncts.iter().flat_map(|c| typecheck_conjunct(domain, scope, c)).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Checks parameters, precondition and effects of one schema.
pub fn typecheck_action<N: Scalar>(domain: &Domain<N>, action: &ActionSchema<N>) -> Result<(), Vec<TypeCheckError>> {
    let mut errors = Vec::new();
    for p in &action.params {
        if !domain.types.contains(&p.ty) {
            errors.push(TypeCheckError::UnknownType(p.ty.clone()));
        }
    }
    let scope = Scope::from_params(&action.params);
    if let Err(e) = typecheck_condition(domain, &scope, &action.precondition) {
        errors.extend(e);
    }
    for atom in action.add.iter().chain(&action.del) {
        check_atom(domain, &scope, atom, &mut errors);
    }
    for eff in &action.numeric {
        check_fn(domain, &scope, &eff.target, &mut errors);
        check_expr(domain, &scope, &eff.value, &mut errors);
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
