use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use super::typecheck::{typecheck_action, typecheck_condition, typecheck_conjunct, Scope, TypeCheckError};
use super::{
    ActionSchema, Application, ArithOp, AssignOp, CmpOp, Condition, Conjunct, Domain, FunctionSignature, Ground,
    NumExpr, NumericEffect, PredicateSignature, Problem, Requirement, Term, TypeTree, TypedVar, ROOT_TYPE,
};
use crate::numeric::Scalar;
use crate::sexpr::{self, LexError, Pos, Sexpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unknown requirement flag `{flag}`")]
    UnknownRequirement { pos: Pos, flag: String },
    #[error("{pos}: undeclared type `{name}`")]
    UndeclaredType { pos: Pos, name: String },
    #[error("{pos}: duplicate {kind} `{name}`")]
    Duplicate { pos: Pos, kind: &'static str, name: String },
    #[error("{pos}: {error}")]
    Type { pos: Pos, error: TypeCheckError },
    #[error("{pos}: {0}", pos = .1)]
    Hierarchy(super::TypeTreeError, Pos),
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, message: message.into() }
}

fn list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], ParseError> {
    e.as_list().ok_or_else(|| syntax(e.pos(), format!("expected a list for {what}, found `{e}`")))
}

fn atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom().ok_or_else(|| syntax(e.pos(), format!("expected {what}, found `{e}`")))
}

fn ident<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    let s = atom(e, what)?;
    let valid = s.chars().next().is_some_and(|c| c.is_alphabetic())
        && s.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_');
    if valid {
        Ok(s)
    } else {
        Err(syntax(e.pos(), format!("invalid {what} `{s}`")))
    }
}

fn variable<'a>(e: &'a Sexpr) -> Result<&'a str, ParseError> {
    let s = atom(e, "a variable")?;
    if s.len() > 1 && s.starts_with('?') {
        Ok(s)
    } else {
        Err(syntax(e.pos(), format!("expected a variable, found `{s}`")))
    }
}

/// `a b - t c` → [(a, t), (b, t), (c, default)]
fn typed_list<'a>(
    items: &'a [Sexpr],
    default: Option<&str>,
    mut check_name: impl FnMut(&'a Sexpr) -> Result<&'a str, ParseError>,
) -> Result<Vec<(String, Option<String>, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<(&str, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        if items[i].as_atom() == Some("-") {
            let ty = items.get(i + 1).ok_or_else(|| syntax(items[i].pos(), "`-` without a type"))?;
            let ty = ident(ty, "a type name")?;
            if pending.is_empty() {
                return Err(syntax(items[i].pos(), "`-` with nothing to type"));
            }
            out.extend(pending.drain(..).map(|(n, p)| (n.to_string(), Some(ty.to_string()), p)));
            i += 2;
        } else {
            pending.push((check_name(&items[i])?, items[i].pos()));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(n, p)| (n.to_string(), default.map(str::to_string), p)));
    Ok(out)
}

fn params(items: &[Sexpr], types: &TypeTree) -> Result<Vec<TypedVar>, ParseError> {
    let mut seen = HashSet::new();
    typed_list(items, Some(ROOT_TYPE), variable)?
        .into_iter()
        .map(|(name, ty, pos)| {
            let ty = ty.unwrap_or_else(|| ROOT_TYPE.to_string());
            if !types.contains(&ty) {
                return Err(ParseError::UndeclaredType { pos, name: ty });
            }
            if !seen.insert(name.clone()) {
                return Err(ParseError::Duplicate { pos, kind: "parameter", name });
            }
            Ok(TypedVar { name, ty })
        })
        .collect()
}

fn term(e: &Sexpr) -> Result<Term, ParseError> {
    let s = atom(e, "a term")?;
    if s.starts_with('?') {
        variable(e).map(|v| Term::Var(v.to_string()))
    } else {
        ident(e, "an object name").map(|o| Term::Object(o.to_string()))
    }
}

fn application(e: &Sexpr) -> Result<Application, ParseError> {
    let items = list(e, "an atom")?;
    let (head, args) = items.split_first().ok_or_else(|| syntax(e.pos(), "empty application"))?;
    let name = ident(head, "a predicate or function name")?;
    Ok(Application { name: name.to_string(), args: args.iter().map(term).collect::<Result<_, _>>()? })
}

fn num_expr<N: Scalar>(e: &Sexpr) -> Result<NumExpr<N>, ParseError> {
    match e {
        Sexpr::Atom { text, pos } => {
            N::parse_literal(text).map(NumExpr::Const).ok_or_else(|| syntax(*pos, format!("expected a number, found `{text}`")))
        }
        Sexpr::List { items, pos } => {
            let op = match items.first().and_then(Sexpr::as_atom) {
                Some("+") => Some(ArithOp::Add),
                Some("-") => Some(ArithOp::Sub),
                Some("*") => Some(ArithOp::Mul),
                Some("/") => Some(ArithOp::Div),
                _ => None,
            };
            match op {
                Some(op) if items.len() == 3 => {
                    Ok(NumExpr::Bin(op, Box::new(num_expr(&items[1])?), Box::new(num_expr(&items[2])?)))
                }
                Some(_) => Err(syntax(*pos, "arithmetic operators take exactly two operands")),
                None => application(e).map(NumExpr::App),
            }
        }
    }
}

fn conjunct<N: Scalar>(e: &Sexpr) -> Result<Conjunct<N>, ParseError> {
    let items = list(e, "a condition")?;
    match e.head() {
        Some("not") => {
            let inner = items.get(1).filter(|_| items.len() == 2).ok_or_else(|| syntax(e.pos(), "`not` takes one atom"))?;
            if matches!(inner.head(), Some("not" | "and" | "or")) || inner.head().and_then(CmpOp::from_symbol).is_some() {
                return Err(syntax(inner.pos(), "only atoms may be negated"));
            }
            Ok(Conjunct::negative(application(inner)?))
        }
        Some(op) if CmpOp::from_symbol(op).is_some() => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), format!("`{op}` takes two operands")));
            }
            if items[1..].iter().any(|x| x.as_atom().is_some_and(|s| N::parse_literal(s).is_none())) {
                return Err(syntax(e.pos(), "object equality is not supported; comparisons are numeric"));
            }
            Ok(Conjunct::Compare {
                op: CmpOp::from_symbol(op).expect("checked"),
                lhs: num_expr(&items[1])?,
                rhs: num_expr(&items[2])?,
            })
        }
        Some(kw @ ("or" | "forall" | "exists" | "imply" | "when")) => {
            Err(syntax(e.pos(), format!("`{kw}` is outside the supported PDDL subset")))
        }
        _ => Ok(Conjunct::positive(application(e)?)),
    }
}

fn condition<N: Scalar>(e: &Sexpr) -> Result<Condition<N>, ParseError> {
    let mut out = Vec::new();
    collect_conjuncts(e, &mut out)?;
    Ok(Condition::new(out))
}

fn collect_conjuncts<N: Scalar>(e: &Sexpr, out: &mut Vec<Conjunct<N>>) -> Result<(), ParseError> {
    match e.as_list() {
        Some([]) => Ok(()),
        Some(items) if e.head() == Some("and") => items[1..].iter().try_for_each(|c| collect_conjuncts(c, out)),
        _ => {
            out.push(conjunct(e)?);
            Ok(())
        }
    }
}

struct Effects<N> {
    add: Vec<Application>,
    del: Vec<Application>,
    numeric: Vec<NumericEffect<N>>,
}

fn effects<N: Scalar>(e: &Sexpr, out: &mut Effects<N>) -> Result<(), ParseError> {
    let items = list(e, "an effect")?;
    let op = match e.head() {
        Some("assign") => Some(AssignOp::Assign),
        Some("increase") => Some(AssignOp::Increase),
        Some("decrease") => Some(AssignOp::Decrease),
        _ => None,
    };
    match (e.head(), op) {
        (None, _) if items.is_empty() => Ok(()),
        (Some("and"), _) => items[1..].iter().try_for_each(|x| effects(x, out)),
        (Some("not"), _) => {
            let inner = items.get(1).filter(|_| items.len() == 2).ok_or_else(|| syntax(e.pos(), "`not` takes one atom"))?;
            out.del.push(application(inner)?);
            Ok(())
        }
        (_, Some(op)) => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), format!("`{}` takes a function and a value", op.keyword())));
            }
            out.numeric.push(NumericEffect { op, target: application(&items[1])?, value: num_expr(&items[2])? });
            Ok(())
        }
        (Some(kw @ ("forall" | "when")), _) => Err(syntax(e.pos(), format!("`{kw}` effects are not supported"))),
        _ => {
            out.add.push(application(e)?);
            Ok(())
        }
    }
}

fn expect_header<'a>(e: &'a Sexpr, keyword: &str) -> Result<&'a str, ParseError> {
    let items = list(e, keyword)?;
    match items {
        [k, name] if k.as_atom() == Some(keyword) => ident(name, "a name"),
        _ => Err(syntax(e.pos(), format!("expected `({keyword} <name>)`"))),
    }
}

fn split_define(root: &Sexpr) -> Result<&[Sexpr], ParseError> {
    let items = list(root, "the top-level form")?;
    if root.head() != Some("define") || items.len() < 2 {
        return Err(syntax(root.pos(), "expected `(define ...)`"));
    }
    Ok(&items[1..])
}

fn section<'a>(e: &'a Sexpr) -> Result<(&'a str, &'a [Sexpr]), ParseError> {
    let items = list(e, "a section")?;
    let head = items.first().and_then(Sexpr::as_atom).filter(|h| h.starts_with(':'));
    match head {
        Some(h) => Ok((h, &items[1..])),
        None => Err(syntax(e.pos(), format!("expected a `(:section ...)`, found `{e}`"))),
    }
}

fn type_error(pos: Pos, errors: Vec<TypeCheckError>) -> ParseError {
    let error = errors.into_iter().next().expect("non-empty error list");
    ParseError::Type { pos, error }
}

pub fn parse_domain<N: Scalar>(text: &str) -> Result<Domain<N>, ParseError> {
    let root = sexpr::parse_one(text)?;
    let body = split_define(&root)?;
    let name = expect_header(&body[0], "domain")?.to_string();

    let mut requirements = Vec::new();
    let mut type_decls = Vec::new();
    let mut raw_preds = Vec::new();
    let mut raw_fns = Vec::new();
    let mut raw_actions = Vec::new();
    for sec in &body[1..] {
        let (head, rest) = section(sec)?;
        match head {
            ":requirements" => {
                for flag in rest {
                    let f = atom(flag, "a requirement flag")?;
                    let req = Requirement::from_flag(f)
                        .ok_or_else(|| ParseError::UnknownRequirement { pos: flag.pos(), flag: f.to_string() })?;
                    requirements.push(req);
                }
            }
            ":types" => {
                for (t, parent, pos) in typed_list(rest, None, |e| ident(e, "a type name"))? {
                    type_decls.push((t, parent, pos));
                }
            }
            ":predicates" => raw_preds.extend(rest.iter()),
            ":functions" => raw_fns.extend(rest.iter()),
            ":action" => raw_actions.push(sec),
            other => return Err(syntax(sec.pos(), format!("unsupported domain section `{other}`"))),
        }
    }

    let mut seen_types = HashSet::new();
    for (t, _, pos) in &type_decls {
        if !seen_types.insert(t.clone()) {
            return Err(ParseError::Duplicate { pos: *pos, kind: "type", name: t.clone() });
        }
    }
    let declared: HashSet<&str> = type_decls.iter().map(|(t, _, _)| t.as_str()).chain([ROOT_TYPE]).collect();
    for (_, parent, pos) in &type_decls {
        if let Some(p) = parent {
            if !declared.contains(p.as_str()) {
                return Err(ParseError::UndeclaredType { pos: *pos, name: p.clone() });
            }
        }
    }
    let first_pos = type_decls.first().map(|d| d.2).unwrap_or_default();
    let types = TypeTree::from_decls(type_decls.into_iter().map(|(t, p, _)| (t, p)))
        .map_err(|e| ParseError::Hierarchy(e, first_pos))?;

    let mut symbols = HashSet::new();
    let mut predicates = Vec::new();
    for p in raw_preds {
        let items = list(p, "a predicate signature")?;
        let (head, rest) = items.split_first().ok_or_else(|| syntax(p.pos(), "empty predicate signature"))?;
        let pname = ident(head, "a predicate name")?.to_string();
        if !symbols.insert(pname.clone()) {
            return Err(ParseError::Duplicate { pos: p.pos(), kind: "predicate", name: pname });
        }
        predicates.push(PredicateSignature { name: pname, params: params(rest, &types)? });
    }
    let mut functions = Vec::new();
    let mut i = 0;
    while i < raw_fns.len() {
        let f = raw_fns[i];
        if f.as_atom() == Some("-") {
            // `- number` after a signature
            match raw_fns.get(i + 1).and_then(|x| x.as_atom()) {
                Some("number") if i > 0 => {
                    i += 2;
                    continue;
                }
                _ => return Err(syntax(f.pos(), "functions may only be typed `- number`")),
            }
        }
        let items = list(f, "a function signature")?;
        let (head, rest) = items.split_first().ok_or_else(|| syntax(f.pos(), "empty function signature"))?;
        let fname = ident(head, "a function name")?.to_string();
        if !symbols.insert(fname.clone()) {
            return Err(ParseError::Duplicate { pos: f.pos(), kind: "function", name: fname });
        }
        functions.push(FunctionSignature { name: fname, params: params(rest, &types)? });
        i += 1;
    }

    let mut domain = Domain { name, requirements, types, predicates, functions, actions: Vec::new() };
    for a in raw_actions {
        let action = parse_action::<N>(a, &domain.types)?;
        if domain.action(&action.name).is_some() {
            return Err(ParseError::Duplicate { pos: a.pos(), kind: "action", name: action.name });
        }
        typecheck_action(&domain, &action).map_err(|e| type_error(a.pos(), e))?;
        domain.actions.push(action);
    }
    Ok(domain)
}

fn parse_action<N: Scalar>(e: &Sexpr, types: &TypeTree) -> Result<ActionSchema<N>, ParseError> {
    let items = list(e, "an action")?;
    let name = ident(items.get(1).ok_or_else(|| syntax(e.pos(), "action without a name"))?, "an action name")?;
    let mut action = ActionSchema {
        name: name.to_string(),
        params: Vec::new(),
        precondition: Condition::default(),
        add: Vec::new(),
        del: Vec::new(),
        numeric: Vec::new(),
    };
    let mut rest = &items[2..];
    while let [key, value, tail @ ..] = rest {
        match key.as_atom() {
            Some(":parameters") => action.params = params(list(value, "parameters")?, types)?,
            Some(":precondition") => action.precondition = condition(value)?,
            Some(":effect") => {
                let mut eff = Effects { add: Vec::new(), del: Vec::new(), numeric: Vec::new() };
                effects(value, &mut eff)?;
                action.add = eff.add;
                action.del = eff.del;
                action.numeric = eff.numeric;
            }
            _ => return Err(syntax(key.pos(), format!("unexpected `{key}` in action `{name}`"))),
        }
        rest = tail;
    }
    if let Some(extra) = rest.first() {
        return Err(syntax(extra.pos(), format!("dangling `{extra}` in action `{name}`")));
    }
    Ok(action)
}

pub fn parse_problem<N: Scalar>(text: &str, domain: &Domain<N>) -> Result<Problem<N>, ParseError> {
    let root = sexpr::parse_one(text)?;
    let body = split_define(&root)?;
    let name = expect_header(&body[0], "problem")?.to_string();
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut raw_init: &[Sexpr] = &[];
    let mut raw_goal = None;
    for sec in &body[1..] {
        let (head, rest) = section(sec)?;
        match head {
            ":domain" => match rest {
                [d] => domain_name = Some((ident(d, "a domain name")?.to_string(), d.pos())),
                _ => return Err(syntax(sec.pos(), "expected `(:domain <name>)`")),
            },
            ":objects" => {
                for (o, ty, pos) in typed_list(rest, Some(ROOT_TYPE), |e| ident(e, "an object name"))? {
                    let ty = ty.expect("defaulted");
                    if !domain.types.contains(&ty) {
                        return Err(ParseError::UndeclaredType { pos, name: ty });
                    }
                    if objects.iter().any(|(n, _)| *n == o) {
                        return Err(ParseError::Duplicate { pos, kind: "object", name: o });
                    }
                    objects.push((o, ty));
                }
            }
            ":init" => raw_init = rest,
            ":goal" => match rest {
                [g] => raw_goal = Some(g),
                _ => return Err(syntax(sec.pos(), "expected a single goal condition")),
            },
            other => return Err(syntax(sec.pos(), format!("unsupported problem section `{other}`"))),
        }
    }
    let (domain_name, dpos) = domain_name.ok_or_else(|| syntax(root.pos(), "missing `(:domain ...)`"))?;
    if domain_name != domain.name {
        return Err(syntax(dpos, format!("problem is for domain `{domain_name}`, not `{}`", domain.name)));
    }

    let scope = Scope::from_objects(&objects);
    let mut init_atoms = BTreeSet::new();
    let mut init_fluents = BTreeMap::new();
    for fact in raw_init {
        if fact.head() == Some("=") {
            let items = list(fact, "a fluent assignment")?;
            let [_, target, value] = items else {
                return Err(syntax(fact.pos(), "expected `(= (f args) value)`"));
            };
            let app = application(target)?;
            let value = match value.as_atom().and_then(N::parse_literal) {
                Some(v) => v,
                None => return Err(syntax(value.pos(), format!("expected a number, found `{value}`"))),
            };
            let cmp = Conjunct::Compare { op: CmpOp::Eq, lhs: NumExpr::App(app.clone()), rhs: NumExpr::Const(value.clone()) };
            let errs = typecheck_conjunct(domain, &scope, &cmp);
            if !errs.is_empty() {
                return Err(type_error(fact.pos(), errs));
            }
            let key = ground_of(&app);
            if init_fluents.insert(key.clone(), value).is_some() {
                return Err(ParseError::Duplicate { pos: fact.pos(), kind: "fluent value", name: key.to_string() });
            }
        } else {
            let app = application(fact)?;
            let errs = typecheck_conjunct::<N>(domain, &scope, &Conjunct::positive(app.clone()));
            if !errs.is_empty() {
                return Err(type_error(fact.pos(), errs));
            }
            init_atoms.insert(ground_of(&app));
        }
    }
    let goal = match raw_goal {
        Some(g) => {
            let goal = condition(g)?;
            typecheck_condition(domain, &scope, &goal).map_err(|e| type_error(g.pos(), e))?;
            goal
        }
        None => Condition::default(),
    };
    Ok(Problem { name, domain_name, objects, init_atoms, init_fluents, goal })
}

fn ground_of(app: &Application) -> Ground {
    Ground { name: app.name.clone(), args: app.args.iter().map(|t| t.as_str().to_string()).collect() }
}

/// Why an LLM-proposed precondition could not be used.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("reply is outside the precondition grammar: {0}")]
    Grammar(String),
    #[error("precondition does not typecheck: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Type(Vec<TypeCheckError>),
}

/// Parses one precondition in the reply grammar without consulting a domain:
/// `(pred args…)`, `(not (pred args…))` or `(cmp operand operand)` where an
/// operand is `(function args…)` or a number.
pub fn parse_conjunct_syntax<N: Scalar>(text: &str) -> Result<Conjunct<N>, ConditionError> {
    let grammar = |e: ParseError| ConditionError::Grammar(e.to_string());
    let e = sexpr::parse_one(text.trim()).map_err(|e| grammar(e.into()))?;
    let items = e.as_list().ok_or_else(|| ConditionError::Grammar(format!("`{e}` is not a parenthesised expression")))?;
    match e.head() {
        Some("and" | "or" | "forall" | "exists" | "imply" | "when") => {
            Err(ConditionError::Grammar(format!("`{}` is not allowed in a single precondition", e.head().unwrap_or(""))))
        }
        Some(op) if CmpOp::from_symbol(op).is_some() => {
            if items.len() != 3 {
                return Err(ConditionError::Grammar(format!("`{op}` takes exactly two operands")));
            }
            let operand = |x: &Sexpr| -> Result<NumExpr<N>, ConditionError> {
                match x {
                    Sexpr::Atom { text, .. } => N::parse_literal(text)
                        .map(NumExpr::Const)
                        .ok_or_else(|| ConditionError::Grammar(format!("`{text}` is not a function or number"))),
                    Sexpr::List { .. } => application(x).map(NumExpr::App).map_err(grammar),
                }
            };
            Ok(Conjunct::Compare { op: CmpOp::from_symbol(op).expect("checked"), lhs: operand(&items[1])?, rhs: operand(&items[2])? })
        }
        _ => conjunct(&e).map_err(grammar),
    }
}

/// Parses a reply expression and typechecks it against `params`.
pub fn parse_condition_sexpr<N: Scalar>(
    text: &str,
    domain: &Domain<N>,
    params: &[TypedVar],
) -> Result<Condition<N>, ConditionError> {
    let c = parse_conjunct_syntax(text)?;
    let errs = typecheck_conjunct(domain, &Scope::from_params(params), &c);
    if errs.is_empty() {
        Ok(Condition::new(vec![c]))
    } else {
        Err(ConditionError::Type(errs))
    }
}
