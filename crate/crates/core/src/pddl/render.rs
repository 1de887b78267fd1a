use std::fmt::Write;

use super::{ActionSchema, Application, Condition, Conjunct, Domain, NumExpr, Problem, TypedVar};
use crate::numeric::Scalar;

fn application(app: &Application) -> String {
    let mut s = format!("({}", app.name);
    for a in &app.args {
        s.push(' ');
        s.push_str(a.as_str());
    }
    s.push(')');
    s
}

fn expr<N: Scalar>(e: &NumExpr<N>) -> String {
    match e {
        NumExpr::Const(n) => n.to_literal(),
        NumExpr::App(a) => application(a),
        NumExpr::Bin(op, l, r) => format!("({} {} {})", op.symbol(), expr(l), expr(r)),
    }
}

pub(super) fn conjunct<N: Scalar>(c: &Conjunct<N>) -> String {
    match c {
        Conjunct::Literal { atom, positive: true } => application(atom),
        Conjunct::Literal { atom, positive: false } => format!("(not {})", application(atom)),
        Conjunct::Compare { op, lhs, rhs } => format!("({} {} {})", op.symbol(), expr(lhs), expr(rhs)),
    }
}

fn condition<N: Scalar>(c: &Condition<N>) -> String {
    match &c.conjuncts[..] {
        [] => "()".to_string(),
        [one] => conjunct(one),
        many => format!("(and {})", many.iter().map(conjunct).collect::<Vec<_>>().join(" ")),
    }
}

fn typed_params(params: &[TypedVar]) -> String {
    params.iter().map(|p| format!("{} - {}", p.name, p.ty)).collect::<Vec<_>>().join(" ")
}

/// `(name ?a - t ?b - u)`, every parameter typed.
pub fn render_signature(name: &str, params: &[TypedVar]) -> String {
    if params.is_empty() {
        format!("({name})")
    } else {
        format!("({name} {})", typed_params(params))
    }
}

/// `(name obj1 obj2)`
pub fn render_ground_action(name: &str, args: &[String]) -> String {
    let mut s = format!("({name}");
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

fn action<N: Scalar>(a: &ActionSchema<N>) -> String {
    let effects: Vec<String> = a
        .add
        .iter()
        .map(application)
        .chain(a.del.iter().map(|d| format!("(not {})", application(d))))
        .chain(a.numeric.iter().map(|e| format!("({} {} {})", e.op.keyword(), application(&e.target), expr(&e.value))))
        .collect();
    let effect = match &effects[..] {
        [] => "()".to_string(),
        [one] => one.clone(),
        many => format!("(and {})", many.join(" ")),
    };
    format!(
        "  (:action {}\n    :parameters ({})\n    :precondition {}\n    :effect {})\n",
        a.name,
        typed_params(&a.params),
        condition(&a.precondition),
        effect
    )
}

pub fn render_domain<N: Scalar>(d: &Domain<N>) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let flags: Vec<_> = d.requirements.iter().map(|r| r.flag()).collect();
        let _ = writeln!(out, "  (:requirements {})", flags.join(" "));
    }
    // An untyped name only reads as a root when nothing typed follows it in
    // the same section, so split sections after each run of roots.
    let mut section: Vec<String> = Vec::new();
    let mut roots_pending = false;
    for (t, parent) in d.types.declared() {
        if parent.is_some() && roots_pending {
            let _ = writeln!(out, "  (:types {})", section.join(" "));
            section.clear();
            roots_pending = false;
        }
        match parent {
            Some(p) => section.push(format!("{t} - {p}")),
            None => {
                section.push(t.to_string());
                roots_pending = true;
            }
        }
    }
    if !section.is_empty() {
        let _ = writeln!(out, "  (:types {})", section.join(" "));
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            let _ = writeln!(out, "    {}", render_signature(&p.name, &p.params));
        }
        out.push_str("  )\n");
    }
    if !d.functions.is_empty() {
        out.push_str("  (:functions\n");
        for f in &d.functions {
            let _ = writeln!(out, "    {}", render_signature(&f.name, &f.params));
        }
        out.push_str("  )\n");
    }
    for a in &d.actions {
        out.push_str(&action(a));
    }
    out.push_str(")\n");
    out
}

pub fn render_problem<N: Scalar>(p: &Problem<N>) -> String {
    let mut out = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain_name);
    let mut objects = String::new();
    for (i, (o, t)) in p.objects.iter().enumerate() {
        objects.push_str(o);
        if p.objects.get(i + 1).is_none_or(|(_, next)| next != t) {
            let _ = write!(objects, " - {t}");
        }
        objects.push(' ');
    }
    let _ = writeln!(out, "  (:objects {})", objects.trim_end());
    out.push_str("  (:init\n");
    for a in &p.init_atoms {
        let _ = writeln!(out, "    {a}");
    }
    for (k, v) in &p.init_fluents {
        let _ = writeln!(out, "    (= {k} {})", v.to_literal());
    }
    out.push_str("  )\n");
    let _ = writeln!(out, "  (:goal {})", condition(&p.goal));
    out.push_str(")\n");
    out
}
