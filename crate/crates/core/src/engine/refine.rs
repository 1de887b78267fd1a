use super::acquire::PendingProperty;
use super::{EngineError, Episode, EventKind, SkipCause, Trigger};
use crate::llm::{
    analyze_causes, evaluate_expressibility, generate_precondition, translate_to_pddl, CauseContext, LlmError,
    TranslatorContext,
};
use crate::numeric::Scalar;
use crate::oracle::{ExecutionError, PropertyKind};
use crate::pddl::{
    parse_conjunct_syntax, typecheck_conjunct, ActionSchema, Application, Conjunct, Domain, FunctionSignature,
    PredicateSignature, Scope, Term, TypedVar,
};

/// Cause-analyzer inputs for a failure.
pub fn cause_context(task: &str, history: &[String], err: &ExecutionError) -> CauseContext {
    CauseContext {
        task: task.to_string(),
        history: history.to_vec(),
        action: err.action_text.clone(),
        observation: err.observation.clone(),
    }
}

enum Step<T> {
    Go(T),
    Skip(SkipCause, String),
}

fn parse_or_skip<T>(r: Result<T, LlmError>, cause: SkipCause) -> Result<Step<T>, EngineError> {
    match r {
        Ok(v) => Ok(Step::Go(v)),
        Err(e) if e.is_parse() => Ok(Step::Skip(cause, e.to_string())),
        Err(e) => Err(e.into()),
    }
}

macro_rules! go {
    ($self:ident, $trigger:ident, $e:expr) => {
        match $e {
            Step::Go(v) => v,
            Step::Skip(cause, detail) => {
                $self.emit($trigger, EventKind::ReasonSkipped { cause, detail });
                return Ok(None);
            }
        }
    };
}

/// A symbol the expression uses that the agent has not declared.
#[derive(Debug, Clone)]
pub(crate) enum NewSymbol {
    Predicate(PredicateSignature),
    Function(FunctionSignature),
}

impl NewSymbol {
    pub(crate) fn name(&self) -> &str {
        match self {
            NewSymbol::Predicate(p) => &p.name,
            NewSymbol::Function(f) => &f.name,
        }
    }
}

fn param_sig(schema: &ActionSchema<impl Scalar>, app: &Application) -> Result<Vec<TypedVar>, String> {
    app.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => schema.param(v).cloned().ok_or_else(|| format!("`{v}` is not a parameter of {}", schema.name)),
            Term::Object(o) => Err(format!("`{o}` is a constant, not a parameter")),
        })
        .collect()
}

/// Signatures for the undeclared symbols of `c`, typed from the action's
/// parameters. Only unary properties can be acquired from the environment.
pub(crate) fn derive_symbols<N: Scalar>(
    domain: &Domain<N>,
    schema: &ActionSchema<N>,
    c: &Conjunct<N>,
) -> Result<Vec<NewSymbol>, (SkipCause, String)> {
    let mut out: Vec<NewSymbol> = Vec::new();
    let apps: Vec<(&Application, bool)> = match c {
        Conjunct::Literal { atom, .. } => vec![(atom, true)],
        Conjunct::Compare { lhs, rhs, .. } => {
            lhs.applications().into_iter().chain(rhs.applications()).map(|a| (a, false)).collect()
        }
    };
    for (app, is_pred) in apps {
        if domain.declares(&app.name) || out.iter().any(|s| s.name() == app.name) {
            continue;
        }
        let params = param_sig(schema, app).map_err(|e| (SkipCause::Typecheck, e))?;
        if params.len() != 1 {
            return Err((
                SkipCause::UnsupportedProperty,
                format!("new symbol `{}` has arity {}; only unary properties can be acquired", app.name, params.len()),
            ));
        }
        let name = app.name.clone();
        out.push(if is_pred {
            NewSymbol::Predicate(PredicateSignature { name, params })
        } else {
            NewSymbol::Function(FunctionSignature { name, params })
        });
    }
    Ok(out)
}

pub(crate) fn declare<N: Scalar>(domain: &mut Domain<N>, s: &NewSymbol) {
    match s {
        NewSymbol::Predicate(p) => domain.predicates.push(p.clone()),
        NewSymbol::Function(f) => domain.functions.push(f.clone()),
    }
}

impl<N: Scalar> Episode<'_, N> {
    pub(crate) fn analyze(&mut self, err: &ExecutionError) -> Result<Vec<String>, EngineError> {
        let ctx = cause_context(&self.sc.world.task_description, &self.k.history, err);
        Ok(analyze_causes(&mut self.caller, &ctx)?)
    }

    /// Proposes, checks and commits one precondition for `reason`, together
    /// with any property it needs. Returns the natural-language precondition
    /// when the model changed.
    pub(crate) fn refine_prec_and_prop_set(
        &mut self,
        err: &ExecutionError,
        reason: &str,
        trigger: &Trigger,
    ) -> Result<Option<String>, EngineError> {
        let Some(schema) = self.k.domain.action(&err.action.schema).cloned() else {
            return Err(EngineError::Oracle(crate::oracle::OracleError::UnknownAction(err.action.schema.clone())));
        };
        let nl = go!(
            self,
            trigger,
            parse_or_skip(generate_precondition(&mut self.caller, &err.action_text, reason), SkipCause::PreconditionParse)?
        );
        let listed = |name: &String| !self.sc.unlisted.contains(name);
        let preds: Vec<_> = self.k.domain.predicates.iter().filter(|p| listed(&p.name)).cloned().collect();
        let funcs: Vec<_> = self.k.domain.functions.iter().filter(|f| listed(&f.name)).cloned().collect();
        let verdict = go!(
            self,
            trigger,
            parse_or_skip(evaluate_expressibility(&mut self.caller, &nl, &preds, &funcs), SkipCause::EvaluatorParse)?
        );
        let tctx = TranslatorContext {
            action: err.action_text.clone(),
            params: schema.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(),
            args: err.action.args.clone(),
            precondition: nl.clone(),
        };
        let text = go!(
            self,
            trigger,
            parse_or_skip(translate_to_pddl(&mut self.caller, &tctx, &verdict, &preds, &funcs), SkipCause::TranslatorParse)?
        );
        let conj: Conjunct<N> = go!(
            self,
            trigger,
            match parse_conjunct_syntax(&text) {
                Ok(c) => Step::Go(c),
                Err(e) => Step::Skip(SkipCause::Grammar, e.to_string()),
            }
        );

        let new_symbols = if verdict.expressible() {
            Vec::new()
        } else {
            go!(
                self,
                trigger,
                match derive_symbols(&self.k.domain, &schema, &conj) {
                    Ok(s) => Step::Go(s),
                    Err((cause, detail)) => Step::Skip(cause, detail),
                }
            )
        };
        let mut trial = self.k.domain.clone();
        for s in &new_symbols {
            declare(&mut trial, s);
        }
        let errors = typecheck_conjunct(&trial, &Scope::from_params(&schema.params), &conj);
        if !errors.is_empty() {
            let detail = format!(
                "{}: {}",
                conj.render(),
                errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            );
            self.emit(trigger, EventKind::ReasonSkipped { cause: SkipCause::Typecheck, detail });
            return Ok(None);
        }
        if self.k.has_conjunct(&schema.name, &conj) {
            let detail = format!("{} already in {}", conj.render(), schema.name);
            self.emit(trigger, EventKind::ReasonSkipped { cause: SkipCause::Duplicate, detail });
            return Ok(None);
        }

        // Properties whose values must come from the environment: newly
        // declared symbols, and declared functions the agent has no values for.
        let mut pending: Vec<PendingProperty> = Vec::new();
        for name in conj.symbols() {
            if pending.iter().any(|p| p.name == name) {
                continue;
            }
            if let Some(s) = new_symbols.iter().find(|s| s.name() == name) {
                pending.push(PendingProperty::from_new(s));
            } else if let Some(f) = trial.function(name) {
                if !self.k.problem.has_values_for(name) {
                    pending.push(PendingProperty {
                        name: name.to_string(),
                        kind: PropertyKind::Number,
                        params: f.params.clone(),
                        symbol: None,
                    });
                }
            }
        }
        let mut resolved = Vec::new();
        for p in pending {
            match self.resolve_property(&p)? {
                Ok(m) => resolved.push((p, m)),
                Err((cause, detail)) => {
                    self.emit(trigger, EventKind::ReasonSkipped { cause, detail });
                    return Ok(None);
                }
            }
        }

        let rendered = conj.render();
        self.k.domain.action_mut(&schema.name).expect("schema exists").precondition.conjuncts.push(conj);
        self.k.bump();
        self.emit(
            trigger,
            EventKind::PreconditionAdded { schema: schema.name.clone(), conjunct: rendered, nl_precondition: nl.clone() },
        );
        for (p, m) in resolved {
            self.commit_property(&p, m, trigger)?;
        }
        Ok(Some(nl))
    }
}
