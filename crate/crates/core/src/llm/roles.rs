use super::parse::{
    parse_matching_property, parse_paraphrase, parse_pddl_expression, parse_precondition, parse_reasons,
    parse_suitable_object, parse_verdict, Witness,
};
use super::prompts::{
    render_cause_analyzer, render_object_expander, render_open_translator, render_paraphrase, render_precondition_generator,
    render_property_evaluator, render_property_matcher, render_translator, CauseContext, ExpanderContext,
    TranslatorContext,
};
use super::{ChatExchange, ChatRequest, LlmBackend, LlmError, Role};
use crate::pddl::{render_signature, FunctionSignature, PredicateSignature};

/// Sends role prompts through a backend, retrying once on a malformed reply,
/// and keeps every exchange in order.
pub struct RoleCaller<'a> {
    backend: &'a dyn LlmBackend,
    pub model: Option<String>,
    pub temperature: f64,
    pub seed: Option<u64>,
    exchanges: Vec<ChatExchange>,
}

impl<'a> RoleCaller<'a> {
    pub fn new(backend: &'a dyn LlmBackend) -> Self {
        RoleCaller { backend, model: None, temperature: 0.0, seed: None, exchanges: Vec::new() }
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    pub fn exchanges(&self) -> &[ChatExchange] {
        &self.exchanges
    }

    pub fn into_exchanges(self) -> Vec<ChatExchange> {
        self.exchanges
    }

    fn send(&mut self, role: Role, prompt: String) -> Result<String, LlmError> {
        let mut req = ChatRequest::new(role, prompt);
        req.model = self.model.clone();
        req.temperature = self.temperature;
        req.seed = self.seed;
        let resp = self.backend.complete(&req)?;
        let text = resp.text.clone();
        self.exchanges.push(ChatExchange::new(req, resp));
        Ok(text)
    }

    fn ask<T>(
        &mut self,
        role: Role,
        prompt: String,
        reminder: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, LlmError> {
        let reply = self.send(role, prompt.clone())?;
        if let Ok(v) = parse(&reply) {
            return Ok(v);
        }
        log::debug!("{role}: malformed reply, retrying");
        let reply = self.send(role, format!("{prompt}\n{reminder}"))?;
        parse(&reply).map_err(|message| LlmError::Parse { role, message, reply })
    }
}

fn signatures_p(ps: &[PredicateSignature]) -> Vec<String> {
    ps.iter().map(|p| render_signature(&p.name, &p.params)).collect()
}

fn signatures_f(fs: &[FunctionSignature]) -> Vec<String> {
    fs.iter().map(|f| render_signature(&f.name, &f.params)).collect()
}

pub fn analyze_causes(c: &mut RoleCaller, ctx: &CauseContext) -> Result<Vec<String>, LlmError> {
    c.ask(
        Role::CauseAnalyzer,
        render_cause_analyzer(ctx),
        "Reminder: answer with the line \"Possible reasons:\" followed by numbered reasons.",
        parse_reasons,
    )
}

pub fn generate_precondition(c: &mut RoleCaller, action: &str, reason: &str) -> Result<String, LlmError> {
    c.ask(
        Role::PreconditionGenerator,
        render_precondition_generator(action, reason),
        "Reminder: answer with one line starting with \"Precondition:\".",
        parse_precondition,
    )
}

/// Outcome of the property evaluator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressibilityVerdict {
    pub witness: Option<Witness>,
}

impl ExpressibilityVerdict {
    pub fn expressible(&self) -> bool {
        self.witness.is_some()
    }
}

pub fn evaluate_expressibility(
    c: &mut RoleCaller,
    precondition: &str,
    predicates: &[PredicateSignature],
    functions: &[FunctionSignature],
) -> Result<ExpressibilityVerdict, LlmError> {
    let pnames: Vec<String> = predicates.iter().map(|p| p.name.clone()).collect();
    let fnames: Vec<String> = functions.iter().map(|f| f.name.clone()).collect();
    let witness = c.ask(
        Role::PropertyEvaluator,
        render_property_evaluator(precondition, &signatures_p(predicates), &signatures_f(functions)),
        "Reminder: answer \"No\", or \"Yes\" followed by a line \"Suitable predicate: ...\" or \"Suitable functions: ...\" \
         naming candidates only.",
        |r| parse_verdict(r, &pnames, &fnames),
    )?;
    Ok(ExpressibilityVerdict { witness })
}

/// Picks the translator variant from the verdict and returns the raw expression text.
pub fn translate_to_pddl(
    c: &mut RoleCaller,
    ctx: &TranslatorContext,
    verdict: &ExpressibilityVerdict,
    predicates: &[PredicateSignature],
    functions: &[FunctionSignature],
) -> Result<String, LlmError> {
    let prompt = match &verdict.witness {
        None => render_open_translator(ctx),
        Some(Witness::Predicate(name)) => {
            let sig = predicates
                .iter()
                .find(|p| &p.name == name)
                .map(|p| render_signature(&p.name, &p.params))
                .ok_or_else(|| LlmError::Config(format!("witness predicate {name} is not declared")))?;
            render_translator(ctx, Some(&sig), &[])
        }
        Some(Witness::Functions(names)) => {
            let sigs = names
                .iter()
                .map(|n| {
                    functions
                        .iter()
                        .find(|f| &f.name == n)
                        .map(|f| render_signature(&f.name, &f.params))
                        .ok_or_else(|| LlmError::Config(format!("witness function {n} is not declared")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            render_translator(ctx, None, &sigs)
        }
    };
    c.ask(
        Role::Translator,
        prompt,
        "Reminder: answer with one line starting with \"PDDL expression:\".",
        parse_pddl_expression,
    )
}

pub fn expand_object(c: &mut RoleCaller, ctx: &ExpanderContext) -> Result<String, LlmError> {
    if ctx.candidates.is_empty() {
        return Err(LlmError::Config("object expander called without candidate objects".to_string()));
    }
    c.ask(
        Role::ObjectExpander,
        render_object_expander(ctx),
        "Reminder: answer with \"Suitable object: <object>.\" using one of the candidate objects.",
        |r| parse_suitable_object(r, &ctx.candidates),
    )
}

/// `candidates` pairs a property name with its rendered signature.
pub fn match_property(
    c: &mut RoleCaller,
    new_property: &str,
    candidates: &[(String, String)],
) -> Result<Option<String>, LlmError> {
    let names: Vec<String> = candidates.iter().map(|(n, _)| n.clone()).collect();
    let sigs: Vec<String> = candidates.iter().map(|(_, s)| s.clone()).collect();
    c.ask(
        Role::PropertyMatcher,
        render_property_matcher(new_property, &sigs),
        "Reminder: answer with \"Matching property: <property>\" or \"Matching property: none\".",
        |r| parse_matching_property(r, &names),
    )
}

pub fn paraphrase_observation(c: &mut RoleCaller, observation: &str) -> Result<String, LlmError> {
    c.ask(
        Role::Paraphraser,
        render_paraphrase(observation),
        "Reminder: answer with one line starting with \"Observation:\".",
        parse_paraphrase,
    )
}
