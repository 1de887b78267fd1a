use super::normalize;

/// Inputs of the cause analyzer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseContext {
    /// Task sentence as given by the environment, e.g. "Heat the milk and place it on the table."
    pub task: String,
    /// Descriptions of the actions executed before the failure.
    pub history: Vec<String>,
    pub action: String,
    pub observation: String,
}

/// Inputs of the translator that do not depend on the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatorContext {
    pub action: String,
    /// `(variable, type)` per schema parameter.
    pub params: Vec<(String, String)>,
    /// Object bound to each parameter, same order.
    pub args: Vec<String>,
    pub precondition: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpanderContext {
    pub task: String,
    /// `None` when no action has failed yet (the planner found no plan at all).
    pub action: Option<String>,
    pub precondition: String,
    pub candidates: Vec<String>,
}

/// "Heat the milk and place it on the table." -> "heat the milk and place it on the table"
pub fn task_phrase(task: &str) -> String {
    let t = task.trim().trim_end_matches('.');
    let mut c = t.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

pub fn render_cause_analyzer(ctx: &CauseContext) -> String {
    let mut p = String::from(
        "You are expected to provide possible reasons for errors in robot actions, where errors are essentially \
         unexpected outcomes. You are given the robot task, the historical actions, the action caused the error, the \
         observation of the error. In your answer, each reason should be as brief as possible. And the answer should \
         follow this format:\nPossible reasons:\n1. reason1\n2. reason2\n ...\n",
    );
    p.push_str(&format!("The robot task is to {}.\n", task_phrase(&ctx.task)));
    if ctx.history.is_empty() {
        p.push_str("The historical actions are: none.\n");
    } else {
        p.push_str("The historical actions are:\n");
        for (i, h) in ctx.history.iter().enumerate() {
            p.push_str(&format!("{}. {h}\n", i + 1));
        }
    }
    p.push_str(&format!("The action caused the error is: {}\n", ctx.action));
    p.push_str(&format!("The observation of the error is: {}\n", ctx.observation));
    p.push_str("What are possible reasons that could lead to this error?");
    p
}

pub fn render_precondition_generator(action: &str, reason: &str) -> String {
    format!(
        "You are given a robotic action that caused an error and the reason why this error occurred. You are expected \
         to provide a precondition for an robotic action to prevent a recurrence of the same error. The precondition \
         should only require one property of the object or robot satisfy a certain condition. The answer should be as \
         brief as possible (no further explanation) and it should follow this format:\nPrecondition: ...\n\
         The action caused the error is: {action}\nThe reason why this error occurred is: {reason}\n\
         What precondition should be satisfied to prevent a recurrence of the same error?"
    )
}

/// `predicates` and `functions` are rendered PDDL signatures.
pub fn render_property_evaluator(precondition: &str, predicates: &[String], functions: &[String]) -> String {
    format!(
        "You are expected to judge whether the given natural language described precondition can be expressed by the \
         candidate predicates and functions, or their respective antonyms. You are given the natural language described \
         precondition, candidate predicates and functions. Answer should be \"Yes\" or \"No\". If you answer \"Yes\", \
         you are expected to provide a suitable predicate or two suitable functions for expressing the precondition. \
         The suitable predicate or two suitable functions must come from the given candidate predicates and functions. \
         There are two kinds of formats to provide the suitable expression: (1) If suggesting a predicate, respond \
         with: \"Suitable predicate: ...\"; (2) If suggesting two functions, respond with: \"Suitable functions: ...\".\n\
         Natural language described precondition: {precondition}\n\
         Candidate predicates: {}.\nCandidate functions: {}.\n\
         Can the precondition be expressed by the candidate predicates and functions, or their respective antonyms? If \
         yes, provide a suitable predicate or two suitable functions for expressing the precondition.",
        list(predicates),
        list(functions)
    )
}

fn action_block(ctx: &TranslatorContext) -> String {
    let params: Vec<String> = ctx.params.iter().map(|(v, t)| format!("the {t}, denoted as {v}")).collect();
    let corr: Vec<String> = ctx.params.iter().zip(&ctx.args).map(|((v, _), a)| format!("the {a} is {v}")).collect();
    format!(
        "Action description: {}\nCandidate parameters: {}.\nCorresponding between instances and parameters: {}.\n",
        ctx.action,
        params.join("; "),
        corr.join("; ")
    )
}

const PREDICATE_EXAMPLE: &str = "Action description: Put the plate in the fridge.\n\
    Candidate parameters: the robot, denoted as ?r; the object, denoted as ?obj; the receptacle, denoted as ?rec.\n\
    Corresponding between instances and parameters: the robot is ?r; the plate is ?obj; the fridge is ?rec.\n";
const PREDICATE_EXAMPLE_TAIL: &str = "Natural utterance: The fridge should be open when placing the plate in the fridge.\n\
    PDDL expression: (is-open ?rec)\n";
const FUNCTION_EXAMPLE: &str = "Action description: Pick up the box from the cabinet.\n\
    Candidate parameters: the robot, denoted as ?r; the object, denoted as ?obj; the receptacle, denoted as ?rec.\n\
    Corresponding between instances and parameters: the robot is ?r; the box is ?obj; the cabinet is ?rec.\n";
const FUNCTION_EXAMPLE_TAIL: &str = "Natural utterance: The weight of the box should not exceed the maximum weight that \
    the robot can handle.\nPDDL expression: (<= (weight ?obj) (lift-capacity ?r))\n";

/// Translator constrained to existing properties. `functions` selects the
/// comparison grammar; otherwise `predicate` selects the literal grammar.
pub fn render_translator(ctx: &TranslatorContext, predicate: Option<&str>, functions: &[String]) -> String {
    let mut p = String::new();
    match predicate {
        Some(pred) => {
            p.push_str(
                "Given the action description, the candidate parameters, the corresponding between instances and \
                 parameters, candidate predicate, and a natural utterance, you are expected to translate the natural \
                 utterance into a PDDL precondition expression for the given action.\n\
                 The expected PDDL expression should satisfy one of following grammars: (1) (<predicate> <parameter-1> \
                 <parameter-2> ...); (2) (not (<predicate> <parameter-1> <parameter-2> ...)). <parameter> must be one \
                 of the candidate parameters. <predicate> should be the given candidate predicate. The answer should \
                 follow this format (no further explanation):\nPDDL expression: ...\nHere is an example:\n",
            );
            p.push_str(PREDICATE_EXAMPLE);
            p.push_str("Candidate predicate: (is-open ?rec) \n");
            p.push_str(PREDICATE_EXAMPLE_TAIL);
            p.push_str(&action_block(ctx));
            p.push_str(&format!("Candidate predicate: {pred}.\n"));
        }
        None => {
            p.push_str(
                "Given the action description, the candidate parameters, the corresponding between instances and \
                 parameters, candidate functions, and a natural utterance, you are expected to translate the natural \
                 utterance into a PDDL precondition expression for the given action. The expected PDDL expression \
                 should satisfy the following grammar: (<comparison-operator> <function-1> <function-2>). The grammar \
                 of <function> is (<function-name> <parameter-1> <parameter-2> ...). <function-name> must come from \
                 the given candidate functions. <parameter> must be one of the candidate parameters. \
                 <comparsion-operator> should be one of the following: \"<\", \">\", \"<=\", \">=\". The answer should \
                 follow this format (no further explanation):\nPDDL expression: ...\nHere is an example:\n",
            );
            p.push_str(FUNCTION_EXAMPLE);
            p.push_str("Candidate functions: (weight ?obj), (lift-capacity ?r)\n");
            p.push_str(FUNCTION_EXAMPLE_TAIL);
            p.push_str(&action_block(ctx));
            p.push_str(&format!("Candidate functions: {}.\n", list(functions)));
        }
    }
    p.push_str(&format!("Natural utterance: {}", ctx.precondition));
    p
}

/// Translator used when the existing properties cannot express the
/// precondition: the expression may introduce a new property name.
pub fn render_open_translator(ctx: &TranslatorContext) -> String {
    let mut p = String::from(
        "Given the action description, the candidate parameters, the corresponding between instances and parameters, \
         and a natural utterance, you are expected to translate the natural utterance into a PDDL precondition \
         expression for the given action.\n\
         The expected PDDL expression should satisfy one of following grammars: (1) (<predicate> <parameter-1> \
         <parameter-2> ...); (2) (not (<predicate> <parameter-1> <parameter-2> ...)); (3) (<comparison-operator> \
         <function-1> <function-2>). The grammar of <function> is (<function-name> <parameter-1> <parameter-2> ...). \
         <parameter> must be one of the candidate parameters. <predicate> and <function-name> are new names that \
         describe the required property. <comparison-operator> should be one of the following: \"<\", \">\", \"<=\", \
         \">=\". The answer should follow this format (no further explanation):\nPDDL expression: ...\n\
         Here are two examples:\n",
    );
    p.push_str(PREDICATE_EXAMPLE);
    p.push_str(PREDICATE_EXAMPLE_TAIL);
    p.push_str(FUNCTION_EXAMPLE);
    p.push_str(FUNCTION_EXAMPLE_TAIL);
    p.push_str(&action_block(ctx));
    p.push_str(&format!("Natural utterance: {}", ctx.precondition));
    p
}

pub fn render_object_expander(ctx: &ExpanderContext) -> String {
    let action = ctx.action.as_deref().unwrap_or("none (no plan could be found for the task).");
    format!(
        "You are expected to select the most suitable object from the candidate objects to prevent a recurrence of the \
         error and assist the robot complete the task. You are given the robot task, the action caused the error, the \
         precondition that the action does not satisfy, and the candidate objects. Answer should follow this format: \
         Suitable object: <object>. <object> must be one of the candidate objects.\n\
         The robot task is to {}.\nThe action caused the error is: {action}\n\
         The precondition that the action does not satisfy is: {}\nCandidate objects: {}.\n\
         Which object is the most suitable to prevent a recurrence of the error and assist the robot complete the task?",
        task_phrase(&ctx.task),
        ctx.precondition,
        list(&ctx.candidates)
    )
}

/// Last-resort property matcher: `new_property` and `candidates` are PDDL signatures.
pub fn render_property_matcher(new_property: &str, candidates: &[String]) -> String {
    format!(
        "You are expected to find, among the candidate properties of the environment, the property that has the same \
         meaning as a new property of a robot planner. You are given the new property and the candidate properties. \
         Answer should follow this format: Matching property: <property>. <property> must be one of the candidate \
         properties, or none if no candidate has the same meaning.\n\
         New property: {new_property}\nCandidate properties: {}.\n\
         Which candidate property has the same meaning as the new property?",
        list(candidates)
    )
}

pub fn render_paraphrase(observation: &str) -> String {
    format!(
        "Describe the following robot execution error in different words. Keep every object name unchanged and use at \
         most two sentences. Answer should follow this format: Observation: ...\nDescription: {}",
        normalize(observation)
    )
}
