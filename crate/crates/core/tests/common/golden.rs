//! The transcribed success and failure records: role inputs and expected prompt text.

use std::fs;
use std::path::PathBuf;

use lasp_core::llm::{
    normalize, render_cause_analyzer, render_object_expander, render_precondition_generator, render_property_evaluator,
    render_translator, CauseContext, ExpanderContext, TranslatorContext,
};

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn expected(name: &str) -> String {
    let path = root().join("golden/prompts").join(format!("{name}.txt"));
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `None` when `rendered` equals the golden prompt up to whitespace.
pub fn mismatch(name: &str, rendered: &str) -> Option<String> {
    let want = normalize(&expected(name));
    let got = normalize(rendered);
    if want == got {
        return None;
    }
    let at = want.chars().zip(got.chars()).take_while(|(a, b)| a == b).count();
    let tail = |s: &str| s.chars().skip(at.saturating_sub(40)).take(120).collect::<String>();
    Some(format!("{name} differs at char {at}\n want: ...{}\n  got: ...{}", tail(&want), tail(&got)))
}

pub fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub const HOT_ACTION: &str = "Pick up the sandwich from the microwave.";
pub const HOT_PRE: &str = "The robot's gripping mechanism must be heat-resistant and in good working order.";
pub const POUR_ACTION: &str = "Pour the milk from the bottle into the sandwich which is on the table.";
pub const CONTAINER_PRE: &str = "The target object for pouring must be a container.";

fn predicates(with_container: bool) -> Vec<String> {
    let mut p = strings(&[
        "(holding ?r - robot ?obj - object)",
        "(is-empty-handed ?r - robot)",
        "(is-open ?rec - receptacle)",
        "(in ?obj - object ?rec - receptacle)",
        "(on ?obj - object ?loc - location)",
        "(is-microwave ?rec - receptacle)",
        "(is-heat-insulation ?obj - object)",
        "(liquid-in ?liq - liquid ?obj - object)",
    ]);
    if with_container {
        p.push("(can-contain-liquid ?obj - object)".into());
    }
    p.extend(strings(&["(is-microwave-safe ?obj - object)", "(can-support ?loc - location)"]));
    p
}

fn functions() -> Vec<String> {
    strings(&["(temperature ?obj - object)", "(tolerance-temperature ?r - robot)", "(liquid-temperature ?liq - liquid)"])
}

/// Every golden prompt name with the prompt rendered from the record's inputs.
pub fn rendered() -> Vec<(&'static str, String)> {
    let hot_analyzer = CauseContext {
        task: "Heat the sandwich and place it on a plate.".into(),
        history: strings(&[
            "Open the fridge.",
            "Open the microwave.",
            "Pick up the sandwich from the fridge.",
            "Put the sandwich in the microwave.",
            "Close the microwave.",
            "Use the microwave to heat the sandwich.",
            "Open the microwave.",
        ]),
        action: HOT_ACTION.into(),
        observation: "The agent's sensors detected excessive heat and immediately released the sandwich.".into(),
    };
    let hot_translator = TranslatorContext {
        action: HOT_ACTION.into(),
        params: vec![("?r".into(), "robot".into()), ("?obj".into(), "object".into()), ("?rec".into(), "receptacle".into())],
        args: strings(&["agent", "sandwich", "microwave"]),
        precondition: HOT_PRE.into(),
    };
    let hot_expander = ExpanderContext {
        task: "Heat the sandwich and place it on a plate.".into(),
        action: Some(HOT_ACTION.into()),
        precondition: HOT_PRE.into(),
        candidates: strings(&["cup", "glove", "knife"]),
    };
    let pour_analyzer = CauseContext {
        task: "Heat the milk and place it on the table.".into(),
        history: strings(&[
            "Open the fridge.",
            "Pick up the sandwich from the fridge.",
            "Put the sandwich on the table.",
            "Pick up the bottle from the fridge.",
        ]),
        action: POUR_ACTION.into(),
        observation: "The milk permeated the sandwich, soaking it, and some overflowed onto the table.".into(),
    };
    let pour_translator = TranslatorContext {
        action: POUR_ACTION.into(),
        params: vec![
            ("?r".into(), "robot".into()),
            ("?liq".into(), "liquid".into()),
            ("?obj1".into(), "object".into()),
            ("?obj2".into(), "object".into()),
            ("?loc".into(), "location".into()),
        ],
        args: strings(&["agent", "milk", "bottle", "sandwich", "table"]),
        precondition: CONTAINER_PRE.into(),
    };
    let hot_reason = "The robot's gripping mechanism may be faulty or not designed to withstand high temperatures.";
    let hot_funcs = strings(&["(temperature ?obj - object)", "(tolerance-temperature ?r - robot)"]);
    vec![
        ("success_cause_analyzer", render_cause_analyzer(&hot_analyzer)),
        ("success_precondition_generator", render_precondition_generator(HOT_ACTION, hot_reason)),
        ("success_property_evaluator", render_property_evaluator(HOT_PRE, &predicates(true), &functions())),
        ("success_translator", render_translator(&hot_translator, None, &hot_funcs)),
        ("success_object_expander", render_object_expander(&hot_expander)),
        ("failed_cause_analyzer", render_cause_analyzer(&pour_analyzer)),
        (
            "failed_precondition_generator",
            render_precondition_generator(POUR_ACTION, "Programming error in the sequence of actions."),
        ),
        ("failed_property_evaluator", render_property_evaluator(CONTAINER_PRE, &predicates(false), &functions())),
        ("failed_translator", render_translator(&pour_translator, Some("(is-open ?rec - receptacle)"), &[])),
    ]
}
