//! Line-oriented reply grammars. Parsers return a short message on failure;
//! the role layer wraps it with the role and the raw reply.

/// Rest of the first line containing `label` (case-insensitive), trimmed.
fn labelled<'a>(text: &'a str, label: &str) -> Option<&'a str> {
    let lower = label.to_ascii_lowercase();
    text.lines().find_map(|line| {
        let at = line.to_ascii_lowercase().find(&lower)?;
        Some(line[at + label.len()..].trim())
    })
}

fn strip_period(s: &str) -> &str {
    s.trim().trim_end_matches('.').trim()
}

/// First token of each parenthesised group, or comma-separated bare names.
fn symbol_names(text: &str) -> Vec<String> {
    let text = strip_period(text);
    if text.contains('(') {
        text.split('(')
            .skip(1)
            .filter_map(|chunk| chunk.split(|c: char| c.is_whitespace() || c == ')').find(|t| !t.is_empty()))
            .map(|t| t.to_ascii_lowercase())
            .collect()
    } else {
        text.split([',', ';']).map(|t| strip_period(t).to_ascii_lowercase()).filter(|t| !t.is_empty()).collect()
    }
}

/// `Possible reasons:` followed by `1. ...` lines.
pub fn parse_reasons(text: &str) -> Result<Vec<String>, String> {
    let mut lines = text.lines();
    lines
        .by_ref()
        .find(|l| l.to_ascii_lowercase().contains("possible reasons:"))
        .ok_or("missing \"Possible reasons:\" label")?;
    let mut reasons = Vec::new();
    for line in lines {
        let l = line.trim();
        let digits = l.chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            continue;
        }
        let rest = &l[digits..];
        let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) else { continue };
        let r = rest.trim();
        if !r.is_empty() {
            reasons.push(r.to_string());
        }
    }
    if reasons.is_empty() {
        return Err("no numbered reasons".to_string());
    }
    Ok(reasons)
}

/// `Precondition: ...`
pub fn parse_precondition(text: &str) -> Result<String, String> {
    let tail = labelled(text, "Precondition:").ok_or("missing \"Precondition:\" label")?;
    if tail.is_empty() {
        return Err("empty precondition".to_string());
    }
    Ok(tail.to_string())
}

/// Properties suggested by a "Yes" verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Predicate(String),
    Functions(Vec<String>),
}

/// `No`, or `Yes` plus a `Suitable predicate:` / `Suitable functions:` line.
/// Witness names must come from the candidate names sent in the prompt.
pub fn parse_verdict(text: &str, predicates: &[String], functions: &[String]) -> Result<Option<Witness>, String> {
    let first = text
        .split_whitespace()
        .next()
        .map(|w| w.trim_matches(|c: char| !c.is_ascii_alphabetic()).to_ascii_lowercase())
        .ok_or("empty reply")?;
    match first.as_str() {
        "no" => return Ok(None),
        "yes" => {}
        _ => return Err("reply does not start with Yes or No".to_string()),
    }
    if let Some(tail) = labelled(text, "Suitable predicate:") {
        let names = symbol_names(tail);
        let [name] = names.as_slice() else { return Err("expected exactly one suitable predicate".to_string()) };
        if !predicates.contains(name) {
            return Err(format!("suggested predicate {name} is not a candidate"));
        }
        return Ok(Some(Witness::Predicate(name.clone())));
    }
    if let Some(tail) = labelled(text, "Suitable functions:").or_else(|| labelled(text, "Suitable function:")) {
        let names = symbol_names(tail);
        if names.is_empty() || names.len() > 2 {
            return Err("expected one or two suitable functions".to_string());
        }
        if let Some(bad) = names.iter().find(|n| !functions.contains(n)) {
            return Err(format!("suggested function {bad} is not a candidate"));
        }
        return Ok(Some(Witness::Functions(names)));
    }
    Err("\"Yes\" without a suitable predicate or functions".to_string())
}

/// `PDDL expression: (...)`
pub fn parse_pddl_expression(text: &str) -> Result<String, String> {
    let tail = labelled(text, "PDDL expression:").ok_or("missing \"PDDL expression:\" label")?;
    let e = strip_period(tail).trim_matches('`').trim();
    if e.is_empty() {
        return Err("empty expression".to_string());
    }
    Ok(e.to_string())
}

/// `Suitable object: <object>.` resolved against `candidates`.
pub fn parse_suitable_object(text: &str, candidates: &[String]) -> Result<String, String> {
    let tail = labelled(text, "Suitable object:").ok_or("missing \"Suitable object:\" label")?;
    let mut name = strip_period(tail).trim_matches(|c| c == '<' || c == '>' || c == '"').to_ascii_lowercase();
    if let Some(rest) = name.strip_prefix("the ") {
        name = rest.trim().to_string();
    }
    candidates
        .iter()
        .find(|c| c.eq_ignore_ascii_case(&name))
        .cloned()
        .ok_or_else(|| format!("{name} is not a candidate object"))
}

/// `Matching property: <name>` or `none`.
pub fn parse_matching_property(text: &str, candidates: &[String]) -> Result<Option<String>, String> {
    let tail = labelled(text, "Matching property:").ok_or("missing \"Matching property:\" label")?;
    let names = symbol_names(tail);
    match names.as_slice() {
        [n] if n == "none" => Ok(None),
        [n] if candidates.contains(n) => Ok(Some(n.clone())),
        [n] => Err(format!("{n} is not a candidate property")),
        _ => Err("expected exactly one property".to_string()),
    }
}

/// `Observation: ...`, possibly spanning several lines.
pub fn parse_paraphrase(text: &str) -> Result<String, String> {
    let at = text.to_ascii_lowercase().find("observation:").ok_or("missing \"Observation:\" label")?;
    let body = super::normalize(&text[at + "observation:".len()..]);
    if body.is_empty() {
        return Err("empty observation".to_string());
    }
    Ok(body)
}
