//! Language-model roles, their prompts and reply grammars, and the
//! backends that answer them (live HTTP, transcript replay, scripted rules).

mod live;
mod parse;
mod prompts;
mod replay;
mod roles;
mod scripted;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use live::{LiveBackend, LiveConfig, API_KEY_ENV};
pub use parse::{
    parse_matching_property, parse_paraphrase, parse_pddl_expression, parse_precondition, parse_reasons,
    parse_suitable_object, parse_verdict, Witness,
};
pub use prompts::{
    render_cause_analyzer, render_object_expander, render_open_translator, render_paraphrase, render_precondition_generator,
    render_property_evaluator, render_property_matcher, render_translator, task_phrase, CauseContext, ExpanderContext,
    TranslatorContext,
};
pub use replay::{Recorder, ReplayBackend, Transcript, TranscriptHeader, TRANSCRIPT_VERSION};
pub use roles::{
    analyze_causes, evaluate_expressibility, expand_object, generate_precondition, match_property, paraphrase_observation,
    translate_to_pddl, ExpressibilityVerdict, RoleCaller,
};
pub use scripted::{ScriptRule, ScriptedBackend, SCRIPT_VERSION};

/// The prompt families sent to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    CauseAnalyzer,
    PreconditionGenerator,
    PropertyEvaluator,
    Translator,
    ObjectExpander,
    PropertyMatcher,
    Paraphraser,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::CauseAnalyzer => "cause_analyzer",
            Role::PreconditionGenerator => "precondition_generator",
            Role::PropertyEvaluator => "property_evaluator",
            Role::Translator => "translator",
            Role::ObjectExpander => "object_expander",
            Role::PropertyMatcher => "property_matcher",
            Role::Paraphraser => "paraphraser",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".to_string(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub role: Role,
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChatRequest {
    pub fn new(role: Role, prompt: impl Into<String>) -> Self {
        ChatRequest { role, messages: vec![ChatMessage::user(prompt)], model: None, temperature: 0.0, seed: None }
    }

    /// Hash of the whitespace-normalised messages; the replay key.
    pub fn prompt_hash(&self) -> String {
        let mut h = Sha256::new();
        for m in &self.messages {
            h.update(m.role.as_bytes());
            h.update(b"\n");
            h.update(normalize(&m.content).as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn prompt_text(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n")
    }
}

/// Collapses every whitespace run to one space and trims the ends.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

/// One request/response pair, as stored in transcripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub role: Role,
    #[serde(default)]
    pub prompt_hash: String,
    pub request: ChatRequest,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

impl ChatExchange {
    pub fn new(request: ChatRequest, response: ChatResponse) -> Self {
        ChatExchange {
            role: request.role,
            prompt_hash: request.prompt_hash(),
            request,
            response: response.text,
            usage: response.usage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed completion payload: {0}")]
    Payload(String),
    #[error(
        "transcript mismatch at exchange {index}: expected {expected_role} prompt {expected_hash}, \
         got {actual_role} prompt {actual_hash}"
    )]
    ReplayMismatch { index: usize, expected_role: Role, expected_hash: String, actual_role: Role, actual_hash: String },
    #[error("transcript exhausted: no recorded reply for {role} request #{index}")]
    ReplayExhausted { role: Role, index: usize },
    #[error("no scripted reply for {role} prompt: {excerpt}")]
    ScriptMiss { role: Role, excerpt: String },
    #[error("{role} reply does not follow the format ({message}): {reply:?}")]
    Parse { role: Role, message: String, reply: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl LlmError {
    /// Reply-format failures, as opposed to backend failures.
    pub fn is_parse(&self) -> bool {
        matches!(self, LlmError::Parse { .. })
    }
}

/// Anything that can answer a chat request.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;

    /// Short identifier recorded in transcripts.
    fn id(&self) -> String;
}

impl<B: LlmBackend + ?Sized> LlmBackend for &B {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}
