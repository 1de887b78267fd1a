use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize, ChatRequest, ChatResponse, LlmBackend, LlmError, Role};

pub const SCRIPT_VERSION: u32 = 1;

/// Replies with `reply` to any `role` prompt containing every `contains`
/// fragment (compared after whitespace normalisation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub role: Role,
    #[serde(default)]
    pub contains: Vec<String>,
    pub reply: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScriptFile {
    version: u32,
    rules: Vec<ScriptRule>,
}

/// Stateless canned replies; the first matching rule wins.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    name: String,
    rules: Vec<ScriptRule>,
}

impl ScriptedBackend {
    pub fn new(name: impl Into<String>, rules: Vec<ScriptRule>) -> Self {
        ScriptedBackend { name: name.into(), rules }
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, LlmError> {
        let f: ScriptFile = serde_json::from_str(text).map_err(|e| LlmError::Config(format!("script: {e}")))?;
        if f.version != SCRIPT_VERSION {
            return Err(LlmError::Config(format!("unsupported script version {}", f.version)));
        }
        Ok(ScriptedBackend::new(name, f.rules))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LlmError::Io(format!("{}: {e}", path.display())))?;
        ScriptedBackend::parse(path.display().to_string(), &text)
    }

    pub fn rules(&self) -> &[ScriptRule] {
        &self.rules
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let prompt = normalize(&request.prompt_text());
        self.rules
            .iter()
            .find(|r| r.role == request.role && r.contains.iter().all(|c| prompt.contains(&normalize(c))))
            .map(|r| ChatResponse { text: r.reply.clone(), usage: None })
            .ok_or_else(|| {
                let tail: String = prompt.chars().rev().take(160).collect::<Vec<_>>().into_iter().rev().collect();
                LlmError::ScriptMiss { role: request.role, excerpt: tail }
            })
    }

    fn id(&self) -> String {
        format!("scripted:{}", self.name)
    }
}
