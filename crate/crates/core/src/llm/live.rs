use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatRequest, ChatResponse, LlmBackend, LlmError, Usage};

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "LASP_API_KEY";

/// OpenAI-compatible chat-completions endpoint settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`; `/chat/completions` is appended
    /// unless already present.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub timeout_secs: u64,
    /// Extra attempts after a transient failure (timeouts, 429, 5xx).
    pub max_retries: u32,
    /// File holding the key; used when the environment variable is unset.
    pub api_key_file: Option<PathBuf>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            endpoint: "https://api.openai.com/v1".to_string(),
            model: "gpt-4".to_string(),
            temperature: 0.0,
            seed: Some(0),
            timeout_secs: 120,
            max_retries: 3,
            api_key_file: None,
        }
    }
}

impl LiveConfig {
    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }

    fn api_key(&self) -> Result<String, LlmError> {
        if let Ok(k) = std::env::var(API_KEY_ENV) {
            if !k.trim().is_empty() {
                return Ok(k.trim().to_string());
            }
        }
        if let Some(path) = &self.api_key_file {
            let k = fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
            return Ok(k.trim().to_string());
        }
        Err(LlmError::Config(format!("no API key: set {API_KEY_ENV} or api_key_file")))
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    key: String,
    agent: ureq::Agent,
}

enum Attempt {
    Done(Result<ChatResponse, LlmError>),
    Transient(LlmError),
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, LlmError> {
        let key = config.api_key()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveBackend { config, key, agent })
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let model = request.model.clone().unwrap_or_else(|| self.config.model.clone());
        let mut body = json!({
            "model": model,
            "messages": request.messages,
            "temperature": self.config.temperature,
        });
        if let Some(seed) = request.seed.or(self.config.seed) {
            body["seed"] = json!(seed);
        }
        body
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let resp = self.agent.post(self.config.url()).header("Authorization", &format!("Bearer {}", self.key)).send_json(body);
        let mut resp = match resp {
            Ok(r) => r,
            Err(e) => return Attempt::Transient(LlmError::Transport(e.to_string())),
        };
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        match status {
            200..=299 => Attempt::Done(parse_completion(&text)),
            401 | 403 => Attempt::Done(Err(LlmError::Auth { status, body: text })),
            429 | 500..=599 => Attempt::Transient(LlmError::Http { status, body: text }),
            _ => Attempt::Done(Err(LlmError::Http { status, body: text })),
        }
    }
}

fn parse_completion(text: &str) -> Result<ChatResponse, LlmError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LlmError::Payload(e.to_string()))?;
    let content = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| LlmError::Payload("no choices[0].message.content".to_string()))?;
    let usage = v.get("usage").map(|u| Usage {
        prompt_tokens: u["prompt_tokens"].as_u64().unwrap_or(0),
        completion_tokens: u["completion_tokens"].as_u64().unwrap_or(0),
    });
    Ok(ChatResponse { text: content.to_string(), usage })
}

impl LlmBackend for LiveBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let body = self.body(request);
        let mut last = None;
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(500 << (attempt - 1).min(6)));
            }
            match self.attempt(&body) {
                Attempt::Done(r) => return r,
                Attempt::Transient(e) => {
                    log::warn!("{} attempt {} failed: {e}", request.role, attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn id(&self) -> String {
        format!("live:{}", self.config.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_payload() {
        let r = parse_completion(
            r#"{"choices":[{"message":{"role":"assistant","content":"Precondition: x"}}],"usage":{"prompt_tokens":3,"completion_tokens":2}}"#,
        )
        .unwrap();
        assert_eq!(r.text, "Precondition: x");
        assert_eq!(r.usage, Some(Usage { prompt_tokens: 3, completion_tokens: 2 }));
        assert!(parse_completion(r#"{"choices":[]}"#).is_err());
    }

    #[test]
    fn url_suffix() {
        let mut c = LiveConfig { endpoint: "http://h/v1/".into(), ..LiveConfig::default() };
        assert_eq!(c.url(), "http://h/v1/chat/completions");
        c.endpoint = "http://h/v1/chat/completions".into();
        assert_eq!(c.url(), "http://h/v1/chat/completions");
    }
}
