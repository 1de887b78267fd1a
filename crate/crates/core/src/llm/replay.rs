use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatExchange, ChatRequest, ChatResponse, LlmBackend, LlmError};

pub const TRANSCRIPT_VERSION: u32 = 1;

/// First line of a transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub transcript_version: u32,
    pub scenario: String,
    pub backend: String,
}

/// JSON lines: a header, then one exchange per line.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub exchanges: Vec<ChatExchange>,
}

impl Transcript {
    pub fn new(scenario: impl Into<String>, backend: impl Into<String>, exchanges: Vec<ChatExchange>) -> Self {
        let header =
            TranscriptHeader { transcript_version: TRANSCRIPT_VERSION, scenario: scenario.into(), backend: backend.into() };
        Transcript { header, exchanges }
    }

    /// Exchanges without a stored hash get one computed from their request;
    /// a stored hash that disagrees with the request is rejected.
    pub fn parse(text: &str) -> Result<Transcript, LlmError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| LlmError::Config("empty transcript".to_string()))?;
        let header: TranscriptHeader =
            serde_json::from_str(first).map_err(|e| LlmError::Config(format!("transcript header: {e}")))?;
        if header.transcript_version != TRANSCRIPT_VERSION {
            return Err(LlmError::Config(format!("unsupported transcript version {}", header.transcript_version)));
        }
        let mut exchanges = Vec::new();
        for (n, line) in lines {
            let mut ex: ChatExchange =
                serde_json::from_str(line).map_err(|e| LlmError::Config(format!("transcript line {}: {e}", n + 1)))?;
            let hash = ex.request.prompt_hash();
            if ex.prompt_hash.is_empty() {
                ex.prompt_hash = hash;
            } else if ex.prompt_hash != hash {
                return Err(LlmError::Config(format!("transcript line {}: stored prompt hash does not match request", n + 1)));
            }
            if ex.role != ex.request.role {
                return Err(LlmError::Config(format!("transcript line {}: role disagrees with request", n + 1)));
            }
            exchanges.push(ex);
        }
        Ok(Transcript { header, exchanges })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Transcript, LlmError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LlmError::Io(format!("{}: {e}", path.display())))?;
        Transcript::parse(&text)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for ex in &self.exchanges {
            out.push_str(&serde_json::to_string(ex).expect("exchange serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LlmError> {
        let path = path.as_ref();
        fs::write(path, self.to_jsonl()).map_err(|e| LlmError::Io(format!("{}: {e}", path.display())))
    }
}

/// Answers requests from a transcript, strictly in order.
#[derive(Debug)]
pub struct ReplayBackend {
    transcript: Transcript,
    cursor: Mutex<usize>,
}

impl ReplayBackend {
    pub fn new(transcript: Transcript) -> Self {
        ReplayBackend { transcript, cursor: Mutex::new(0) }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        Ok(ReplayBackend::new(Transcript::load(path)?))
    }

    /// Exchanges consumed so far.
    pub fn position(&self) -> usize {
        *self.cursor.lock().expect("cursor lock")
    }

    pub fn remaining(&self) -> usize {
        self.transcript.exchanges.len() - self.position()
    }

    pub fn rewind(&self) {
        *self.cursor.lock().expect("cursor lock") = 0;
    }
}

impl LlmBackend for ReplayBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let mut cursor = self.cursor.lock().expect("cursor lock");
        let index = *cursor;
        let Some(ex) = self.transcript.exchanges.get(index) else {
            return Err(LlmError::ReplayExhausted { role: request.role, index });
        };
        let actual_hash = request.prompt_hash();
        if ex.role != request.role || ex.prompt_hash != actual_hash {
            return Err(LlmError::ReplayMismatch {
                index,
                expected_role: ex.role,
                expected_hash: ex.prompt_hash.clone(),
                actual_role: request.role,
                actual_hash,
            });
        }
        *cursor += 1;
        Ok(ChatResponse { text: ex.response.clone(), usage: ex.usage })
    }

    fn id(&self) -> String {
        format!("replay:{}", self.transcript.header.scenario)
    }
}

/// Passes requests to an inner backend and keeps a copy of every exchange.
pub struct Recorder<B> {
    inner: B,
    log: Mutex<Vec<ChatExchange>>,
}

impl<B: LlmBackend> Recorder<B> {
    pub fn new(inner: B) -> Self {
        Recorder { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn transcript(&self, scenario: &str) -> Transcript {
        Transcript::new(scenario, self.inner.id(), self.log.lock().expect("log lock").clone())
    }
}

impl<B: LlmBackend> LlmBackend for Recorder<B> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let resp = self.inner.complete(request)?;
        self.log.lock().expect("log lock").push(ChatExchange::new(request.clone(), resp.clone()));
        Ok(resp)
    }

    fn id(&self) -> String {
        self.inner.id()
    }
}
