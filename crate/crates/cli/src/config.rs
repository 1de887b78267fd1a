use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lasp_core::engine::Budgets;
use lasp_core::llm::{LiveBackend, LiveConfig, LlmBackend, ReplayBackend, ScriptedBackend};
use lasp_core::oracle::ObservationMode;
use serde::{Deserialize, Serialize};

/// Contents of the optional TOML config file. Command-line flags override it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub observation: Option<ObservationMode>,
    pub repetitions: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub report: Option<PathBuf>,
    pub budgets: Budgets,
    pub live: LiveConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Which backend answers the language-model roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Live,
    /// A transcript file; `None` means `<scenario>/transcript.jsonl`.
    Replay(Option<PathBuf>),
    /// A rule file; `None` means `<scenario>/scripted.json`.
    Scripted(Option<PathBuf>),
}

impl BackendSpec {
    pub fn parse(text: &str) -> Result<BackendSpec> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(PathBuf::from(a))),
            None => (text, None),
        };
        Ok(match kind {
            "live" if arg.is_none() => BackendSpec::Live,
            "replay" => BackendSpec::Replay(arg),
            "scripted" => BackendSpec::Scripted(arg),
            _ => bail!("unknown backend `{text}` (expected live, replay[:FILE] or scripted[:FILE])"),
        })
    }

    pub fn label(&self) -> String {
        match self {
            BackendSpec::Live => "live".to_string(),
            BackendSpec::Replay(None) => "replay".to_string(),
            BackendSpec::Replay(Some(p)) => format!("replay:{}", p.display()),
            BackendSpec::Scripted(None) => "scripted".to_string(),
            BackendSpec::Scripted(Some(p)) => format!("scripted:{}", p.display()),
        }
    }

    /// Builds the backend for one scenario directory.
    pub fn build(&self, scenario_dir: &Path, live: &LiveConfig) -> Result<Box<dyn LlmBackend>> {
        Ok(match self {
            BackendSpec::Live => Box::new(LiveBackend::new(live.clone())?),
            BackendSpec::Replay(p) => {
                let path = p.clone().unwrap_or_else(|| scenario_dir.join("transcript.jsonl"));
                Box::new(ReplayBackend::load(&path)?)
            }
            BackendSpec::Scripted(p) => {
                let path = p.clone().unwrap_or_else(|| scenario_dir.join("scripted.json"));
                Box::new(ScriptedBackend::load(&path)?)
            }
        })
    }
}

/// Settings shared by every subcommand after merging file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: BackendSpec,
    pub budgets: Budgets,
    pub observation: ObservationMode,
    pub live: LiveConfig,
    pub repetitions: usize,
    pub workers: usize,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        self.budgets.check().map_err(anyhow::Error::msg)
    }
}
