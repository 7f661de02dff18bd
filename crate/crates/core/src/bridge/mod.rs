//! Adapters that send tagged sentences to an external simplifier and collect
//! its outputs in input order.
//!
//! A simplifier is configured with a flat JSON object:
//!
//! ```json
//! { "mode": "subprocess", "command": ["python3", "serve.py"], "batch_size": 64 }
//! { "mode": "http", "endpoint": "https://api.example.com/v1/chat/completions",
//!   "model": "gpt-4", "api_key_env": "OPENAI_API_KEY", "timeout_s": 60, "retries": 3 }
//! { "mode": "builtin", "builtin": "truncate_to_lr" }
//! ```
//!
//! ```
//! use simpkit::bridge::{SimplifierConfig, Simplifier};
//!
//! let cfg: SimplifierConfig = serde_json::from_str(r#"{"mode": "builtin", "builtin": "identity"}"#)?;
//! let simplifier = cfg.build()?;
//! let out = simplifier.simplify_batch(&[
//!     "<DEPENDENCYTREEDEPTH_1.00> <WORDRANK_1.00> <REPLACEONLYLEVENSHTEIN_1.00> <LENGTHRATIO_1.00> hello world".to_string(),
//! ])?;
//! assert_eq!(out, ["hello world"]);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod http;
pub mod mocks;
pub mod subprocess;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use http::HttpSimplifier;
pub use mocks::{builtin_mocks, BuiltinMock};
pub use subprocess::SubprocessSimplifier;

/// Anything that turns a batch of inputs into the same number of outputs.
pub trait Simplifier: Send + Sync {
    fn simplify_batch(&self, inputs: &[String]) -> Result<Vec<String>>;
}

impl<T: Simplifier + ?Sized> Simplifier for Box<T> {
    fn simplify_batch(&self, inputs: &[String]) -> Result<Vec<String>> {
        (**self).simplify_batch(inputs)
    }
}

pub const INPUT_PLACEHOLDER: &str = "{{input}}";

const DEFAULT_PROMPT: &str = include_str!("../../assets/default_prompt.txt");

/// Prompt text with exactly one `{{input}}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let n = text.matches(INPUT_PLACEHOLDER).count();
        if n != 1 {
            return Err(Error::config(format!(
                "prompt template must contain {INPUT_PLACEHOLDER} exactly once, found {n}"
            )));
        }
        Ok(PromptTemplate { text })
    }

    pub fn render(&self, input: &str) -> String {
        self.text.replacen(INPUT_PLACEHOLDER, input, 1)
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl Default for PromptTemplate {
    /// The few-shot simplification prompt used for chat models.
    fn default() -> Self {
        PromptTemplate::new(DEFAULT_PROMPT).expect("bundled prompt has one placeholder")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommandLine {
    Program(String),
    Argv(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Subprocess,
    Http,
    Builtin,
}

/// Serialized simplifier settings, as found in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplifierConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_template: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitutions: Option<BTreeMap<String, String>>,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_timeout() -> f64 {
    600.0
}
fn default_retries() -> u32 {
    3
}
fn default_batch() -> usize {
    32
}
fn default_backoff() -> u64 {
    500
}

impl SimplifierConfig {
    pub fn builtin(name: &str) -> Self {
        SimplifierConfig {
            mode: Mode::Builtin,
            command: None,
            args: Vec::new(),
            endpoint: None,
            model: None,
            prompt_template: None,
            timeout_s: default_timeout(),
            retries: default_retries(),
            batch_size: default_batch(),
            api_key_env: None,
            params: None,
            builtin: Some(name.to_string()),
            substitutions: None,
            backoff_ms: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(Error::config(format!("timeout_s must be positive, got {}", self.timeout_s)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        Ok(())
    }

    /// Validates the settings and constructs the simplifier they describe.
    /// For HTTP mode the API key is read from `api_key_env` here.
    pub fn build(&self) -> Result<Box<dyn Simplifier>> {
        self.validate()?;
        let timeout = Duration::from_secs_f64(self.timeout_s);
        match self.mode {
            Mode::Subprocess => {
                let mut argv = match &self.command {
                    Some(CommandLine::Program(p)) => vec![p.clone()],
                    Some(CommandLine::Argv(v)) if !v.is_empty() => v.clone(),
                    _ => return Err(Error::config("subprocess mode needs a command")),
                };
                argv.extend(self.args.iter().cloned());
                let program = argv.remove(0);
                Ok(Box::new(SubprocessSimplifier {
                    program,
                    args: argv,
                    timeout,
                    batch_size: self.batch_size,
                }))
            }
            Mode::Http => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| Error::config("http mode needs an endpoint"))?;
                let model = self
                    .model
                    .clone()
                    .ok_or_else(|| Error::config("http mode needs a model"))?;
                let template = match &self.prompt_template {
                    Some(path) => PromptTemplate::new(
                        fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
                    )?,
                    None => PromptTemplate::default(),
                };
                let api_key = match &self.api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        Error::config(format!("environment variable {var} is not set"))
                    })?),
                    None => None,
                };
                Ok(Box::new(HttpSimplifier {
                    endpoint,
                    model,
                    template,
                    timeout,
                    retries: self.retries,
                    batch_size: self.batch_size,
                    api_key,
                    params: self.params.clone(),
                    backoff: Duration::from_millis(self.backoff_ms),
                }))
            }
            Mode::Builtin => {
                let name = self
                    .builtin
                    .as_deref()
                    .ok_or_else(|| Error::config("builtin mode needs a builtin name"))?;
                let mut mock = BuiltinMock::by_name(name)?;
                if let (BuiltinMock::LexicalSub(dict), Some(subs)) = (&mut mock, &self.substitutions) {
                    *dict = subs.clone();
                }
                Ok(Box::new(mock))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_placeholder_rules() {
        assert!(PromptTemplate::new("no placeholder").is_err());
        assert!(PromptTemplate::new("{{input}} {{input}}").is_err());
        let t = PromptTemplate::new("Simplify: {{input}}").unwrap();
        assert_eq!(t.render("x"), "Simplify: x");
        let d = PromptTemplate::default();
        assert!(d.text().starts_with("**Objective**: Simplify the provided text by:"));
        assert!(d.render("ABC").ends_with("ABC\n"));
    }

    #[test]
    fn config_parsing_and_validation() {
        let c: SimplifierConfig =
            serde_json::from_str(r#"{"mode":"subprocess","command":"cat","batch_size":4}"#).unwrap();
        assert!(c.build().is_ok());
        let bad: SimplifierConfig =
            serde_json::from_str(r#"{"mode":"subprocess","command":"cat","timeout_s":0}"#).unwrap();
        assert!(matches!(bad.build().err(), Some(Error::Config(_))));
        let no_cmd: SimplifierConfig = serde_json::from_str(r#"{"mode":"subprocess"}"#).unwrap();
        assert!(no_cmd.build().is_err());
        let http: SimplifierConfig = serde_json::from_str(
            r#"{"mode":"http","endpoint":"http://x","model":"m","api_key_env":"SIMPKIT_SURELY_UNSET_VAR"}"#,
        )
        .unwrap();
        assert!(http.build().is_err());
        assert!(serde_json::from_str::<SimplifierConfig>(r#"{"mode":"http","bogus":1}"#).is_err());
    }

    #[test]
    fn http_body_shape() {
        let h = HttpSimplifier {
            endpoint: "http://x".into(),
            model: "gpt-4".into(),
            template: PromptTemplate::new("S: {{input}}").unwrap(),
            timeout: Duration::from_secs(1),
            retries: 0,
            batch_size: 1,
            api_key: None,
            params: Some(serde_json::from_str(r#"{"temperature": 0.2}"#).unwrap()),
            backoff: Duration::from_millis(1),
        };
        let body = h.request_body("hi");
        assert_eq!(body["model"], "gpt-4");
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "S: hi");
        assert_eq!(body["temperature"], 0.2);
    }
}
