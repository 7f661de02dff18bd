//! Chat-completions style HTTP client: one request per input, at most
//! `batch_size` in flight.

use std::thread;
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{PromptTemplate, Simplifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct HttpSimplifier {
    pub endpoint: String,
    pub model: String,
    pub template: PromptTemplate,
    pub timeout: Duration,
    pub retries: u32,
    pub batch_size: usize,
    /// Bearer token, already read from the configured environment variable.
    pub api_key: Option<String>,
    /// Extra top-level body fields (temperature and friends), passed verbatim.
    pub params: Option<Map<String, Value>>,
    /// First retry delay; doubles on each further attempt.
    pub backoff: Duration,
}

enum Attempt {
    Done(String),
    Retry(Error),
    Fail(Error),
}

impl HttpSimplifier {
    pub fn request_body(&self, input: &str) -> Value {
        let mut body = Map::new();
        if let Some(params) = &self.params {
            body.extend(params.clone());
        }
        body.insert("model".into(), json!(self.model));
        body.insert(
            "messages".into(),
            json!([{ "role": "user", "content": self.template.render(input) }]),
        );
        Value::Object(body)
    }

    fn agent(&self) -> ureq::Agent {
        ureq::AgentBuilder::new().timeout(self.timeout).build()
    }

    fn attempt(&self, agent: &ureq::Agent, body: &Value, batch: usize) -> Attempt {
        let mut req = agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(resp) => {
                let value: Value = match resp.into_json() {
                    Ok(v) => v,
                    Err(e) => return Attempt::Fail(Error::Protocol(format!("bad JSON response: {e}"))),
                };
                match value.pointer("/choices/0/message/content").and_then(Value::as_str) {
                    Some(text) => Attempt::Done(text.to_string()),
                    None => Attempt::Fail(Error::Protocol(
                        "response has no choices[0].message.content".into(),
                    )),
                }
            }
            Err(ureq::Error::Status(code, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                let err = Error::Transport {
                    status: Some(code),
                    message: text.chars().take(300).collect(),
                };
                if code == 429 || code >= 500 {
                    Attempt::Retry(err)
                } else {
                    Attempt::Fail(err)
                }
            }
            Err(ureq::Error::Transport(t)) => {
                let message = t.to_string();
                if message.contains("timed out") {
                    Attempt::Retry(Error::Timeout {
                        batch,
                        seconds: self.timeout.as_secs_f64(),
                    })
                } else {
                    Attempt::Retry(Error::Transport {
                        status: None,
                        message,
                    })
                }
            }
        }
    }

    fn simplify_one(&self, agent: &ureq::Agent, input: &str, batch: usize) -> Result<String> {
        let body = self.request_body(input);
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(agent, &body, batch) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) if attempt >= self.retries => return Err(e),
                Attempt::Retry(e) => {
                    log::warn!("retrying after {e} (attempt {})", attempt + 1);
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }
}

impl Simplifier for HttpSimplifier {
    fn simplify_batch(&self, inputs: &[String]) -> Result<Vec<String>> {
        let agent = self.agent();
        let mut out = Vec::with_capacity(inputs.len());
        for (batch, chunk) in inputs.chunks(self.batch_size.max(1)).enumerate() {
            let results: Vec<Result<String>> = thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|input| {
                        let agent = &agent;
                        s.spawn(move || self.simplify_one(agent, input, batch))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("request thread panicked"))
                    .collect()
            });
            for r in results {
                out.push(r?);
            }
        }
        Ok(out)
    }
}
