//! Blocking HTTP client for chat-completion style endpoints.
//!
//! Wire format:
//!
//! - `POST {base}/chat/completions` with
//!   `{"model", "messages": [{"role", "content"}], "temperature", "stop", "max_tokens"}`,
//!   answer text read from `choices[0].message.content`.
//! - `POST {base}/embeddings` with `{"model", "input"}`,
//!   vector read from `data[0].embedding`.
//!
//! Transport errors and 5xx responses are retried with exponential backoff.
//! HTTP 429 is surfaced immediately with its `Retry-After` value.

use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, CompletionRequest, LlmError};
use crate::memory::EmbeddingVector;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub embed_model: String,
    pub timeout: Duration,
    pub max_attempts: u32,
    pub backoff: Duration,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: None,
            model: "gpt-3.5-turbo".into(),
            embed_model: "text-embedding-ada-002".into(),
            timeout: Duration::from_secs(60),
            max_attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }

    /// Reads `LLM_API_BASE` (required), `LLM_API_KEY`, `LLM_MODEL` and `EMBED_MODEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        let base = std::env::var("LLM_API_BASE")
            .map_err(|_| LlmError::InvalidRequest("LLM_API_BASE is not set".into()))?;
        let mut cfg = Self::new(base);
        cfg.api_key = std::env::var("LLM_API_KEY").ok().filter(|k| !k.is_empty());
        if let Ok(m) = std::env::var("LLM_MODEL") {
            cfg.model = m;
        }
        if let Ok(m) = std::env::var("EMBED_MODEL") {
            cfg.embed_model = m;
        }
        Ok(cfg)
    }
}

pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self { config, agent }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, LlmError> {
        let url = format!("{}/{path}", self.config.base_url.trim_end_matches('/'));
        let attempts = self.config.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff * 2u32.pow(attempt - 1));
            }
            let mut request = self.agent.post(&url).set("Content-Type", "application/json");
            if let Some(key) = &self.config.api_key {
                request = request.set("Authorization", &format!("Bearer {key}"));
            }
            match request.send_json(body.clone()) {
                Ok(resp) => {
                    return resp
                        .into_json::<Value>()
                        .map_err(|e| LlmError::Protocol(format!("invalid JSON body: {e}")))
                }
                Err(ureq::Error::Status(429, resp)) => {
                    let retry_after = resp
                        .header("Retry-After")
                        .and_then(|v| v.trim().parse::<u64>().ok())
                        .map(Duration::from_secs);
                    return Err(LlmError::RateLimited { retry_after });
                }
                Err(ureq::Error::Status(status, resp)) if status >= 500 => {
                    last = format!("HTTP {status}: {}", resp.into_string().unwrap_or_default());
                    tracing::warn!(%url, status, attempt, "retrying after server error");
                }
                Err(ureq::Error::Status(status, resp)) => {
                    return Err(LlmError::Http {
                        status,
                        body: resp.into_string().unwrap_or_default(),
                    })
                }
                Err(ureq::Error::Transport(t)) => {
                    last = t.to_string();
                    tracing::warn!(%url, attempt, error = %last, "retrying after transport error");
                }
            }
        }
        Err(LlmError::Network { attempts, message: last })
    }
}

impl Backend for HttpBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let model = if req.model_id.is_empty() || req.model_id == "default" {
            &self.config.model
        } else {
            &req.model_id
        };
        let body = json!({
            "model": model,
            "messages": req.messages,
            "temperature": req.temperature,
            "stop": req.stop,
            "max_tokens": req.max_output_tokens,
        });
        let resp = self.post("chat/completions", &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| LlmError::Protocol("missing choices[0].message.content".into()))
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, LlmError> {
        let body = json!({ "model": self.config.embed_model, "input": text });
        let resp = self.post("embeddings", &body)?;
        let values = resp
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| LlmError::Protocol("missing data[0].embedding".into()))?
            .iter()
            .map(|v| v.as_f64().map(|f| f as f32))
            .collect::<Option<Vec<f32>>>()
            .ok_or_else(|| LlmError::Protocol("embedding contains a non-number".into()))?;
        EmbeddingVector::new(values).map_err(|e| LlmError::Protocol(e.to_string()))
    }
}
