//! Chat-completion and embedding backends behind one gateway.

mod http;
mod scripted;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::memory::EmbeddingVector;
use crate::prompting::ChatMessage;

pub use http::{HttpBackend, HttpConfig};
pub use scripted::{hash_embedding, Matcher, Scope, ScriptRecord, ScriptedBackend};

pub const MAX_STOP_TOKENS: usize = 4;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no script record matches the request (last message: {last_message:?})")]
    Unmatched { last_message: String },
    #[error("network failure after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("rate limited{}", retry_after.map(|d| format!(", retry after {}s", d.as_secs())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("invalid script: {0}")]
    Script(String),
    #[error("cannot embed empty text")]
    EmptyText,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub stop: Vec<String>,
    pub max_output_tokens: u32,
    pub model_id: String,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.stop.len() > MAX_STOP_TOKENS {
            return Err(LlmError::InvalidRequest(format!(
                "at most {MAX_STOP_TOKENS} stop sequences are allowed, got {}",
                self.stop.len()
            )));
        }
        if self.stop.iter().any(String::is_empty) {
            return Err(LlmError::InvalidRequest("stop sequences must be non-empty".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(LlmError::InvalidRequest("temperature must be a non-negative number".into()));
        }
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("messages must not be empty".into()));
        }
        Ok(())
    }
}

/// A model provider. Implementations return raw text; stop handling happens in [`Gateway`].
pub trait Backend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError>;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, LlmError>;
}

/// Decoding defaults applied to every request built by a [`Gateway`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProfile {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for ModelProfile {
    fn default() -> Self {
        Self {
            model_id: "default".into(),
            temperature: 0.0,
            max_output_tokens: 512,
        }
    }
}

/// Per-worker handle over a shared backend. Counts calls and enforces the stop contract.
pub struct Gateway {
    backend: Arc<dyn Backend>,
    profile: ModelProfile,
    completions: AtomicU64,
    embeddings: AtomicU64,
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>, profile: ModelProfile) -> Self {
        Self {
            backend,
            profile,
            completions: AtomicU64::new(0),
            embeddings: AtomicU64::new(0),
        }
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn profile(&self) -> &ModelProfile {
        &self.profile
    }

    pub fn request(&self, messages: &[ChatMessage], stop: &[&str]) -> CompletionRequest {
        CompletionRequest {
            messages: messages.to_vec(),
            temperature: self.profile.temperature,
            stop: stop.iter().map(|s| s.to_string()).collect(),
            max_output_tokens: self.profile.max_output_tokens,
            model_id: self.profile.model_id.clone(),
        }
    }

    pub fn complete(&self, messages: &[ChatMessage], stop: &[&str]) -> Result<String, LlmError> {
        self.complete_request(&self.request(messages, stop))
    }

    /// Validates `req`, calls the backend and cuts the text at the earliest stop sequence.
    pub fn complete_request(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        req.validate()?;
        self.completions.fetch_add(1, Ordering::Relaxed);
        let text = self.backend.complete(req)?;
        Ok(truncate_at_stop(&text, &req.stop).to_string())
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, LlmError> {
        if text.is_empty() {
            return Err(LlmError::EmptyText);
        }
        self.embeddings.fetch_add(1, Ordering::Relaxed);
        self.backend.embed(text)
    }

    pub fn completion_count(&self) -> u64 {
        self.completions.load(Ordering::Relaxed)
    }

    pub fn embedding_count(&self) -> u64 {
        self.embeddings.load(Ordering::Relaxed)
    }
}

/// Prefix of `text` before the earliest occurrence of any stop sequence.
pub fn truncate_at_stop<'a, S: AsRef<str>>(text: &'a str, stops: &[S]) -> &'a str {
    let cut = stops
        .iter()
        .filter_map(|s| text.find(s.as_ref()))
        .min()
        .unwrap_or(text.len());
    &text[..cut]
}

/// Hex SHA-256 of the canonical JSON encoding of `messages`.
pub fn prompt_hash(messages: &[ChatMessage]) -> String {
    sha256_hex(crate::codec::to_canonical_string(&messages).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
