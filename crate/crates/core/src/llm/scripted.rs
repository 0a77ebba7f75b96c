//! Deterministic backend driven by a script of matcher/response records.
//!
//! Script file (YAML):
//!
//! ```yaml
//! default_dim: 64
//! responses:
//!   - match: { prompt_hash: "<sha256 hex of canonical messages JSON>" }
//!     response: "..."
//!   - match: { substring: "Action:", scope: last }   # scope: last (default) or prompt
//!     response: "..."
//!   - match: { sequence: 0 }
//!     response: "..."
//! embeddings:
//!   - text: "some metadata"          # or text_hash: "<sha256 hex>"
//!     vector: [0.1, 0.2]
//! ```
//!
//! Precedence is prompt hash, then substring, then sequence. Within a kind the
//! first record in file order wins. Sequence records are consumed exactly once,
//! in index order. A request nothing matches is an error.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use super::{prompt_hash, sha256_hex, Backend, CompletionRequest, LlmError};
use crate::memory::EmbeddingVector;

const HASH_EMBED_KEY: &[u8] = b"trajmem-embed-v1";

/// Deterministic pseudo-embedding of `text`.
///
/// FNV-1a 64 over `"trajmem-embed-v1" ++ [0] ++ text` seeds a splitmix64
/// chain; each output's top 53 bits are mapped linearly onto [-1, 1).
pub fn hash_embedding(text: &str, dim: usize) -> EmbeddingVector {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in HASH_EMBED_KEY.iter().chain(&[0u8]).chain(text.as_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut state = h;
    let values = (0..dim)
        .map(|_| {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            let unit = (z >> 11) as f64 / (1u64 << 53) as f64;
            (unit * 2.0 - 1.0) as f32
        })
        .collect();
    EmbeddingVector::new(values).expect("hash embedding is finite and non-empty")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Only the final message of the request.
    #[default]
    Last,
    /// All message contents joined by newlines.
    Prompt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matcher {
    PromptHash(String),
    Substring { text: String, scope: Scope },
    Sequence(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptRecord {
    pub matcher: Matcher,
    pub response: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptFile {
    #[serde(default = "default_dim")]
    default_dim: usize,
    #[serde(default)]
    responses: Vec<ResponseFile>,
    #[serde(default)]
    embeddings: Vec<EmbeddingFile>,
}

fn default_dim() -> usize {
    64
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseFile {
    #[serde(rename = "match")]
    matcher: MatchFile,
    response: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchFile {
    prompt_hash: Option<String>,
    substring: Option<String>,
    sequence: Option<usize>,
    scope: Option<Scope>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFile {
    text: Option<String>,
    text_hash: Option<String>,
    vector: Vec<f32>,
}

#[derive(Debug, Default)]
struct State {
    cursor: usize,
    log: Vec<CompletionRequest>,
}

#[derive(Debug)]
pub struct ScriptedBackend {
    records: Vec<ScriptRecord>,
    embeddings: HashMap<String, EmbeddingVector>,
    default_dim: usize,
    state: Mutex<State>,
}

impl ScriptedBackend {
    pub fn new(default_dim: usize) -> Self {
        assert!(default_dim > 0, "default_dim must be positive");
        Self {
            records: Vec::new(),
            embeddings: HashMap::new(),
            default_dim,
            state: Mutex::default(),
        }
    }

    pub fn with_record(mut self, matcher: Matcher, response: impl Into<String>) -> Self {
        self.records.push(ScriptRecord {
            matcher,
            response: response.into(),
        });
        self
    }

    pub fn with_embedding(mut self, text: &str, vector: EmbeddingVector) -> Self {
        self.embeddings.insert(sha256_hex(text.as_bytes()), vector);
        self
    }

    pub fn from_yaml_str(text: &str) -> Result<Self, LlmError> {
        let file: ScriptFile = serde_yaml::from_str(text).map_err(|e| LlmError::Script(e.to_string()))?;
        if file.default_dim == 0 {
            return Err(LlmError::Script("default_dim must be positive".into()));
        }
        let mut backend = Self::new(file.default_dim);
        for (i, r) in file.responses.into_iter().enumerate() {
            let m = r.matcher;
            let matcher = match (m.prompt_hash, m.substring, m.sequence) {
                (Some(h), None, None) if m.scope.is_none() => Matcher::PromptHash(h.to_ascii_lowercase()),
                (None, Some(text), None) => Matcher::Substring {
                    text,
                    scope: m.scope.unwrap_or_default(),
                },
                (None, None, Some(n)) if m.scope.is_none() => Matcher::Sequence(n),
                _ => {
                    return Err(LlmError::Script(format!(
                        "responses[{i}]: match needs exactly one of prompt_hash, substring, sequence (scope only with substring)"
                    )))
                }
            };
            backend.records.push(ScriptRecord {
                matcher,
                response: r.response,
            });
        }
        let mut seq: Vec<usize> = backend
            .records
            .iter()
            .filter_map(|r| match r.matcher {
                Matcher::Sequence(n) => Some(n),
                _ => None,
            })
            .collect();
        seq.sort_unstable();
        if seq.iter().enumerate().any(|(i, &n)| i != n) {
            return Err(LlmError::Script("sequence indices must be 0, 1, 2, ... without gaps or repeats".into()));
        }
        for (i, e) in file.embeddings.into_iter().enumerate() {
            let key = match (e.text, e.text_hash) {
                (Some(t), None) => sha256_hex(t.as_bytes()),
                (None, Some(h)) => h.to_ascii_lowercase(),
                _ => return Err(LlmError::Script(format!("embeddings[{i}]: need exactly one of text, text_hash"))),
            };
            let v = EmbeddingVector::new(e.vector)
                .map_err(|err| LlmError::Script(format!("embeddings[{i}]: {err}")))?;
            backend.embeddings.insert(key, v);
        }
        Ok(backend)
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        Self::from_yaml_str(&text)
    }

    pub fn default_dim(&self) -> usize {
        self.default_dim
    }

    pub fn records(&self) -> &[ScriptRecord] {
        &self.records
    }

    /// Every completion request received so far, in arrival order.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.state.lock().unwrap_or_else(|p| p.into_inner()).log.clone()
    }

    fn find(&self, req: &CompletionRequest, cursor: usize) -> Option<(usize, bool)> {
        let hash = prompt_hash(&req.messages);
        let last = req.messages.last().map_or("", |m| m.content.as_str());
        let mut whole: Option<String> = None;
        let by_hash = self
            .records
            .iter()
            .position(|r| matches!(&r.matcher, Matcher::PromptHash(h) if *h == hash));
        if let Some(i) = by_hash {
            return Some((i, false));
        }
        for (i, r) in self.records.iter().enumerate() {
            if let Matcher::Substring { text, scope } = &r.matcher {
                let hit = match scope {
                    Scope::Last => last.contains(text.as_str()),
                    Scope::Prompt => whole
                        .get_or_insert_with(|| {
                            req.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n")
                        })
                        .contains(text.as_str()),
                };
                if hit {
                    return Some((i, false));
                }
            }
        }
        self.records
            .iter()
            .position(|r| r.matcher == Matcher::Sequence(cursor))
            .map(|i| (i, true))
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let mut state = self.state.lock().unwrap_or_else(|p| p.into_inner());
        state.log.push(req.clone());
        match self.find(req, state.cursor) {
            Some((i, consumed)) => {
                if consumed {
                    state.cursor += 1;
                }
                Ok(self.records[i].response.clone())
            }
            None => Err(LlmError::Unmatched {
                last_message: req
                    .messages
                    .last()
                    .map(|m| m.content.chars().rev().take(120).collect::<Vec<_>>().into_iter().rev().collect())
                    .unwrap_or_default(),
            }),
        }
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, LlmError> {
        Ok(self
            .embeddings
            .get(&sha256_hex(text.as_bytes()))
            .cloned()
            .unwrap_or_else(|| hash_embedding(text, self.default_dim)))
    }
}
