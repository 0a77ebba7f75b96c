//! Turning model responses into action blocks.
//!
//! Two dialects are understood: the code dialect (`agent.click_xpath(...)`
//! calls inside a fence, with counted loops) and the id dialect
//! (`` `CLICK [131]` ``). Grammars are documented in `docs/actions.md`.

mod code;
mod m2w;
mod validate;

use thiserror::Error;

pub use code::{expand, parse_code_actions, parse_code_block, render, ActionScript, Expansion, Statement};
pub use m2w::{parse_m2w_action, parse_m2w_block};
pub use validate::{validate_against_state, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("response contains no fenced code block")]
    NoFence,
    #[error("line {line}, column {column}: unknown method `{name}`")]
    UnknownMethod { line: usize, column: usize, name: String },
    #[error("line {line}, column {column}: malformed string literal: {message}")]
    MalformedLiteral { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unsupported construct: {message}")]
    Unsupported { line: usize, column: usize, message: String },
    #[error("line {line}: invalid {argument}: {message}")]
    InvalidArgument { line: usize, argument: &'static str, message: String },
    #[error("response produced no actions")]
    EmptyBlock,
    #[error("no `OP [id]` action found in {0:?}")]
    PatternMismatch(String),
    #[error("element id {0:?} is not a non-negative integer")]
    NonIntegerId(String),
    #[error("{0} needs a value")]
    MissingValue(&'static str),
}

impl GroundingError {
    /// Stable kebab-case name, used as an episode failure reason.
    pub fn kind(&self) -> &'static str {
        match self {
            GroundingError::NoFence => "no-fence",
            GroundingError::UnknownMethod { .. } => "unknown-method",
            GroundingError::MalformedLiteral { .. } => "malformed-literal",
            GroundingError::Unsupported { .. } => "unsupported-construct",
            GroundingError::InvalidArgument { .. } => "invalid-argument",
            GroundingError::EmptyBlock => "empty-block",
            GroundingError::PatternMismatch(_) => "pattern-mismatch",
            GroundingError::NonIntegerId(_) => "non-integer-id",
            GroundingError::MissingValue(_) => "missing-value",
        }
    }
}

/// Body of the first triple-backtick fence plus the 1-based line it starts on.
///
/// The language tag after the opening fence is skipped. Further fences are
/// logged and ignored.
pub fn first_fence(response: &str) -> Option<(&str, usize)> {
    let open = response.find("```")?;
    let after = &response[open + 3..];
    let newline = after.find('\n')?;
    let body = &after[newline + 1..];
    let start_line = response[..open].matches('\n').count() + 2;
    let (content, rest) = match body.find("```") {
        Some(close) => (&body[..close], &body[close + 3..]),
        None => (body, ""),
    };
    if rest.contains("```") {
        tracing::warn!("response has more than one code fence; only the first is used");
    }
    Some((content.trim_end_matches([' ', '\t']).trim_end_matches('\n'), start_line))
}
