//! A small Python subset used for state-abstraction programs.
//!
//! Programs see two string bindings, `state` (the raw HTML) and `task`, and
//! must assign the abstracted observation to `obs`. HTML is queried through a
//! BeautifulSoup-like API. See `docs/dialect.md` for the grammar.

mod interp;
mod lexer;
mod parser;

use thiserror::Error;

pub use interp::{py_float, Limits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialectError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("runtime error on line {line}: {message}")]
    Runtime { line: usize, message: String },
}

/// A parsed abstraction program.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    source: String,
    body: Vec<parser::Stmt>,
}

impl Program {
    /// Parses `source`, first stripping a surrounding markdown code fence.
    pub fn parse(source: &str) -> Result<Self, DialectError> {
        let code = strip_fence(source);
        let body = parser::parse_program(code)?;
        Ok(Self {
            source: code.to_string(),
            body,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn run(&self, task: &str, state: &str, limits: Limits) -> Result<String, DialectError> {
        let mut it = interp::Interpreter::new(limits);
        it.set_str("state", state);
        it.set_str("task", task);
        it.run(&self.body, "obs")
    }
}

/// Parses and runs `source` with the default step limit.
pub fn execute(source: &str, task: &str, state: &str) -> Result<String, DialectError> {
    Program::parse(source)?.run(task, state, Limits::default())
}

/// Returns the body of the first fenced block, or the input trimmed of blank
/// edges when there is no fence.
pub fn strip_fence(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text.trim_matches('\n');
    };
    let after = &text[open + 3..];
    let body_start = after.find('\n').map_or(after.len(), |n| n + 1);
    let body = &after[body_start..];
    match body.find("```") {
        Some(close) => body[..close].trim_end_matches([' ', '\t']).trim_end_matches('\n'),
        None => body.trim_end_matches('\n'),
    }
}
