//! Deterministic episodic web environments.
//!
//! Each environment renders HTML in the MiniWoB style (`data-wob_ref`
//! attributes, a `#query` banner) and is fully determined by its seed.

mod flight;
mod form;
mod terminal;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::html::{self, XPath, XPathError};
use crate::model::{Action, RawState, TaskSpec};

pub use flight::{Airport, FlightEnv, FlightOption, FlightScenario, Place, Preference, AIRPORTS};
pub use form::{FormEnv, FormScenario};
pub use terminal::{TerminalEnv, TerminalScenario, TerminalTarget};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("environment has not been reset")]
    NotReset,
    #[error("episode already finished")]
    Finished,
    #[error("{env} does not support {action}")]
    UnsupportedAction { env: &'static str, action: &'static str },
    #[error(transparent)]
    XPath(#[from] XPathError),
    #[error("unknown environment {0:?} (expected terminal, book-flight or form-fill)")]
    UnknownEnv(String),
}

/// Where an episode stands after the latest action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EpisodeStatus {
    Running,
    Succeeded,
    Failed { reason: String },
}

impl EpisodeStatus {
    pub fn is_done(&self) -> bool {
        !matches!(self, EpisodeStatus::Running)
    }
}

/// What an action did to the page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "kebab-case")]
pub enum ActionEffect {
    Applied,
    /// The action was well formed but had nothing to act on.
    Ignored { reason: String },
}

pub trait Environment: Send {
    fn name(&self) -> &'static str;
    /// Starts a fresh episode for `seed`.
    fn reset(&mut self, seed: u64) -> Result<(TaskSpec, RawState), EnvError>;
    fn state(&self) -> Result<RawState, EnvError>;
    fn step(&mut self, action: &Action) -> Result<ActionEffect, EnvError>;
    fn status(&self) -> EpisodeStatus;
}

pub const ENV_NAMES: [&str; 3] = ["terminal", "book-flight", "form-fill"];

/// Environment by its registry name.
pub fn by_name(name: &str) -> Result<Box<dyn Environment>, EnvError> {
    match name {
        "terminal" => Ok(Box::new(TerminalEnv::new())),
        "book-flight" => Ok(Box::new(FlightEnv::new())),
        "form-fill" => Ok(Box::new(FormEnv::new())),
        other => Err(EnvError::UnknownEnv(other.to_string())),
    }
}

/// Snapshot of the element a click landed on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Target {
    pub tag: String,
    pub attrs: BTreeMap<String, String>,
    pub text: String,
}

impl Target {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.get(name).map(String::as_str)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.attr("class").is_some_and(|c| c.split_whitespace().any(|c| c == class))
    }
}

/// First element of `page` selected by `xpath`, with the chain of its
/// ancestors' ids so that clicks on inner spans reach their widget.
pub(crate) fn click_target(page: &str, xpath: &str) -> Result<Option<(Target, Vec<Target>)>, EnvError> {
    let expr = XPath::parse(xpath)?;
    let doc = html::parse(page);
    let Some(first) = expr.select(&doc).into_iter().next() else {
        return Ok(None);
    };
    let snap = |el: scraper::ElementRef<'_>| Target {
        tag: el.value().name().to_string(),
        attrs: el.value().attrs().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        text: html::normalized_text(el),
    };
    let ancestors = first.ancestors().filter_map(scraper::ElementRef::wrap).map(snap).collect();
    Ok(Some((snap(first), ancestors)))
}

pub(crate) fn ignored(reason: impl Into<String>) -> ActionEffect {
    ActionEffect::Ignored { reason: reason.into() }
}

/// Escapes text for inclusion in element content or a quoted attribute.
pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Replays every action of `trajectory` against a fresh episode and returns
/// the final state.
pub fn replay(
    env: &mut dyn Environment,
    seed: u64,
    trajectory: &crate::model::Trajectory,
) -> Result<(RawState, EpisodeStatus), EnvError> {
    env.reset(seed)?;
    'outer: for step in &trajectory.steps {
        for action in &step.action_block.actions {
            if env.status().is_done() {
                break 'outer;
            }
            env.step(action)?;
        }
    }
    Ok((env.state()?, env.status()))
}
