//! Domain types shared by every stage of the pipeline.
//!
//! All values are plain `Send + Sync` data. [`crate::codec`] writes them in
//! the canonical JSONL layout.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Default character budget for a single observation.
pub const DEFAULT_OBSERVATION_BUDGET: usize = 8000;

/// Keys accepted by `Action::Press`.
pub const PRESS_KEYS: [&str; 10] = [
    "enter",
    "space",
    "arrowleft",
    "arrowright",
    "backspace",
    "arrowup",
    "arrowdown",
    "command+a",
    "command+c",
    "command+v",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkMode {
    Episodic,
    StaticDataset,
}

/// A task given to the agent in natural language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    pub benchmark_mode: BenchmarkMode,
    /// Extra metadata (website, domain, ...). Sorted by key.
    #[serde(default)]
    pub metadata_fields: BTreeMap<String, String>,
}

impl TaskSpec {
    pub fn new(id: impl Into<String>, description: impl Into<String>, mode: BenchmarkMode) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            benchmark_mode: mode,
            metadata_fields: BTreeMap::new(),
        }
    }

    pub fn with_field(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata_fields.insert(key.into(), value.into());
        self
    }
}

/// Full environment state as seen by the agent (the page HTML).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawState {
    pub html: String,
    pub step_index: u32,
    pub seed: u64,
}

impl RawState {
    pub fn new(html: impl Into<String>, step_index: u32, seed: u64) -> Self {
        Self {
            html: html.into(),
            step_index,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationSource {
    Explicit,
    ImplicitProgram,
    ZeroShotFallback,
    TopkFilter,
    RawPassthrough,
}

impl fmt::Display for ObservationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Explicit => "explicit",
            Self::ImplicitProgram => "implicit-program",
            Self::ZeroShotFallback => "zero-shot-fallback",
            Self::TopkFilter => "topk-filter",
            Self::RawPassthrough => "raw-passthrough",
        };
        f.write_str(s)
    }
}

/// Task-relevant text distilled from a [`RawState`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    pub source: ObservationSource,
    /// Set when `text` was cut down to the observation budget.
    #[serde(default)]
    pub truncated: bool,
}

impl Observation {
    /// Builds an observation, truncating `text` to at most `budget` characters.
    pub fn new(text: impl Into<String>, source: ObservationSource, budget: usize) -> Self {
        let mut text = text.into();
        let mut truncated = false;
        if let Some((cut, _)) = text.char_indices().nth(budget) {
            text.truncate(cut);
            truncated = true;
        }
        Self {
            text,
            source,
            truncated,
        }
    }

    /// An observation taken verbatim, without applying a budget.
    pub fn unbounded(text: impl Into<String>, source: ObservationSource) -> Self {
        Self {
            text: text.into(),
            source,
            truncated: false,
        }
    }
}

/// A primitive action in either the code dialect or the id dialect.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    ClickXpath { xpath: String },
    Type { characters: String },
    Press { key: String },
    ClickOption { xpath: String },
    MoveMouse { xpath: String },
    Click { id: u64 },
    TypeById { id: u64, value: String },
    SelectById { id: u64, value: String },
}

impl Action {
    /// Checks the per-kind argument invariants. The error names the offending argument.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        match self {
            Action::Press { key } if !PRESS_KEYS.contains(&key.as_str()) => {
                Err(("key", format!("unsupported key {key:?}")))
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Action::ClickXpath { .. } => "click_xpath",
            Action::Type { .. } => "type",
            Action::Press { .. } => "press",
            Action::ClickOption { .. } => "click_option",
            Action::MoveMouse { .. } => "movemouse",
            Action::Click { .. } => "CLICK",
            Action::TypeById { .. } => "TYPE",
            Action::SelectById { .. } => "SELECT",
        }
    }

    /// Element id for actions of the id dialect.
    pub fn element_id(&self) -> Option<u64> {
        match self {
            Action::Click { id } | Action::TypeById { id, .. } | Action::SelectById { id, .. } => {
                Some(*id)
            }
            _ => None,
        }
    }

    pub fn xpath(&self) -> Option<&str> {
        match self {
            Action::ClickXpath { xpath }
            | Action::ClickOption { xpath }
            | Action::MoveMouse { xpath } => Some(xpath),
            _ => None,
        }
    }
}

/// All actions emitted by one model response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionBlock {
    pub actions: Vec<Action>,
    /// The response segment the block was parsed from (fence contents for code).
    pub raw_text: String,
    #[serde(default)]
    pub comments: Vec<String>,
}

impl ActionBlock {
    /// Returns `None` when `actions` is empty.
    pub fn new(actions: Vec<Action>, raw_text: impl Into<String>, comments: Vec<String>) -> Option<Self> {
        if actions.is_empty() {
            return None;
        }
        Some(Self {
            actions,
            raw_text: raw_text.into(),
            comments,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub observation: Observation,
    pub action_block: ActionBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Failure,
    Unknown,
}

/// A task plus its ordered observation/action steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task: TaskSpec,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn new(task: TaskSpec) -> Self {
        Self {
            task,
            steps: Vec::new(),
            outcome: Outcome::Unknown,
        }
    }

    pub fn id(&self) -> &str {
        &self.task.id
    }

    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// Checks field invariants; the error carries a dotted path to the field.
    pub fn validate(&self) -> Result<(), (String, String)> {
        if self.task.description.is_empty() {
            return Err(("task.description".into(), "must not be empty".into()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            let block = &step.action_block;
            if block.actions.is_empty() {
                return Err((
                    format!("steps[{i}].action_block.actions"),
                    "must not be empty".into(),
                ));
            }
            for (j, action) in block.actions.iter().enumerate() {
                if let Err((arg, why)) = action.check() {
                    return Err((format!("steps[{i}].action_block.actions[{j}].{arg}"), why));
                }
            }
        }
        Ok(())
    }
}
