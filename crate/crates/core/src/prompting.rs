//! Trajectory-as-exemplar prompt assembly.
//!
//! Two message layouts are supported. The code layout (MiniWoB style):
//!
//! ```text
//! user:      Task: {description}\nTrajectory:
//! user:      Observation:\n{observation}\nAction:
//! assistant: ```\n{action code}\n```
//! ```
//!
//! The id layout (Mind2Web style) folds the first observation into the task
//! message and wraps observations in backticks:
//!
//! ```text
//! user:      Task: {description}\nTrajectory:\nObservation: `{observation}`
//! assistant: Action: {action}
//! user:      Observation: `{observation}`
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ActionBlock, Observation, Outcome, Step, TaskSpec, Trajectory};

/// Stop sequences for every action completion.
pub const STOP_TOKENS: [&str; 2] = ["Observation:", "> Role: User"];

const MINIWOB_SYSTEM: &str = include_str!("prompts/miniwob_system.txt");
const MIND2WEB_SYSTEM: &str = include_str!("prompts/mind2web_system.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub messages: Vec<ChatMessage>,
    pub stop_tokens: Vec<String>,
    pub token_estimate: u64,
    /// Ids of exemplars dropped to fit the budget, in drop order.
    pub truncation_log: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Miniwob,
    Mind2web,
}

impl std::str::FromStr for PromptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "miniwob" => Ok(Self::Miniwob),
            "mind2web" => Ok(Self::Mind2web),
            other => Err(format!("unknown prompt mode {other:?} (expected miniwob or mind2web)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("exemplar {0} is not a successful trajectory")]
    UnsuccessfulExemplar(String),
    #[error("prompt needs {needed} tokens without any exemplar, budget is {budget}")]
    OverBudget { needed: u64, budget: u64 },
    #[error("current trajectory has no observation awaiting an action")]
    NoPendingObservation,
}

/// Token counting used for budget checks.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> u64;
}

/// One token per four characters, rounded up.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharHeuristic;

impl Tokenizer for CharHeuristic {
    fn count(&self, text: &str) -> u64 {
        (text.chars().count() as u64).div_ceil(4)
    }
}

pub fn token_estimate(messages: &[ChatMessage], tokenizer: &dyn Tokenizer) -> u64 {
    messages.iter().map(|m| tokenizer.count(&m.content)).sum()
}

pub fn build_system_prompt(mode: PromptMode) -> ChatMessage {
    ChatMessage::system(match mode {
        PromptMode::Miniwob => MINIWOB_SYSTEM,
        PromptMode::Mind2web => MIND2WEB_SYSTEM,
    })
}

fn task_header(task: &TaskSpec) -> String {
    format!("Task: {}\nTrajectory:", task.description)
}

fn observation_turn(mode: PromptMode, obs: &str) -> String {
    match mode {
        PromptMode::Miniwob => format!("Observation:\n{obs}\nAction:"),
        PromptMode::Mind2web => format!("Observation: `{obs}`"),
    }
}

fn action_turn(mode: PromptMode, block: &ActionBlock) -> String {
    match mode {
        PromptMode::Miniwob => format!("```\n{}\n```", block.raw_text),
        PromptMode::Mind2web => format!("Action: {}", block.raw_text),
    }
}

fn serialize_steps(mode: PromptMode, task: &TaskSpec, steps: &[Step], pending: Option<&Observation>) -> Vec<ChatMessage> {
    let mut out = vec![ChatMessage::user(task_header(task))];
    let observations = steps.iter().map(|s| (&s.observation, Some(&s.action_block)));
    let observations = observations.chain(pending.map(|o| (o, None)));
    for (obs, block) in observations {
        let turn = observation_turn(mode, &obs.text);
        match (mode, out.last_mut()) {
            (PromptMode::Mind2web, Some(last)) if last.role == Role::User => {
                last.content.push('\n');
                last.content.push_str(&turn);
            }
            _ => out.push(ChatMessage::user(turn)),
        }
        if let Some(block) = block {
            out.push(ChatMessage::assistant(action_turn(mode, block)));
        }
    }
    out
}

/// Messages for one stored exemplar.
pub fn serialize_exemplar(t: &Trajectory, mode: PromptMode) -> Result<Vec<ChatMessage>, PromptError> {
    if !t.is_success() {
        return Err(PromptError::UnsuccessfulExemplar(t.id().to_string()));
    }
    Ok(serialize_steps(mode, &t.task, &t.steps, None))
}

/// The trajectory being acted on: closed steps plus one observation awaiting an action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTrajectory {
    pub task: TaskSpec,
    pub steps: Vec<Step>,
    pub pending: Option<Observation>,
}

impl PartialTrajectory {
    pub fn new(task: TaskSpec, first_observation: Observation) -> Self {
        Self {
            task,
            steps: Vec::new(),
            pending: Some(first_observation),
        }
    }

    /// Closes the pending step with `block`, then opens `next` as the new pending observation.
    pub fn append_step(&mut self, block: ActionBlock, next: Option<Observation>) -> Result<(), PromptError> {
        let observation = self.pending.take().ok_or(PromptError::NoPendingObservation)?;
        self.steps.push(Step {
            observation,
            action_block: block,
        });
        self.pending = next;
        Ok(())
    }

    pub fn into_trajectory(self, outcome: Outcome) -> Trajectory {
        Trajectory {
            task: self.task,
            steps: self.steps,
            outcome,
        }
    }
}

pub struct PromptOptions<'a> {
    pub mode: PromptMode,
    pub budget: u64,
    pub tokenizer: &'a dyn Tokenizer,
}

impl PromptOptions<'static> {
    pub fn new(mode: PromptMode, budget: u64) -> Self {
        Self {
            mode,
            budget,
            tokenizer: &CharHeuristic,
        }
    }
}

/// System prompt, then exemplars in the given order, then `current`.
/// Exemplars are dropped from the end until the estimate fits `opts.budget`.
pub fn build_episode_prompt(
    system: &ChatMessage,
    exemplars: &[Trajectory],
    current: &PartialTrajectory,
    opts: &PromptOptions<'_>,
) -> Result<PromptBundle, PromptError> {
    let pending = current.pending.as_ref().ok_or(PromptError::NoPendingObservation)?;
    let tok = opts.tokenizer;
    let serialized = exemplars
        .iter()
        .map(|t| serialize_exemplar(t, opts.mode))
        .collect::<Result<Vec<_>, _>>()?;
    let tail = serialize_steps(opts.mode, &current.task, &current.steps, Some(pending));

    let fixed = tok.count(&system.content) + token_estimate(&tail, tok);
    if fixed > opts.budget {
        return Err(PromptError::OverBudget {
            needed: fixed,
            budget: opts.budget,
        });
    }
    let costs: Vec<u64> = serialized.iter().map(|m| token_estimate(m, tok)).collect();
    let mut keep = serialized.len();
    let mut total = fixed + costs.iter().sum::<u64>();
    let mut truncation_log = Vec::new();
    while total > opts.budget {
        keep -= 1;
        total -= costs[keep];
        truncation_log.push(exemplars[keep].id().to_string());
    }

    let mut messages = vec![system.clone()];
    messages.extend(serialized.into_iter().take(keep).flatten());
    messages.extend(tail);
    Ok(PromptBundle {
        messages,
        stop_tokens: STOP_TOKENS.iter().map(|s| s.to_string()).collect(),
        token_estimate: total,
        truncation_log,
    })
}
