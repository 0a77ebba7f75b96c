//! State abstraction: turning raw HTML into a short task-relevant observation.
//!
//! Three mechanisms are available:
//!
//! - explicit: few-shot `State:`/`Observation:` pairs completed by the model;
//! - implicit: a program in the [`dialect`] is run over the state, trying
//!   memory-stored programs, then a freshly generated one, then a zero-shot
//!   prompt as the last resort;
//! - top-k filtering over a ranked element list (see [`ranking`]).

pub mod dialect;
pub mod ranking;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{Gateway, LlmError};
use crate::model::{Observation, ObservationSource, RawState, TaskSpec, DEFAULT_OBSERVATION_BUDGET};
use crate::prompting::{token_estimate, CharHeuristic, ChatMessage, Tokenizer};
use dialect::{DialectError, Limits, Program};

pub use ranking::{filter_topk, recall_at_k, reference_rank, RankedElement, RankingError};

/// Versioned instruction used when no program produces an observation.
pub const ZERO_SHOT_TEMPLATE: &str =
    "Extract only the task-relevant information from the following webpage state for the task: {task}. State: {state}. Observation:";

/// Opening line of every program-generation prompt.
pub const IMPLICIT_HEADER: &str = "Filter the following raw HTML state into a clean observation via code based on the task.";

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("{0:?} abstraction prompt has no pairs")]
    NoPairs(AbstractionMode),
    #[error("expected a {expected:?} abstraction prompt")]
    WrongMode { expected: AbstractionMode },
    #[error("raw state is empty")]
    EmptyState,
    #[error("prompt needs {needed} tokens but the budget is {budget}")]
    OverBudget { needed: u64, budget: u64 },
    #[error("completion contains no fenced code block")]
    NoCodeBlock,
    #[error(transparent)]
    Dialect(#[from] DialectError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionMode {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitPair {
    pub state: RawState,
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicitPair {
    pub task: String,
    pub program: String,
}

/// Few-shot material for one abstraction mechanism, stored alongside exemplars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionPrompt {
    pub mode: AbstractionMode,
    #[serde(default)]
    pub explicit_pairs: Vec<ExplicitPair>,
    #[serde(default)]
    pub implicit_pairs: Vec<ImplicitPair>,
    #[serde(default)]
    pub instruction_preamble: String,
}

impl AbstractionPrompt {
    pub fn explicit(pairs: Vec<ExplicitPair>) -> Self {
        Self {
            mode: AbstractionMode::Explicit,
            explicit_pairs: pairs,
            implicit_pairs: Vec::new(),
            instruction_preamble: String::new(),
        }
    }

    pub fn implicit(preamble: impl Into<String>, pairs: Vec<ImplicitPair>) -> Self {
        Self {
            mode: AbstractionMode::Implicit,
            explicit_pairs: Vec::new(),
            implicit_pairs: pairs,
            instruction_preamble: preamble.into(),
        }
    }

    pub fn validate(&self) -> Result<(), AbstractionError> {
        let empty = match self.mode {
            AbstractionMode::Explicit => self.explicit_pairs.is_empty(),
            AbstractionMode::Implicit => self.implicit_pairs.is_empty(),
        };
        if empty {
            return Err(AbstractionError::NoPairs(self.mode));
        }
        Ok(())
    }

    fn expect(&self, mode: AbstractionMode) -> Result<(), AbstractionError> {
        if self.mode != mode {
            return Err(AbstractionError::WrongMode { expected: mode });
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramOrigin {
    Memory,
    LlmGenerated,
}

/// A program that has already been parsed under the dialect grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionProgram {
    pub origin: ProgramOrigin,
    program: Program,
}

impl AbstractionProgram {
    pub fn new(source: &str, origin: ProgramOrigin) -> Result<Self, DialectError> {
        Ok(Self {
            origin,
            program: Program::parse(source)?,
        })
    }

    pub fn source(&self) -> &str {
        self.program.source()
    }

    pub fn program(&self) -> &Program {
        &self.program
    }
}

/// Runs abstraction programs. Implementations must be deterministic.
pub trait Executor: Send + Sync {
    fn execute(&self, program: &AbstractionProgram, task: &str, state: &str) -> Result<String, DialectError>;
}

/// The built-in sandboxed interpreter.
#[derive(Debug, Clone, Copy, Default)]
pub struct DialectExecutor {
    pub limits: Limits,
}

impl Executor for DialectExecutor {
    fn execute(&self, program: &AbstractionProgram, task: &str, state: &str) -> Result<String, DialectError> {
        program.program().run(task, state, self.limits)
    }
}

/// Knobs shared by the abstraction operations.
pub struct AbstractionConfig<'a> {
    /// Character budget applied to every produced observation.
    pub observation_budget: usize,
    /// Model token budget for abstraction prompts; `None` disables the check.
    pub token_budget: Option<u64>,
    pub tokenizer: &'a dyn Tokenizer,
    pub executor: &'a dyn Executor,
}

static DEFAULT_EXECUTOR: DialectExecutor = DialectExecutor {
    limits: Limits { max_steps: 100_000 },
};

impl Default for AbstractionConfig<'_> {
    fn default() -> Self {
        Self {
            observation_budget: DEFAULT_OBSERVATION_BUDGET,
            token_budget: None,
            tokenizer: &CharHeuristic,
            executor: &DEFAULT_EXECUTOR,
        }
    }
}

impl AbstractionConfig<'_> {
    fn check_budget(&self, messages: &[ChatMessage]) -> Result<(), AbstractionError> {
        if let Some(budget) = self.token_budget {
            let needed = token_estimate(messages, self.tokenizer);
            if needed > budget {
                return Err(AbstractionError::OverBudget { needed, budget });
            }
        }
        Ok(())
    }
}

/// The single user message sent for explicit abstraction.
pub fn explicit_messages(prompt: &AbstractionPrompt, state: &RawState) -> Vec<ChatMessage> {
    let mut text = String::new();
    if !prompt.instruction_preamble.is_empty() {
        text.push_str(&prompt.instruction_preamble);
        text.push('\n');
    }
    for pair in &prompt.explicit_pairs {
        text.push_str("State:\n");
        text.push_str(&pair.state.html);
        text.push_str("\nObservation:\n");
        text.push_str(&pair.observation.text);
        text.push('\n');
    }
    text.push_str("State:\n");
    text.push_str(&state.html);
    text.push_str("\nObservation:");
    vec![ChatMessage::user(text)]
}

pub fn abstract_explicit(
    prompt: &AbstractionPrompt,
    state: &RawState,
    gateway: &Gateway,
    cfg: &AbstractionConfig<'_>,
) -> Result<Observation, AbstractionError> {
    prompt.expect(AbstractionMode::Explicit)?;
    if state.html.is_empty() {
        return Err(AbstractionError::EmptyState);
    }
    let messages = explicit_messages(prompt, state);
    cfg.check_budget(&messages)?;
    let text = gateway.complete(&messages, &["State:"])?;
    Ok(Observation::new(text.trim(), ObservationSource::Explicit, cfg.observation_budget))
}

/// The single user message asking the model to write an abstraction program.
pub fn implicit_messages(prompt: &AbstractionPrompt, task: &TaskSpec, state: &RawState) -> Vec<ChatMessage> {
    let mut text = format!("{IMPLICIT_HEADER}\nState:\n{}\n\n", state.html);
    if !prompt.instruction_preamble.is_empty() {
        text.push_str(&prompt.instruction_preamble);
        text.push_str("\n\n");
    }
    text.push_str("Here are some examples:\n");
    for pair in &prompt.implicit_pairs {
        text.push_str(&format!(
            "Write code within three backticks '```' to {}\nCode:\n```python\n{}\n```\n\n",
            pair.task,
            dialect::strip_fence(&pair.program)
        ));
    }
    text.push_str(&format!(
        "Now, write code within three backticks '```' to {}\nCode:",
        task.description
    ));
    vec![ChatMessage::user(text)]
}

/// Picks the first fenced block out of a completion.
pub fn extract_code_block(completion: &str) -> Result<&str, AbstractionError> {
    if !completion.contains("```") {
        return Err(AbstractionError::NoCodeBlock);
    }
    Ok(dialect::strip_fence(completion))
}

pub fn generate_program(
    prompt: &AbstractionPrompt,
    task: &TaskSpec,
    state: &RawState,
    gateway: &Gateway,
    cfg: &AbstractionConfig<'_>,
) -> Result<AbstractionProgram, AbstractionError> {
    prompt.expect(AbstractionMode::Implicit)?;
    let messages = implicit_messages(prompt, task, state);
    cfg.check_budget(&messages)?;
    let completion = gateway.complete(&messages, &[])?;
    let code = extract_code_block(&completion)?;
    Ok(AbstractionProgram::new(code, ProgramOrigin::LlmGenerated)?)
}

pub fn execute_program(
    program: &AbstractionProgram,
    task: &TaskSpec,
    state: &RawState,
    cfg: &AbstractionConfig<'_>,
) -> Result<Observation, AbstractionError> {
    let text = cfg.executor.execute(program, &task.description, &state.html)?;
    Ok(Observation::new(text, ObservationSource::ImplicitProgram, cfg.observation_budget))
}

pub fn zero_shot_message(task: &TaskSpec, state: &RawState) -> ChatMessage {
    ChatMessage::user(
        ZERO_SHOT_TEMPLATE
            .replacen("{task}", &task.description, 1)
            .replacen("{state}", &state.html, 1),
    )
}

/// Memory programs, then a generated one, then the zero-shot prompt.
///
/// Only model failures on the fallback itself reach the caller.
pub fn abstract_implicit(
    prompt: &AbstractionPrompt,
    task: &TaskSpec,
    state: &RawState,
    gateway: &Gateway,
    cfg: &AbstractionConfig<'_>,
) -> Result<Observation, AbstractionError> {
    prompt.expect(AbstractionMode::Implicit)?;
    for pair in &prompt.implicit_pairs {
        let attempt = AbstractionProgram::new(&pair.program, ProgramOrigin::Memory)
            .map_err(AbstractionError::from)
            .and_then(|p| execute_program(&p, task, state, cfg));
        match attempt {
            Ok(obs) => return Ok(obs),
            Err(e) => tracing::debug!(task = %task.id, error = %e, "memory program failed"),
        }
    }
    let generated = generate_program(prompt, task, state, gateway, cfg).and_then(|p| execute_program(&p, task, state, cfg));
    match generated {
        Ok(obs) => return Ok(obs),
        Err(AbstractionError::Llm(e)) if !matches!(e, LlmError::Unmatched { .. }) => return Err(e.into()),
        Err(e) => tracing::info!(task = %task.id, error = %e, "falling back to zero-shot abstraction"),
    }
    let messages = [zero_shot_message(task, state)];
    let text = gateway.complete(&messages, &[])?;
    Ok(Observation::new(text.trim(), ObservationSource::ZeroShotFallback, cfg.observation_budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Matcher, ModelProfile, Scope, ScriptedBackend};
    use crate::model::BenchmarkMode;
    use std::sync::Arc;

    fn gateway(backend: ScriptedBackend) -> Gateway {
        Gateway::new(Arc::new(backend), ModelProfile::default())
    }

    fn pair(html: &str, obs: &str) -> ExplicitPair {
        ExplicitPair {
            state: RawState::new(html, 0, 0),
            observation: Observation::unbounded(obs, ObservationSource::Explicit),
        }
    }

    fn task(d: &str) -> TaskSpec {
        TaskSpec::new("t", d, BenchmarkMode::Episodic)
    }

    fn substring(needle: &str) -> Matcher {
        Matcher::Substring {
            text: needle.into(),
            scope: Scope::Last,
        }
    }

    #[test]
    fn explicit_prompt_layout() {
        let p = AbstractionPrompt::explicit(vec![pair("<a>1</a>", "one"), pair("<a>2</a>", "two")]);
        let msgs = explicit_messages(&p, &RawState::new("<a>3</a>", 0, 0));
        assert_eq!(msgs.len(), 1);
        assert_eq!(
            msgs[0].content,
            "State:\n<a>1</a>\nObservation:\none\nState:\n<a>2</a>\nObservation:\ntwo\nState:\n<a>3</a>\nObservation:"
        );
        let gw = gateway(ScriptedBackend::new(8).with_record(substring("<a>3</a>"), "three"));
        let obs = abstract_explicit(&p, &RawState::new("<a>3</a>", 0, 0), &gw, &AbstractionConfig::default()).unwrap();
        assert_eq!((obs.text.as_str(), obs.source), ("three", ObservationSource::Explicit));
    }

    #[test]
    fn explicit_preconditions() {
        let gw = gateway(ScriptedBackend::new(8));
        let cfg = AbstractionConfig::default();
        let empty = AbstractionPrompt::explicit(vec![]);
        assert!(matches!(
            abstract_explicit(&empty, &RawState::new("<a/>", 0, 0), &gw, &cfg),
            Err(AbstractionError::NoPairs(AbstractionMode::Explicit))
        ));
        let p = AbstractionPrompt::explicit(vec![pair("<a>1</a>", "one")]);
        let tight = AbstractionConfig {
            token_budget: Some(3),
            ..AbstractionConfig::default()
        };
        assert!(matches!(
            abstract_explicit(&p, &RawState::new("<a/>", 0, 0), &gw, &tight),
            Err(AbstractionError::OverBudget { budget: 3, .. })
        ));
    }

    #[test]
    fn code_block_extraction() {
        assert!(matches!(extract_code_block("no code here"), Err(AbstractionError::NoCodeBlock)));
        assert_eq!(extract_code_block("```python\nobs = 1\n```\n```\nobs = 2\n```").unwrap(), "obs = 1");
    }

    #[test]
    fn memory_program_skips_generation() {
        let p = AbstractionPrompt::implicit("", vec![ImplicitPair { task: "x".into(), program: "obs = task.upper()".into() }]);
        let gw = gateway(ScriptedBackend::new(8));
        let obs = abstract_implicit(&p, &task("go"), &RawState::new("<p/>", 0, 0), &gw, &AbstractionConfig::default()).unwrap();
        assert_eq!((obs.text.as_str(), obs.source), ("GO", ObservationSource::ImplicitProgram));
        assert_eq!(gw.completion_count(), 0);
    }

    #[test]
    fn generated_program_then_fallback() {
        let p = AbstractionPrompt::implicit(
            "Extract things.",
            vec![ImplicitPair { task: "x".into(), program: "obs = missing".into() }],
        );
        let gw = gateway(ScriptedBackend::new(8).with_record(substring("Now, write code"), "```\nobs = 'made'\n```"));
        let obs = abstract_implicit(&p, &task("go"), &RawState::new("<p/>", 0, 0), &gw, &AbstractionConfig::default()).unwrap();
        assert_eq!((obs.text.as_str(), obs.source), ("made", ObservationSource::ImplicitProgram));

        let gw = gateway(
            ScriptedBackend::new(8)
                .with_record(substring("Now, write code"), "```\nobs = 1 / 0\n```")
                .with_record(substring("Extract only the task-relevant"), "X"),
        );
        let obs = abstract_implicit(&p, &task("go"), &RawState::new("<p/>", 0, 0), &gw, &AbstractionConfig::default()).unwrap();
        assert_eq!((obs.text.as_str(), obs.source), ("X", ObservationSource::ZeroShotFallback));
    }

    #[test]
    fn zero_shot_wording() {
        let m = zero_shot_message(&task("Find it."), &RawState::new("<b>hi</b>", 0, 0));
        assert_eq!(
            m.content,
            "Extract only the task-relevant information from the following webpage state for the task: Find it.. State: <b>hi</b>. Observation:"
        );
    }
}
