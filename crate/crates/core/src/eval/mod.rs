//! Closed-loop episodes and static-dataset scoring.

mod episode;
pub mod metrics;
mod static_eval;

use thiserror::Error;

use crate::abstraction::{AbstractionError, RankingError};
use crate::env::EnvError;
use crate::llm::LlmError;
use crate::memory::MemoryError;
use crate::prompting::PromptError;

pub use episode::{run_episode, run_episodes, AgentConfig, EpisodeResult, EpisodeSummary, RetrievalSummary};
pub use metrics::{
    element_accuracy, step_correct, step_success_rate, task_success_rate, GoldStep, MetricsError, Operation, ValueMatch,
};
pub use static_eval::{
    check_split_isolation, evaluate_static, record_to_exemplar, render_m2w, render_table, EvalReport, Split,
    SplitReport, StaticConfig, StaticRecord, StaticStep,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("test task {0} has the same metadata as a memory entry")]
    SplitLeakage(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("record {0} has no steps")]
    EmptyRecord(String),
}

impl EvalError {
    /// True when the failure came from the model backend.
    pub fn is_backend(&self) -> bool {
        matches!(self, EvalError::Llm(_) | EvalError::Abstraction(AbstractionError::Llm(_)))
    }
}
