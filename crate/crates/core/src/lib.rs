//! Retrieval-augmented web agent toolkit.
//!
//! Successful demonstrations are stored in an [`memory::MemoryIndex`] keyed
//! by task metadata. At run time the nearest group supplies whole
//! trajectories as few-shot exemplars ([`prompting`]) and the prompts used
//! to condense raw pages into short observations ([`abstraction`]). Model
//! responses are turned into primitive actions by [`grounding`], and
//! [`eval`] drives episodes against the built-in [`env`] state machines or
//! scores static datasets.

pub mod abstraction;
pub mod codec;
pub mod env;
pub mod eval;
pub mod grounding;
pub mod html;
pub mod ingest;
pub mod llm;
pub mod memory;
pub mod model;
pub mod prompting;

pub use abstraction::{AbstractionMode, AbstractionPrompt, ExplicitPair, ImplicitPair};
pub use eval::{AgentConfig, EpisodeResult, EvalReport, StaticConfig, StaticRecord};
pub use ingest::DemoRecord;
pub use llm::{Backend, Gateway, ModelProfile};
pub use memory::{EmbeddingVector, MemoryEntry, MemoryIndex, RetrievalResult};
pub use model::{
    Action, ActionBlock, BenchmarkMode, Observation, ObservationSource, Outcome, RawState, Step, TaskSpec, Trajectory,
};
pub use prompting::{ChatMessage, PartialTrajectory, PromptBundle, PromptMode, Role};
