use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::abstraction::dialect::Limits;
use crate::abstraction::{abstract_explicit, abstract_implicit, AbstractionConfig, AbstractionMode, AbstractionPrompt, DialectExecutor};
use crate::env::{self, EpisodeStatus, Environment};
use crate::grounding::parse_code_block;
use crate::llm::{Backend, Gateway, ModelProfile};
use crate::memory::{build_metadata_miniwob, resolve_majority, MemoryIndex};
use crate::model::{Observation, ObservationSource, Outcome, RawState, TaskSpec, Trajectory, DEFAULT_OBSERVATION_BUDGET};
use crate::prompting::{build_episode_prompt, build_system_prompt, CharHeuristic, PartialTrajectory, PromptMode, PromptOptions};

/// Closed-loop agent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Upper bound on action completions per episode.
    pub max_steps: u32,
    /// Entries retrieved before the majority vote.
    pub retrieve_n: usize,
    /// Token budget of each TaE prompt.
    pub prompt_budget: u64,
    pub observation_budget: usize,
    /// Token budget of abstraction prompts; unset means unchecked.
    pub abstraction_budget: Option<u64>,
    /// Interpreter step limit for abstraction programs.
    pub program_step_limit: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            max_steps: 10,
            retrieve_n: 3,
            prompt_budget: 16_384,
            observation_budget: DEFAULT_OBSERVATION_BUDGET,
            abstraction_budget: None,
            program_step_limit: Limits::default().max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalSummary {
    pub group_id: String,
    pub top1_distance: f64,
    pub exemplars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub seed: u64,
    pub success: bool,
    /// Action completions requested, including one whose reply failed to parse.
    pub steps_taken: u32,
    /// Completions that produced actions.
    pub llm_calls: u64,
    /// Completions spent on state abstraction.
    pub abstraction_calls: u64,
    pub primitive_actions: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<RetrievalSummary>,
    pub trajectory: Trajectory,
}

/// What retrieval hands the agent for one task.
struct Context<'m> {
    exemplars: Vec<Trajectory>,
    prompts: &'m [AbstractionPrompt],
}

fn retrieve<'m>(
    memory: &'m MemoryIndex,
    gateway: &Gateway,
    task: &TaskSpec,
    initial: &RawState,
    n: usize,
) -> Result<(Context<'m>, Option<RetrievalSummary>), EvalError> {
    if memory.is_empty() {
        return Ok((Context { exemplars: Vec::new(), prompts: &[] }, None));
    }
    let query = gateway.embed(&build_metadata_miniwob(task, initial))?;
    let results = memory.retrieve_topn(&query, n)?;
    let group = resolve_majority(&results)?;
    let nearest = results
        .iter()
        .find(|r| r.entry.group_id == group)
        .expect("the winning group has a result");
    let exemplars: Vec<Trajectory> = memory.group(group).flat_map(|e| e.exemplars.iter().cloned()).collect();
    let summary = RetrievalSummary {
        group_id: group.to_string(),
        top1_distance: results[0].distance,
        exemplars: exemplars.len(),
    };
    Ok((
        Context {
            exemplars,
            prompts: &nearest.entry.abstraction_prompts,
        },
        Some(summary),
    ))
}

/// Observation for step `step`, using the step's abstraction prompt (the
/// last one is reused for later steps) or the raw page when there is none.
fn observe(
    prompts: &[AbstractionPrompt],
    step: usize,
    task: &TaskSpec,
    state: &RawState,
    gateway: &Gateway,
    cfg: &AbstractionConfig<'_>,
) -> Result<Observation, EvalError> {
    let Some(prompt) = prompts.get(step.min(prompts.len().saturating_sub(1))) else {
        return Ok(Observation::new(state.html.clone(), ObservationSource::RawPassthrough, cfg.observation_budget));
    };
    Ok(match prompt.mode {
        AbstractionMode::Explicit => abstract_explicit(prompt, state, gateway, cfg)?,
        AbstractionMode::Implicit => abstract_implicit(prompt, task, state, gateway, cfg)?,
    })
}

/// Runs one episode: observe, prompt, complete, execute the whole action
/// block, repeat until the environment finishes or the step budget runs out.
pub fn run_episode(
    env: &mut dyn Environment,
    seed: u64,
    memory: &MemoryIndex,
    gateway: &Gateway,
    cfg: &AgentConfig,
) -> Result<EpisodeResult, EvalError> {
    let calls_before = gateway.completion_count();
    let (task, initial) = env.reset(seed)?;
    let mut result = EpisodeResult {
        task_id: task.id.clone(),
        seed,
        success: false,
        steps_taken: 0,
        llm_calls: 0,
        abstraction_calls: 0,
        primitive_actions: 0,
        failure_reason: None,
        retrieval: None,
        trajectory: Trajectory::new(task.clone()),
    };
    if cfg.max_steps == 0 {
        result.failure_reason = Some("budget-exhausted".into());
        result.trajectory.outcome = Outcome::Failure;
        return Ok(result);
    }

    let (context, summary) = retrieve(memory, gateway, &task, &initial, cfg.retrieve_n)?;
    result.retrieval = summary;
    let executor = DialectExecutor {
        limits: Limits { max_steps: cfg.program_step_limit },
    };
    let acfg = AbstractionConfig {
        observation_budget: cfg.observation_budget,
        token_budget: cfg.abstraction_budget,
        tokenizer: &CharHeuristic,
        executor: &executor,
    };
    let system = build_system_prompt(PromptMode::Miniwob);
    let opts = PromptOptions::new(PromptMode::Miniwob, cfg.prompt_budget);

    let first = observe(context.prompts, 0, &task, &initial, gateway, &acfg)?;
    let mut partial = PartialTrajectory::new(task.clone(), first);
    let mut failure = None;
    loop {
        if result.steps_taken >= cfg.max_steps {
            failure = Some("budget-exhausted".to_string());
            break;
        }
        let bundle = build_episode_prompt(&system, &context.exemplars, &partial, &opts)?;
        let stops: Vec<&str> = bundle.stop_tokens.iter().map(String::as_str).collect();
        let response = gateway.complete(&bundle.messages, &stops)?;
        result.steps_taken += 1;
        result.llm_calls += 1;
        let block = match parse_code_block(&response) {
            Ok(block) => block,
            Err(e) => {
                tracing::info!(task = %task.id, error = %e, "unparseable action response");
                failure = Some(e.kind().to_string());
                break;
            }
        };
        for action in &block.actions {
            if env.status().is_done() {
                break;
            }
            env.step(action)?;
            result.primitive_actions += 1;
        }
        match env.status() {
            EpisodeStatus::Succeeded => {
                partial.append_step(block, None)?;
                break;
            }
            EpisodeStatus::Failed { reason } => {
                partial.append_step(block, None)?;
                failure = Some(format!("task-failed: {reason}"));
                break;
            }
            EpisodeStatus::Running => {
                let state = env.state()?;
                let next = observe(context.prompts, partial.steps.len() + 1, &task, &state, gateway, &acfg)?;
                partial.append_step(block, Some(next))?;
            }
        }
    }
    result.success = failure.is_none() && env.status() == EpisodeStatus::Succeeded;
    result.failure_reason = failure;
    result.trajectory = partial.into_trajectory(if result.success { Outcome::Success } else { Outcome::Failure });
    result.abstraction_calls = gateway.completion_count() - calls_before - result.llm_calls;
    Ok(result)
}

/// Totals over a batch of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub env: String,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub llm_calls: u64,
    pub abstraction_calls: u64,
    pub primitive_actions: u64,
}

impl EpisodeSummary {
    pub fn from_results(env: &str, results: &[EpisodeResult]) -> Self {
        let successes = results.iter().filter(|r| r.success).count();
        Self {
            env: env.to_string(),
            episodes: results.len(),
            successes,
            success_rate: if results.is_empty() { 0.0 } else { successes as f64 / results.len() as f64 },
            llm_calls: results.iter().map(|r| r.llm_calls).sum(),
            abstraction_calls: results.iter().map(|r| r.abstraction_calls).sum(),
            primitive_actions: results.iter().map(|r| r.primitive_actions).sum(),
        }
    }
}

/// Runs `seeds` of environment `env_name` on up to `workers` threads.
///
/// Each worker owns its environment and gateway; `memory` is shared
/// read-only. Results come back in seed order whatever the scheduling.
pub fn run_episodes(
    env_name: &str,
    seeds: &[u64],
    memory: &MemoryIndex,
    backend: Arc<dyn Backend>,
    profile: &ModelProfile,
    cfg: &AgentConfig,
    workers: usize,
) -> Result<Vec<EpisodeResult>, EvalError> {
    env::by_name(env_name)?;
    let workers = workers.max(1).min(seeds.len().max(1));
    let chunks: Vec<Vec<(usize, u64)>> = (0..workers)
        .map(|w| seeds.iter().copied().enumerate().skip(w).step_by(workers).collect())
        .collect();
    let mut slots: Vec<Option<Result<EpisodeResult, EvalError>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let backend = Arc::clone(&backend);
                scope.spawn(move || {
                    let mut env = env::by_name(env_name).expect("checked above");
                    let gateway = Gateway::new(backend, profile.clone());
                    chunk
                        .into_iter()
                        .map(|(i, seed)| (i, run_episode(env.as_mut(), seed, memory, &gateway, cfg)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("episode worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every seed ran")).collect()
}
