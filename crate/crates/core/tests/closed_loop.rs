//! Scripted closed-loop episodes over the bundled environments.

mod support;

use std::sync::Arc;

use trajmem_core::env::{replay, EpisodeStatus, FlightEnv, TerminalEnv};
use trajmem_core::eval::{run_episode, run_episodes, EpisodeSummary};
use trajmem_core::ingest::{ingest_demos, parse_demos};
use trajmem_core::llm::{Matcher, Scope, ScriptedBackend};
use trajmem_core::{AgentConfig, Backend, DemoRecord, Gateway, MemoryIndex, ModelProfile, ObservationSource};

use support::*;

fn backend(script: &str) -> Arc<ScriptedBackend> {
    Arc::new(ScriptedBackend::from_yaml_str(&read(&format!("fixtures/scripts/{script}.yaml"))).unwrap())
}

fn memory(demos: &[DemoRecord], backend: Arc<dyn Backend>) -> MemoryIndex {
    let gw = Gateway::new(backend, ModelProfile::default());
    ingest_demos(demos, &gw, 64).unwrap()
}

fn shipped(name: &str) -> Vec<DemoRecord> {
    parse_demos(&read(&format!("fixtures/demos/{name}.jsonl"))).unwrap()
}

#[test]
fn terminal_seeds_all_succeed() {
    let b = backend("terminal");
    let mem = memory(&shipped("terminal"), b.clone());
    let seeds: Vec<u64> = (0..50).collect();
    let results = run_episodes("terminal", &seeds, &mem, b, &ModelProfile::default(), &AgentConfig::default(), 4).unwrap();
    let summary = EpisodeSummary::from_results("terminal", &results);
    assert_eq!(summary.successes, 50, "{:#?}", results.iter().find(|r| !r.success));
    for (r, seed) in results.iter().zip(&seeds) {
        assert_eq!(r.seed, *seed);
        assert_eq!(r.llm_calls, 2);
        assert_eq!(r.abstraction_calls, 2);
        assert_eq!(r.primitive_actions, 4);
        assert_eq!(r.retrieval.as_ref().unwrap().group_id, "terminal");
    }
}

#[test]
fn flight_seeds_all_succeed() {
    let b = backend("book_flight");
    let mem = memory(&shipped("book_flight"), b.clone());
    let seeds: Vec<u64> = (0..50).collect();
    let results = run_episodes("book-flight", &seeds, &mem, b, &ModelProfile::default(), &AgentConfig::default(), 3).unwrap();
    assert!(results.iter().all(|r| r.success), "{:#?}", results.iter().find(|r| !r.success).map(|r| &r.failure_reason));
    for r in &results {
        assert_eq!((r.llm_calls, r.abstraction_calls), (2, 1), "seed {}", r.seed);
        let steps = &r.trajectory.steps;
        assert_eq!(steps[1].observation.source, ObservationSource::ImplicitProgram);
    }
    let first = &results[0].trajectory.steps;
    assert_eq!(first[1].observation.text, "The price of the cheapest one-way flight is $65");
    assert_eq!(first[1].action_block.raw_text, "agent.click_xpath(\"//button[text()='Book flight for $65']\")");
}

#[test]
fn worker_count_does_not_change_results() {
    let b = backend("terminal");
    let mem = memory(&shipped("terminal"), b.clone());
    let seeds: Vec<u64> = (10..30).rev().collect();
    let one = run_episodes("terminal", &seeds, &mem, b.clone(), &ModelProfile::default(), &AgentConfig::default(), 1).unwrap();
    let many = run_episodes("terminal", &seeds, &mem, b, &ModelProfile::default(), &AgentConfig::default(), 8).unwrap();
    assert_eq!(one, many);
}

#[test]
fn recorded_trajectories_replay_to_success() {
    let b = backend("book_flight");
    let mem = memory(&shipped("book_flight"), b.clone());
    let gw = Gateway::new(b, ModelProfile::default());
    for seed in [0, 7, 19] {
        let mut env = FlightEnv::new();
        let r = run_episode(&mut env, seed, &mem, &gw, &AgentConfig::default()).unwrap();
        let mut fresh = FlightEnv::new();
        let (_, status) = replay(&mut fresh, seed, &r.trajectory).unwrap();
        assert_eq!(status, EpisodeStatus::Succeeded);
    }
}

#[test]
fn step_budget_stops_the_loop() {
    let b = backend("terminal");
    let mem = memory(&shipped("terminal"), b.clone());
    let gw = Gateway::new(b, ModelProfile::default());
    let cfg = AgentConfig {
        max_steps: 1,
        ..AgentConfig::default()
    };
    let r = run_episode(&mut TerminalEnv::new(), 3, &mem, &gw, &cfg).unwrap();
    assert!(!r.success);
    assert_eq!(r.failure_reason.as_deref(), Some("budget-exhausted"));
    assert_eq!(r.llm_calls, 1);
    let zero = AgentConfig {
        max_steps: 0,
        ..AgentConfig::default()
    };
    let r = run_episode(&mut TerminalEnv::new(), 3, &mem, &gw, &zero).unwrap();
    assert_eq!((r.llm_calls, r.failure_reason.as_deref()), (0, Some("budget-exhausted")));
}

#[test]
fn unknown_method_ends_the_episode() {
    let b = Arc::new(
        ScriptedBackend::new(64).with_record(
            Matcher::Substring {
                text: "Action:".into(),
                scope: Scope::Last,
            },
            "```\nagent.hover('x')\n```",
        ),
    );
    let gw = Gateway::new(b, ModelProfile::default());
    let r = run_episode(&mut TerminalEnv::new(), 0, &MemoryIndex::new(64), &gw, &AgentConfig::default()).unwrap();
    assert_eq!(r.failure_reason.as_deref(), Some("unknown-method"));
    assert_eq!(r.primitive_actions, 0);
    assert_eq!(r.steps_taken, 1);
    assert!(r.trajectory.steps.is_empty());
}

#[test]
fn wrong_deletion_is_a_task_failure() {
    let b = Arc::new(
        ScriptedBackend::new(64)
            .with_record(
                Matcher::Substring {
                    text: "index.rb media.html window.gpg</span>".into(),
                    scope: Scope::Last,
                },
                "```\nagent.type('rm index.rb')\nagent.press('enter')\n```",
            )
            .with_record(
                Matcher::Substring {
                    text: "Action:".into(),
                    scope: Scope::Last,
                },
                TERMINAL_LS,
            ),
    );
    let mut demos = shipped("terminal");
    for d in &mut demos {
        d.abstraction_prompts.clear();
    }
    let mem = memory(&demos, b.clone());
    let gw = Gateway::new(b, ModelProfile::default());
    let r = run_episode(&mut TerminalEnv::new(), 0, &mem, &gw, &AgentConfig::default()).unwrap();
    assert!(!r.success);
    assert!(r.failure_reason.as_deref().unwrap().starts_with("task-failed"), "{:?}", r.failure_reason);
}

#[test]
fn failing_memory_program_falls_back_to_zero_shot_once() {
    let mut script = ScriptBuilder::default();
    script.respond("for the task: Book", "The price of the cheapest one-way flight is $65");
    flight_records(&mut script, 0..1);
    let b = Arc::new(ScriptedBackend::from_yaml_str(&script.yaml(64)).unwrap());
    let mut demos = shipped("book_flight");
    for d in &mut demos {
        d.abstraction_prompts[1].implicit_pairs[0].program = "obs = 1 / 0".into();
    }
    let mem = memory(&demos, b.clone());
    let gw = Gateway::new(b.clone(), ModelProfile::default());
    let r = run_episode(&mut FlightEnv::new(), 0, &mem, &gw, &AgentConfig::default()).unwrap();
    assert!(r.success, "{:?}", r.failure_reason);
    let obs = &r.trajectory.steps[1].observation;
    assert_eq!(obs.source, ObservationSource::ZeroShotFallback);
    // explicit step 0, one failed generation attempt, one zero-shot call
    assert_eq!(r.abstraction_calls, 3);
    let zero_shot = b
        .requests()
        .iter()
        .filter(|q| q.messages.last().is_some_and(|m| m.content.contains("for the task: Book")))
        .count();
    assert_eq!(zero_shot, 1);
}
