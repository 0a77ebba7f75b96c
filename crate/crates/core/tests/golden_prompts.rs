//! Byte-level checks of assembled prompts against recorded goldens.

mod support;

use serde_json::Value;
use trajmem_core::abstraction::explicit_messages;
use trajmem_core::codec::to_canonical_string;
use trajmem_core::prompting::{build_episode_prompt, build_system_prompt, PromptOptions};
use trajmem_core::{ObservationSource, PromptMode};

use support::*;

fn golden(name: &str) -> String {
    read(&format!("fixtures/prompts/{name}.golden.json")).trim_end().to_string()
}

fn episode_case(transcript_name: &str, key: &str, later: ObservationSource, golden_name: &str) {
    let exemplars = exemplars(transcript_name, later);
    let current = current(transcript_name, key, later);
    let system = build_system_prompt(PromptMode::Miniwob);
    let bundle = build_episode_prompt(&system, &exemplars, &current, &PromptOptions::new(PromptMode::Miniwob, 16_384)).unwrap();
    assert_eq!(to_canonical_string(&bundle), golden(golden_name), "{golden_name}");
    assert!(bundle.truncation_log.is_empty());
}

#[test]
fn terminal_episode_prompts() {
    episode_case("terminal", "current_step2", ObservationSource::Explicit, "terminal_step2");
    episode_case("terminal", "current_step4", ObservationSource::Explicit, "terminal_step4");
}

#[test]
fn flight_episode_prompts() {
    episode_case("book_flight", "current_step2", ObservationSource::ImplicitProgram, "book_flight_step2");
    episode_case("book_flight", "current_step4", ObservationSource::ImplicitProgram, "book_flight_step4");
}

fn abstraction_case_matches(transcript_name: &str, index: usize, golden_name: &str) {
    let (prompt, state, output) = abstraction_case(transcript_name, index);
    let g: Value = serde_json::from_str(&golden(golden_name)).unwrap();
    let messages = explicit_messages(&prompt, &state);
    assert_eq!(serde_json::to_value(&messages).unwrap(), g["messages"], "{golden_name}");
    assert_eq!(g["output"].as_str().unwrap(), output);
}

#[test]
fn abstraction_prompts() {
    abstraction_case_matches("terminal", 0, "terminal_step1_abstraction");
    abstraction_case_matches("terminal", 1, "terminal_step3_abstraction");
    abstraction_case_matches("book_flight", 0, "book_flight_step1_abstraction");
}

#[test]
fn system_prompts_match_recorded_text() {
    let g: Value = serde_json::from_str(&golden_file("system_prompts")).unwrap();
    for (key, mode) in [("miniwob", PromptMode::Miniwob), ("mind2web", PromptMode::Mind2web)] {
        assert_eq!(build_system_prompt(mode).content, g[key].as_str().unwrap(), "{key}");
    }
}

fn golden_file(name: &str) -> String {
    read(&format!("fixtures/prompts/{name}.json"))
}

#[test]
fn truncation_drops_trailing_exemplars() {
    let exemplars = exemplars("terminal", ObservationSource::Explicit);
    let current = current("terminal", "current_step4", ObservationSource::Explicit);
    let system = build_system_prompt(PromptMode::Miniwob);
    let full = build_episode_prompt(&system, &exemplars, &current, &PromptOptions::new(PromptMode::Miniwob, 16_384)).unwrap();
    let tight = build_episode_prompt(&system, &exemplars, &current, &PromptOptions::new(PromptMode::Miniwob, full.token_estimate - 1))
        .unwrap();
    assert_eq!(tight.truncation_log, vec!["terminal/demo-2".to_string()]);
    assert!(tight.token_estimate < full.token_estimate);
    assert_eq!(tight.messages.last(), full.messages.last());
}
