//! Shipped fixture files stay in sync with their generators.
//! Run with `TRAJMEM_BLESS=1` to rewrite them.

mod support;

use trajmem_core::abstraction::{execute_program, AbstractionConfig, AbstractionProgram, ProgramOrigin};
use trajmem_core::env::{Environment, FlightEnv, FlightScenario, TerminalScenario};
use trajmem_core::grounding::parse_code_block;
use trajmem_core::ingest::parse_demos;
use trajmem_core::llm::ScriptedBackend;
use trajmem_core::{BenchmarkMode, ObservationSource, RawState, TaskSpec};

use support::*;

fn check_or_bless(rel: &str, generated: &str) {
    let path = root().join(rel);
    if std::env::var_os("TRAJMEM_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, generated).unwrap();
        return;
    }
    let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{rel}: {e}; rerun with TRAJMEM_BLESS=1"));
    assert!(on_disk == generated, "{rel} is stale; rerun with TRAJMEM_BLESS=1");
}

#[test]
fn shipped_files_match_generators() {
    check_or_bless("fixtures/demos/terminal.jsonl", &jsonl(&terminal_demos()));
    check_or_bless("fixtures/demos/book_flight.jsonl", &jsonl(&flight_demos()));
    check_or_bless("fixtures/demos/pack.jsonl", &jsonl(&demo_pack()));
    check_or_bless("fixtures/scripts/terminal.yaml", &terminal_script(0..50));
    check_or_bless("fixtures/scripts/book_flight.yaml", &flight_script(0..50));
    let m2w = static_fixture();
    check_or_bless("fixtures/mind2web/train.jsonl", &jsonl(&m2w.train));
    check_or_bless("fixtures/mind2web/test.jsonl", &jsonl(&m2w.test));
    check_or_bless("fixtures/scripts/mind2web.yaml", &static_oracle_script(&m2w));
    let (vote, vote_script) = vote_fixture();
    check_or_bless("fixtures/demos/vote.jsonl", &jsonl(&vote));
    check_or_bless("fixtures/scripts/vote.yaml", &vote_script);
    for (name, later) in [("terminal", ObservationSource::Explicit), ("book_flight", ObservationSource::ImplicitProgram)] {
        check_or_bless(&format!("fixtures/cli/{name}_exemplars.jsonl"), &exemplars_jsonl(name, later));
        for step in ["2", "4"] {
            let key = format!("current_step{step}");
            check_or_bless(&format!("fixtures/cli/{name}_step{step}_current.json"), &current_json(name, &key, later));
        }
    }
}

#[test]
fn shipped_files_parse() {
    for name in ["terminal", "book_flight", "pack"] {
        let demos = parse_demos(&read(&format!("fixtures/demos/{name}.jsonl"))).unwrap();
        assert!(!demos.is_empty());
        for d in &demos {
            d.trajectory.validate().unwrap();
        }
    }
    for name in ["terminal", "book_flight", "mind2web"] {
        ScriptedBackend::from_yaml_str(&read(&format!("fixtures/scripts/{name}.yaml"))).unwrap();
    }
    assert_eq!(parse_demos(&read("fixtures/demos/pack.jsonl")).unwrap().len(), 240);
}

#[test]
fn demo_initial_states_follow_recorded_pages() {
    let t = transcript("terminal");
    let demos = terminal_demos();
    assert_eq!(demos.len(), 3);
    for (i, d) in demos.iter().enumerate() {
        assert_eq!(d.initial_state.html, str_at(&t, &format!("/abstraction/0/pairs/{i}/state")));
    }
    let f = transcript("book_flight");
    let flights = flight_demos();
    assert_eq!(flights.len(), 5);
    assert_eq!(flights[0].initial_state.html, str_at(&f, "/abstraction/0/pairs/0/state"));
}

#[test]
fn generated_flight_script_matches_recorded_step() {
    let t = transcript("book_flight");
    let s = FlightScenario::for_seed(0);
    assert_eq!(flight_action_script(&s), str_at(&t, "/output_step2"));
    assert_eq!(flight_book_response(s.best().price), str_at(&t, "/output_step4"));
}

#[test]
fn generated_terminal_response_matches_recorded_step() {
    let t = transcript("terminal");
    let s = TerminalScenario::for_seed(0);
    assert_eq!(terminal_rm_response(&s), str_at(&t, "/output_step4"));
    assert_eq!(terminal_listing_observation(&s), str_at(&t, "/abstraction/1/output"));
    assert_eq!(terminal_first_observation(&s), str_at(&t, "/abstraction/0/output"));
}

#[test]
fn seed_listings_never_collide_with_demo_pages() {
    let t = transcript("terminal");
    let pages: Vec<String> = (0..3).map(|i| str_at(&t, &format!("/abstraction/1/pairs/{i}/state")).to_string()).collect();
    for seed in 1..50 {
        let s = TerminalScenario::for_seed(seed);
        let needle = format!(">{}</span>", s.listing());
        assert!(pages.iter().all(|p| !p.contains(&needle)), "seed {seed}");
    }
}

#[test]
fn generated_scripts_parse_as_action_blocks() {
    for seed in 0..50 {
        let f = FlightScenario::for_seed(seed);
        parse_code_block(&flight_action_script(&f)).unwrap();
        parse_code_block(&terminal_rm_response(&TerminalScenario::for_seed(seed))).unwrap();
    }
}

/// Drives the flight form to its results page by following the generated script.
fn results_page(seed: u64) -> (TaskSpec, RawState) {
    let mut env = FlightEnv::new();
    let (task, _) = env.reset(seed).unwrap();
    let s = FlightScenario::for_seed(seed);
    let block = parse_code_block(&flight_action_script(&s)).unwrap();
    for a in &block.actions {
        env.step(a).unwrap();
    }
    (task, env.state().unwrap())
}

#[test]
fn price_program_reads_results_pages() {
    let program = AbstractionProgram::new(&flight_program(), ProgramOrigin::Memory).unwrap();
    let cfg = AbstractionConfig::default();
    for seed in 0..50 {
        let (task, state) = results_page(seed);
        let s = FlightScenario::for_seed(seed);
        let obs = execute_program(&program, &task, &state, &cfg).unwrap();
        let expected = format!(
            "The price of the {} one-way flight is ${}",
            s.preference.as_str(),
            s.best().price
        );
        assert_eq!(obs.text, expected, "seed {seed}");
        let mut env = FlightEnv::new();
        env.reset(seed).unwrap();
        for a in &parse_code_block(&flight_action_script(&s)).unwrap().actions {
            env.step(a).unwrap();
        }
        let book = parse_code_block(&flight_book_response(s.best().price)).unwrap();
        env.step(&book.actions[0]).unwrap();
        assert!(matches!(env.status(), trajmem_core::env::EpisodeStatus::Succeeded), "seed {seed}");
    }
}

#[test]
fn price_program_is_task_generic() {
    let program = AbstractionProgram::new(&flight_program(), ProgramOrigin::Memory).unwrap();
    let html = r#"<div class="flight"><div class="time-duration">2h 5m</div><button class="flight-price" data-price="90">x</button></div><div class="flight"><div class="time-duration">1h 50m</div><button class="flight-price" data-price="120">x</button></div>"#;
    let state = RawState::new(html, 0, 0);
    let cfg = AbstractionConfig::default();
    let run = |d: &str| execute_program(&program, &TaskSpec::new("t", d, BenchmarkMode::Episodic), &state, &cfg).unwrap().text;
    assert_eq!(run("Book the cheapest one-way flight"), "The price of the cheapest one-way flight is $90");
    assert_eq!(run("Book the shortest one-way flight"), "The price of the shortest one-way flight is $120");
}
