//! Shared fixtures for integration tests: transcript loaders, generators for
//! the shipped demo and script files, and synthetic static datasets.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use trajmem_core::abstraction::ranking::RankedElement;
use trajmem_core::abstraction::{AbstractionPrompt, ExplicitPair, ImplicitPair};
use trajmem_core::codec::{to_canonical_string, SCHEMA_VERSION};
use trajmem_core::env::{FlightScenario, TerminalScenario, TerminalTarget};
use trajmem_core::eval::{GoldStep, Operation, Split, StaticRecord, StaticStep};
use trajmem_core::grounding::parse_code_block;
use trajmem_core::ingest::DemoRecord;
use trajmem_core::{
    Action, ActionBlock, BenchmarkMode, Observation, ObservationSource, Outcome, PartialTrajectory, RawState, Step,
    TaskSpec, Trajectory,
};

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn read(rel: &str) -> String {
    let path = root().join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn transcript(name: &str) -> Value {
    serde_json::from_str(&read(&format!("fixtures/transcripts/{name}.json"))).unwrap()
}

pub fn str_at<'a>(v: &'a Value, pointer: &str) -> &'a str {
    v.pointer(pointer).and_then(Value::as_str).unwrap_or_else(|| panic!("missing {pointer}"))
}

/// Source of the `i`-th observation: the first is explicit, later ones use
/// `later`.
fn source(i: usize, later: ObservationSource) -> ObservationSource {
    if i == 0 {
        ObservationSource::Explicit
    } else {
        later
    }
}

fn steps_from(v: &Value, later: ObservationSource) -> Vec<Step> {
    v["steps"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, s)| Step {
            observation: Observation::unbounded(s["observation"].as_str().unwrap(), source(i, later)),
            action_block: parse_code_block(s["response"].as_str().unwrap()).unwrap(),
        })
        .collect()
}

/// A transcript exemplar `{task, steps[{observation, response}]}` as a trajectory.
pub fn trajectory_from(id: &str, v: &Value, later: ObservationSource) -> Trajectory {
    Trajectory {
        task: TaskSpec::new(id, v["task"].as_str().unwrap(), BenchmarkMode::Episodic),
        steps: steps_from(v, later),
        outcome: Outcome::Success,
    }
}

pub fn exemplars(name: &str, later: ObservationSource) -> Vec<Trajectory> {
    let t = transcript(name);
    t["exemplars"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, e)| trajectory_from(&format!("{name}/demo-{i}"), e, later))
        .collect()
}

/// A transcript's current trajectory (`current_step2` / `current_step4`).
pub fn current(name: &str, key: &str, later: ObservationSource) -> PartialTrajectory {
    let t = transcript(name);
    let c = &t[key];
    let steps = steps_from(c, later);
    let pending = Observation::unbounded(c["pending"].as_str().unwrap(), source(steps.len(), later));
    PartialTrajectory {
        task: TaskSpec::new(format!("{name}/current"), c["task"].as_str().unwrap(), BenchmarkMode::Episodic),
        steps,
        pending: Some(pending),
    }
}

fn explicit_pairs(v: &Value, range: std::ops::Range<usize>) -> Vec<ExplicitPair> {
    v["pairs"].as_array().unwrap()[range]
        .iter()
        .map(|p| ExplicitPair {
            state: RawState::new(p["state"].as_str().unwrap(), 0, 0),
            observation: Observation::unbounded(p["observation"].as_str().unwrap(), ObservationSource::Explicit),
        })
        .collect()
}

/// A transcript abstraction step: its few-shot prompt and the current state.
pub fn abstraction_case(name: &str, index: usize) -> (AbstractionPrompt, RawState, String) {
    let t = transcript(name);
    let a = &t["abstraction"][index];
    let n = a["pairs"].as_array().unwrap().len();
    let current = RawState::new(str_at(a, &format!("/pairs/{}/state", n - 1)), 0, 0);
    (AbstractionPrompt::explicit(explicit_pairs(a, 0..n - 1)), current, a["output"].as_str().unwrap().to_string())
}

pub fn flight_program() -> String {
    read("fixtures/programs/flight_price.py")
}

fn demo(group: &str, initial: &str, trajectory: Trajectory, prompts: Vec<AbstractionPrompt>) -> DemoRecord {
    DemoRecord {
        schema_version: SCHEMA_VERSION,
        group_id: group.into(),
        initial_state: RawState::new(initial, 0, 0),
        trajectory,
        abstraction_prompts: prompts,
    }
}

/// The three terminal demonstrations, each carrying the step-0 and step-1
/// explicit abstraction prompts.
pub fn terminal_demos() -> Vec<DemoRecord> {
    let t = transcript("terminal");
    let prompts = vec![
        AbstractionPrompt::explicit(explicit_pairs(&t["abstraction"][0], 0..3)),
        AbstractionPrompt::explicit(explicit_pairs(&t["abstraction"][1], 0..3)),
    ];
    exemplars("terminal", ObservationSource::Explicit)
        .into_iter()
        .enumerate()
        .map(|(i, traj)| {
            let initial = str_at(&t, &format!("/abstraction/0/pairs/{i}/state")).to_string();
            demo("terminal", &initial, traj, prompts.clone())
        })
        .collect()
}

/// The flight form for `description`, rendered from the recorded template.
fn flight_form(template: &str, description: &str) -> String {
    let re = regex::Regex::new(r"^Book the (\w+) one-way flight from: (.+) to: (.+) on (\S+)\.$").unwrap();
    let c = re.captures(description).unwrap_or_else(|| panic!("{description}"));
    let query = format!(
        "<div id=\"query\">Book the <span class=\"bold\">{}</span> one-way flight from: <span class=\"bold\">{}</span> to: <span class=\"bold\">{}</span> on <span class=\"bold\">{}</span>.</div>",
        &c[1], &c[2], &c[3], &c[4]
    );
    let start = template.find("<div id=\"query\">").unwrap();
    let end = start + template[start..].find("</div>").unwrap() + "</div>".len();
    format!("{}{}{}", &template[..start], query, &template[end..])
}

/// The five flight demonstrations. Step 0 is abstracted explicitly, later
/// steps by the shipped price program.
pub fn flight_demos() -> Vec<DemoRecord> {
    let t = transcript("book_flight");
    let template = str_at(&t, "/abstraction/0/pairs/0/state").to_string();
    let explicit = AbstractionPrompt::explicit(explicit_pairs(&t["abstraction"][0], 0..2));
    exemplars("book_flight", ObservationSource::ImplicitProgram)
        .into_iter()
        .map(|traj| {
            let implicit = AbstractionPrompt::implicit(
                "",
                vec![ImplicitPair {
                    task: traj.task.description.clone(),
                    program: flight_program(),
                }],
            );
            let initial = flight_form(&template, &traj.task.description);
            demo("book-flight", &initial, traj, vec![explicit.clone(), implicit])
        })
        .collect()
}

pub const FAMILIES: [&str; 48] = [
    "click-button", "click-button-sequence", "click-checkboxes", "click-checkboxes-large", "click-collapsible",
    "click-collapsible-2", "click-color", "click-dialog", "click-dialog-2", "click-link", "click-menu",
    "click-option", "click-scroll-list", "click-shades", "click-shape", "click-tab", "click-tab-2",
    "click-test", "click-test-2", "click-widget", "count-shape", "email-inbox", "email-inbox-forward-nl",
    "enter-date", "enter-password", "enter-text", "enter-text-dynamic", "enter-time", "find-word",
    "focus-text", "focus-text-2", "grid-coordinate", "guess-number", "identify-shape", "login-user",
    "login-user-popup", "navigate-tree", "search-engine", "simple-algebra", "simple-arithmetic",
    "social-media", "social-media-all", "terminal", "text-transform", "tic-tac-toe", "unicode-test",
    "use-autocomplete", "use-spinner",
];

/// 48 families with 5 seeded single-step demonstrations each.
pub fn demo_pack() -> Vec<DemoRecord> {
    let mut out = Vec::with_capacity(240);
    for family in FAMILIES {
        for seed in 0..5u64 {
            let description = format!("Complete the {family} task, variant {seed}.");
            let initial = format!(
                "<div id=\"wrap\"><div id=\"query\">{description}</div><div id=\"area\"><button id=\"go-{seed}\">Go</button></div></div>"
            );
            let xpath = format!("//*[@id='go-{seed}']");
            let raw = format!("agent.click_xpath(\"{xpath}\")");
            let mut traj = Trajectory::new(TaskSpec::new(format!("{family}/{seed}"), description, BenchmarkMode::Episodic));
            traj.steps.push(Step {
                observation: Observation::unbounded(initial.clone(), ObservationSource::RawPassthrough),
                action_block: ActionBlock::new(vec![Action::ClickXpath { xpath }], raw, Vec::new()).unwrap(),
            });
            traj.outcome = Outcome::Success;
            out.push(demo(family, &initial, traj, Vec::new()));
        }
    }
    out
}

pub fn jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|i| to_canonical_string(i) + "\n").collect()
}

#[derive(Serialize)]
struct ScriptFile {
    default_dim: usize,
    responses: Vec<ResponseOut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    embeddings: Vec<EmbeddingOut>,
}

#[derive(Serialize)]
struct ResponseOut {
    #[serde(rename = "match")]
    matcher: MatchOut,
    response: String,
}

#[derive(Serialize)]
struct MatchOut {
    substring: String,
    scope: &'static str,
}

#[derive(Serialize)]
struct EmbeddingOut {
    text: String,
    vector: Vec<f32>,
}

/// Substring-matched scripts; records are tried in insertion order.
#[derive(Default)]
pub struct ScriptBuilder {
    records: Vec<(String, String)>,
    embeddings: Vec<(String, Vec<f32>)>,
}

impl ScriptBuilder {
    pub fn respond(&mut self, needle: impl Into<String>, response: impl Into<String>) -> &mut Self {
        self.records.push((needle.into(), response.into()));
        self
    }

    pub fn embed(&mut self, text: impl Into<String>, vector: Vec<f32>) -> &mut Self {
        self.embeddings.push((text.into(), vector));
        self
    }

    pub fn yaml(&self, default_dim: usize) -> String {
        let file = ScriptFile {
            default_dim,
            responses: self
                .records
                .iter()
                .map(|(n, r)| ResponseOut {
                    matcher: MatchOut {
                        substring: n.clone(),
                        scope: "last",
                    },
                    response: r.clone(),
                })
                .collect(),
            embeddings: self
                .embeddings
                .iter()
                .map(|(t, v)| EmbeddingOut {
                    text: t.clone(),
                    vector: v.clone(),
                })
                .collect(),
        };
        serde_yaml::to_string(&file).unwrap()
    }
}

fn join_names(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn terminal_rm_response(s: &TerminalScenario) -> String {
    let reason = match &s.target {
        TerminalTarget::Extension(ext) => format!("{} is the file ending with the extension .{ext}.", s.answer),
        TerminalTarget::NoExtension => {
            let others: Vec<&str> = s.files.iter().map(String::as_str).filter(|f| *f != s.answer).collect();
            format!("{} is the file that has no file extension while {} are not.", s.answer, join_names(&others))
        }
    };
    format!(
        "```\n# Note that it is not allowed to use *.xxx here.\n# {reason} Type the complete filename.\nagent.type('rm {}')\nagent.press('enter')\n```",
        s.answer
    )
}

pub fn terminal_first_observation(s: &TerminalScenario) -> String {
    let d = s.description();
    if d.ends_with('.') {
        d
    } else {
        d + "."
    }
}

pub fn terminal_listing_observation(s: &TerminalScenario) -> String {
    format!("{}\nuser$ ls\n{}", s.description(), s.listing())
}

pub const TERMINAL_LS: &str = "```\nagent.type('ls')\nagent.press('enter')\n```";

/// Scripted model for terminal seeds: two abstraction answers and one
/// `rm` per seed, then a catch-all `ls`.
pub fn terminal_script(seeds: std::ops::Range<u64>) -> String {
    let mut b = ScriptBuilder::default();
    for seed in seeds.clone() {
        let s = TerminalScenario::for_seed(seed);
        b.respond(
            format!("Last login: {}</span>\n</div><div class=\"terminal-line\" data-wob_ref=\"12\"", s.last_login),
            terminal_first_observation(&s),
        );
        b.respond(format!(">{}</span>", s.listing()), terminal_listing_observation(&s));
    }
    for seed in seeds {
        let s = TerminalScenario::for_seed(seed);
        b.respond(format!("{}\nAction:", s.listing()), terminal_rm_response(&s));
    }
    b.respond("Action:", TERMINAL_LS);
    b.yaml(64)
}

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

pub fn flight_observation(s: &FlightScenario) -> String {
    let (a, b) = (&s.from, &s.to);
    let note = |p: &trajmem_core::env::Place| {
        if p.by_code {
            format!("{} is an airport code.", p.typed_text())
        } else {
            format!("{} is not an airport code.", p.typed_text())
        }
    };
    let notes = if a.by_code && b.by_code {
        format!("{} and {} are airport codes.", a.typed_text(), b.typed_text())
    } else {
        format!("{} {}", note(a), note(b))
    };
    format!(
        "Type the flight from: '{}' to: '{}' ({notes}), and select the date {}.",
        a.typed_text(),
        b.typed_text(),
        s.date_text()
    )
}

fn type_lines(out: &mut String, field: &str, place: &trajmem_core::env::Place) {
    let comment = if place.by_code {
        "  # For the airport code, you must use parentheses"
    } else {
        ""
    };
    out.push_str(&format!(
        "agent.click_xpath(\"//*[@id='{field}']\")\nagent.type(\"{}\"){comment}\nagent.press(\"arrowdown\")\nagent.press(\"enter\")\n",
        place.typed_text()
    ));
}

/// The form-filling script in the style of the recorded exemplars.
pub fn flight_action_script(s: &FlightScenario) -> String {
    let mut out = format!("```\n# Type the flight from: '{}' to: '{}'\n", s.from.typed_text(), s.to.typed_text());
    type_lines(&mut out, "flight-from", &s.from);
    type_lines(&mut out, "flight-to", &s.to);
    out.push_str(&format!("# Select the date {}\n", s.date_text()));
    out.push_str("agent.click_xpath(\"//*[@id='datepicker']\")\n");
    let n = s.months_back();
    let head = format!("# Current date: 12/31/2016 (December-{}={n}). ", MONTHS[s.month as usize - 1]);
    let prev = "agent.click_xpath(\"//*[@title='Prev']\")";
    match n {
        0 => out.push_str(&format!("{head}No need to click on 'Prev'\n")),
        1 => out.push_str(&format!("{head}Click on 'Prev' once\n{prev}\n")),
        2 => out.push_str(&format!("{head}Click on 'Prev' twice\nfor _ in range(2):\n    {prev}\n")),
        n => out.push_str(&format!("{head}Click on 'Prev' {n} times\nfor _ in range({n}):\n    {prev}\n")),
    }
    out.push_str(&format!("# Click on the date '{}'\n", s.day));
    out.push_str(&format!("agent.click_xpath(\"//a[text()='{}']\")\n", s.day));
    out.push_str("agent.click_xpath(\"//*[@id='search']\")\n```");
    out
}

pub fn flight_book_response(price: u32) -> String {
    format!("```\nagent.click_xpath(\"//button[text()='Book flight for ${price}']\")\n```")
}

fn flight_query_html(s: &FlightScenario) -> String {
    format!(
        "<div id=\"query\">Book the <span class=\"bold\">{}</span> one-way flight from: <span class=\"bold\">{}</span> to: <span class=\"bold\">{}</span> on <span class=\"bold\">{}</span>.</div>",
        s.preference.as_str(),
        s.from.task_text(),
        s.to.task_text(),
        s.date_text()
    )
}

/// Scripted model for flight seeds. The results page is abstracted by the
/// stored program, so only three kinds of record are needed.
pub fn flight_script(seeds: std::ops::Range<u64>) -> String {
    let mut b = ScriptBuilder::default();
    flight_records(&mut b, seeds);
    b.yaml(64)
}

pub fn flight_records(b: &mut ScriptBuilder, seeds: std::ops::Range<u64>) {
    let scenarios: Vec<FlightScenario> = seeds.map(FlightScenario::for_seed).collect();
    for s in &scenarios {
        b.respond(flight_query_html(s), flight_observation(s));
    }
    for s in &scenarios {
        b.respond(format!("{}\nAction:", flight_observation(s)), flight_action_script(s));
    }
    let mut prices: Vec<u32> = scenarios.iter().map(|s| s.best().price).collect();
    prices.sort_unstable();
    prices.dedup();
    for p in prices {
        b.respond(format!("one-way flight is ${p}\nAction:"), flight_book_response(p));
    }
}

// Static (id-dialect) datasets.

pub const M2W_DIM: usize = 16;

fn noise(rng: &mut ChaCha8Rng, scale: f32) -> Vec<f32> {
    (0..M2W_DIM).map(|_| rng.random_range(-1.0f32..1.0) * scale).collect()
}

fn add(a: &[f32], b: &[f32]) -> Vec<f32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

const LABELS: [&str; 12] = [
    "Search", "Sign in", "Cart", "Deals", "Flights", "Hotels", "Checkout", "Filter", "Sort by price", "Help", "Menu",
    "Continue",
];

fn ranking(rng: &mut ChaCha8Rng, base_id: u64, target_rank: usize, len: usize) -> (Vec<RankedElement>, u64) {
    let mut elements = Vec::with_capacity(len);
    let target = base_id + target_rank as u64;
    for r in 0..len {
        let id = base_id + r as u64;
        let tag = if rng.random_bool(0.5) { "button" } else { "a" };
        let label = LABELS[rng.random_range(0..LABELS.len())];
        elements.push(RankedElement {
            element_id: id,
            score: ((len - r) as f64) / len as f64,
            snippet: format!("<{tag} id={id}> {label} </{tag}>"),
        });
    }
    (elements, target)
}

fn task(id: &str, website: &str, domain: &str, description: &str) -> TaskSpec {
    TaskSpec::new(id, description, BenchmarkMode::StaticDataset)
        .with_field("website", website)
        .with_field("domain", domain)
        .with_field("description", description)
}

fn gold(rng: &mut ChaCha8Rng, element_id: u64) -> GoldStep {
    match rng.random_range(0..4) {
        0 => GoldStep {
            element_id,
            operation: Operation::Type,
            value: Some(format!("query {element_id}")),
        },
        1 => GoldStep {
            element_id,
            operation: Operation::Select,
            value: Some("2 adults".into()),
        },
        _ => GoldStep {
            element_id,
            operation: Operation::Click,
            value: None,
        },
    }
}

fn record(rng: &mut ChaCha8Rng, index: u64, t: TaskSpec, split: Split) -> StaticRecord {
    let steps = (0..rng.random_range(2..=4))
        .map(|s| {
            let rank = rng.random_range(0..3);
            let (ranking, target) = ranking(rng, 100_000 * (index + 1) + 100 * s, rank, 20);
            StaticStep {
                ranking,
                gold: gold(rng, target),
            }
        })
        .collect();
    StaticRecord { task: t, split, steps }
}

/// Training and test records of a three-split synthetic dataset, with
/// planted metadata embeddings: test tasks sit near a training website
/// (cross-task), near a training domain (cross-website) or far from both
/// (cross-domain).
pub struct StaticFixture {
    pub train: Vec<StaticRecord>,
    pub test: Vec<StaticRecord>,
    pub embeddings: Vec<(String, Vec<f32>)>,
}

pub fn static_fixture() -> StaticFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5717);
    let domains = ["Travel", "Shopping", "Entertainment"];
    let centers: Vec<Vec<f32>> = domains.iter().map(|_| noise(&mut rng, 3.0)).collect();
    let sites: [(&str, usize); 6] = [
        ("skyways", 0),
        ("staybook", 0),
        ("megamart", 1),
        ("gadgethub", 1),
        ("railgo", 0),
        ("boxoffice", 2),
    ];
    let site_centers: Vec<Vec<f32>> = sites.iter().map(|(_, d)| add(&centers[*d], &noise(&mut rng, 1.2))).collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut embeddings = Vec::new();
    let mut index = 0u64;
    let mut push = |rng: &mut ChaCha8Rng, out: &mut Vec<StaticRecord>, site: usize, split: Split, n: usize, spread: f32| {
        for j in 0..n {
            let (website, d) = sites[site];
            let kind = if out.is_empty() && split == Split::CrossTask { "train" } else { split.as_str() };
            let id = format!("{website}/{kind}-{index}");
            let description = format!("Task {j} on {website} ({})", if spread < 0.0 { "train" } else { split.as_str() });
            let t = task(&id, website, domains[d], &description);
            let metadata = trajmem_core::memory::build_metadata_mind2web(&t).unwrap();
            let vector = add(&site_centers[site], &noise(rng, spread.abs()));
            embeddings.push((metadata, vector));
            out.push(record(rng, index, t, split));
            index += 1;
        }
    };
    for site in 0..4 {
        push(&mut rng, &mut train, site, Split::CrossTask, 3, -0.3);
    }
    for site in 0..4 {
        push(&mut rng, &mut test, site, Split::CrossTask, 1, 0.3);
    }
    push(&mut rng, &mut test, 4, Split::CrossWebsite, 3, 0.3);
    push(&mut rng, &mut test, 5, Split::CrossDomain, 3, 0.3);
    StaticFixture { train, test, embeddings }
}

/// Script answering every test step with the gold action; embeddings planted.
pub fn static_oracle_script(fixture: &StaticFixture) -> String {
    let mut b = ScriptBuilder::default();
    for r in &fixture.test {
        for s in &r.steps {
            let obs = trajmem_core::abstraction::filter_topk(&s.ranking, 5).unwrap();
            b.respond(format!("`{}`", obs.text), trajmem_core::eval::render_m2w(&s.gold));
        }
    }
    for (t, v) in &fixture.embeddings {
        b.embed(t.clone(), v.clone());
    }
    b.yaml(M2W_DIM)
}

/// 100 ranked steps whose targets sit at planted ranks: 53 within the top
/// 5, 33 more within the top 50, and 14 beyond.
pub fn recall_fixture() -> Vec<(Vec<RankedElement>, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2ec4);
    let mut ranks = Vec::with_capacity(100);
    ranks.extend((0..53).map(|i| i % 5));
    ranks.extend((0..33).map(|i| 5 + (i * 7) % 45));
    ranks.extend((0..14).map(|i| 50 + (i * 3) % 20));
    ranks
        .into_iter()
        .enumerate()
        .map(|(i, rank)| ranking(&mut rng, 1_000 * i as u64, rank, 75))
        .collect()
}

// Property-test strategies.

pub mod strategies {
    use proptest::prelude::*;
    use trajmem_core::model::PRESS_KEYS;
    use trajmem_core::{
        Action, ActionBlock, BenchmarkMode, Observation, ObservationSource, Outcome, Step, TaskSpec, Trajectory,
    };

    fn text() -> impl Strategy<Value = String> {
        "\\PC{0,24}"
    }

    pub fn action() -> impl Strategy<Value = Action> {
        prop_oneof![
            text().prop_map(|xpath| Action::ClickXpath { xpath }),
            text().prop_map(|characters| Action::Type { characters }),
            proptest::sample::select(PRESS_KEYS.to_vec()).prop_map(|k| Action::Press { key: k.to_string() }),
            text().prop_map(|xpath| Action::ClickOption { xpath }),
            text().prop_map(|xpath| Action::MoveMouse { xpath }),
            any::<u64>().prop_map(|id| Action::Click { id }),
            (any::<u64>(), text()).prop_map(|(id, value)| Action::TypeById { id, value }),
            (any::<u64>(), text()).prop_map(|(id, value)| Action::SelectById { id, value }),
        ]
    }

    fn source() -> impl Strategy<Value = ObservationSource> {
        proptest::sample::select(vec![
            ObservationSource::Explicit,
            ObservationSource::ImplicitProgram,
            ObservationSource::ZeroShotFallback,
            ObservationSource::TopkFilter,
            ObservationSource::RawPassthrough,
        ])
    }

    fn step() -> impl Strategy<Value = Step> {
        (
            text(),
            source(),
            any::<bool>(),
            proptest::collection::vec(action(), 1..5),
            text(),
            proptest::collection::vec(text(), 0..3),
        )
            .prop_map(|(obs, source, truncated, actions, raw, comments)| Step {
                observation: Observation {
                    text: obs,
                    source,
                    truncated,
                },
                action_block: ActionBlock::new(actions, raw, comments).unwrap(),
            })
    }

    pub fn trajectory() -> impl Strategy<Value = Trajectory> {
        (
            text(),
            "\\PC{1,40}",
            any::<bool>(),
            proptest::collection::btree_map("[a-z]{1,8}", text(), 0..3),
            proptest::collection::vec(step(), 0..5),
            proptest::sample::select(vec![Outcome::Success, Outcome::Failure, Outcome::Unknown]),
        )
            .prop_map(|(id, description, static_mode, fields, steps, outcome)| {
                let mode = if static_mode {
                    BenchmarkMode::StaticDataset
                } else {
                    BenchmarkMode::Episodic
                };
                let mut task = TaskSpec::new(id, description, mode);
                task.metadata_fields = fields;
                Trajectory { task, steps, outcome }
            })
    }
}

/// Hand-built metrics dataset: ten tasks of five TYPE steps. Six steps target
/// the wrong element and five more carry a wrong value, so element accuracy
/// is 44/50, step success 39/50 and four tasks are fully correct. Half the
/// exact steps differ from gold only in case and surrounding whitespace.
pub struct PlantedMetrics {
    pub preds: Vec<Option<Action>>,
    pub golds: Vec<GoldStep>,
    pub task_sizes: Vec<usize>,
}

pub const PLANTED_ELE_ACC: f64 = 0.88;
pub const PLANTED_STEP_SR: f64 = 0.78;
pub const PLANTED_SR: f64 = 0.4;

pub fn planted_metrics() -> PlantedMetrics {
    let wrong_el = [0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
    let wrong_val = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    for t in 0..10usize {
        for s in 0..5usize {
            let id = (100 * t + s) as u64;
            golds.push(GoldStep {
                element_id: id,
                operation: Operation::Type,
                value: Some("Query".into()),
            });
            let (pid, value) = if s < wrong_el[t] {
                (id + 50, "Query")
            } else if s < wrong_el[t] + wrong_val[t] {
                (id, "other")
            } else if s % 2 == 0 {
                (id, "  query ")
            } else {
                (id, "Query")
            };
            preds.push(Some(Action::TypeById {
                id: pid,
                value: value.into(),
            }));
        }
    }
    PlantedMetrics {
        preds,
        golds,
        task_sizes: vec![5; 10],
    }
}

/// Exemplars of a transcript as trajectory JSONL, as read by `prompt`.
pub fn exemplars_jsonl(name: &str, later: ObservationSource) -> String {
    exemplars(name, later)
        .iter()
        .map(|t| String::from_utf8(trajmem_core::codec::serialize_trajectory(t)).unwrap())
        .collect()
}

pub fn current_json(name: &str, key: &str, later: ObservationSource) -> String {
    to_canonical_string(&current(name, key, later)) + "\n"
}

/// Three demos whose planted keys sit at distances 1, 1.5 and 2 from the
/// query "pick a date": enter-date, click-button, enter-date.
pub fn vote_fixture() -> (Vec<DemoRecord>, String) {
    let mut b = ScriptBuilder::default();
    let mut demos = Vec::new();
    for (i, (group, x)) in [("enter-date", 1.0f32), ("enter-date", 2.0), ("click-button", 1.5)].into_iter().enumerate() {
        let description = format!("Demo {i} for {group}.");
        let initial = format!("<div id=\"query\">{description}</div>");
        let xpath = "//*[@id='query']".to_string();
        let mut traj = Trajectory::new(TaskSpec::new(format!("{group}/{i}"), description, BenchmarkMode::Episodic));
        traj.steps.push(Step {
            observation: Observation::unbounded(initial.clone(), ObservationSource::RawPassthrough),
            action_block: ActionBlock::new(vec![Action::ClickXpath { xpath: xpath.clone() }], format!("agent.click_xpath(\"{xpath}\")"), vec![])
                .unwrap(),
        });
        traj.outcome = Outcome::Success;
        b.embed(trajmem_core::memory::build_metadata_miniwob(&traj.task, &RawState::new(initial.clone(), 0, 0)), vec![x, 0.0]);
        demos.push(demo(group, &initial, traj, Vec::new()));
    }
    b.embed("pick a date", vec![0.0, 0.0]);
    (demos, b.yaml(2))
}
