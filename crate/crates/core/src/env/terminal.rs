use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{escape, ignored, ActionEffect, EnvError, Environment, EpisodeStatus};
use crate::model::{Action, BenchmarkMode, RawState, TaskSpec};

const STEMS: [&str; 24] = [
    "alloy", "script", "shark", "sudo", "bash", "image", "nintendo", "encrypted", "chrome", "search", "index", "media",
    "window", "kernel", "budget", "notes", "backup", "invoice", "photo", "driver", "report", "tiger", "config", "maple",
];

const EXTENSIONS: [&str; 12] = ["png", "zip", "html", "gpg", "gif", "py", "sh", "txt", "rb", "jpg", "json", "md"];

const WEEKDAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const MONTHS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminalTarget {
    Extension(String),
    NoExtension,
}

/// Everything a seed decides about a terminal episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalScenario {
    pub target: TerminalTarget,
    pub files: Vec<String>,
    /// The one file whose deletion solves the task.
    pub answer: String,
    pub last_login: String,
}

impl TerminalScenario {
    pub fn for_seed(seed: u64) -> Self {
        if seed == 0 {
            return Self {
                target: TerminalTarget::Extension("gpg".into()),
                files: vec!["index.rb".into(), "media.html".into(), "window.gpg".into()],
                answer: "window.gpg".into(),
                last_login: "Sun Sep 24 2023".into(),
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e72_0001);
        let count = rng.random_range(3..=4);
        let mut stems: Vec<&str> = STEMS.to_vec();
        stems.shuffle(&mut rng);
        let mut exts: Vec<&str> = EXTENSIONS.to_vec();
        exts.shuffle(&mut rng);
        let no_extension = rng.random_bool(0.25);
        let answer_slot = rng.random_range(0..count);
        let mut files = Vec::with_capacity(count);
        let mut answer = String::new();
        for i in 0..count {
            let name = if no_extension && i == answer_slot {
                stems[i].to_string()
            } else {
                format!("{}.{}", stems[i], exts[i])
            };
            if i == answer_slot {
                answer = name.clone();
            }
            files.push(name);
        }
        let target = if no_extension {
            TerminalTarget::NoExtension
        } else {
            TerminalTarget::Extension(exts[answer_slot].to_string())
        };
        Self {
            target,
            files,
            answer,
            last_login: login_date(seed),
        }
    }

    pub fn description(&self) -> String {
        match &self.target {
            TerminalTarget::Extension(ext) => {
                format!("Use the terminal below to delete a file ending with the extension .{ext}")
            }
            TerminalTarget::NoExtension => "Use the terminal below to delete a file that has no file extension.".into(),
        }
    }

    fn query_html(&self) -> String {
        match &self.target {
            TerminalTarget::Extension(ext) => format!(
                "Use the terminal below to delete a file ending with the extension <span class=\"bold\">.{ext}</span>"
            ),
            TerminalTarget::NoExtension => {
                "Use the terminal below to delete a file that has <span class=\"bold\">no file extension</span>.".into()
            }
        }
    }

    pub fn listing(&self) -> String {
        self.files.join(" ")
    }
}

/// `Www Mmm DD YYYY` for 2024-01-01 plus `seed` days.
fn login_date(seed: u64) -> String {
    let mut days = seed;
    let mut year = 2024u64;
    let leap = |y: u64| (y.is_multiple_of(4) && !y.is_multiple_of(100)) || y.is_multiple_of(400);
    loop {
        let len = if leap(year) { 366 } else { 365 };
        if days < len {
            break;
        }
        days -= len;
        year += 1;
    }
    let lengths = [31, if leap(year) { 29 } else { 28 }, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let mut month = 0;
    while days >= lengths[month] {
        days -= lengths[month];
        month += 1;
    }
    // 2024-01-01 was a Monday.
    format!("{} {} {:02} {year}", WEEKDAYS[(seed % 7) as usize], MONTHS[month], days + 1)
}

#[derive(Debug, Clone)]
struct Entry {
    command: String,
    output: Option<String>,
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    scenario: TerminalScenario,
    files: Vec<String>,
    history: Vec<Entry>,
    input: String,
    touched: bool,
    steps: u32,
    status: EpisodeStatus,
}

/// A shell-like page where the task is to delete one file with `rm`.
#[derive(Debug, Default)]
pub struct TerminalEnv {
    episode: Option<Episode>,
}

impl TerminalEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn task_for(seed: u64) -> TaskSpec {
        TaskSpec::new(format!("terminal/{seed}"), TerminalScenario::for_seed(seed).description(), BenchmarkMode::Episodic)
    }

    fn episode(&self) -> Result<&Episode, EnvError> {
        self.episode.as_ref().ok_or(EnvError::NotReset)
    }
}

impl Episode {
    fn render(&self) -> String {
        let mut history = String::new();
        let mut next_ref = 17;
        for entry in &self.history {
            history.push_str(&format!(
                "<div class=\"terminal-line\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">\n  <span class=\"user\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">user$</span>\n  <span class=\"command\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">{}</span>\n</div>",
                next_ref,
                next_ref + 1,
                next_ref + 2,
                escape(&entry.command)
            ));
            next_ref += 3;
            if let Some(out) = &entry.output {
                history.push_str(&format!(
                    "<div class=\"terminal-output\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">\n  <span class=\"output\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">{}</span>\n</div>",
                    next_ref,
                    next_ref + 1,
                    escape(out)
                ));
                next_ref += 2;
            }
        }
        let (active, flicker) = if self.touched {
            (" data-wob_ref=\"16\" data-wob_eps=\"e0\"", " class=\"\"")
        } else {
            ("", "")
        };
        format!(
            r#"<div id="wrap" data-wob_ref="2" data-wob_eps="e0">
  <div id="query">{query}</div>
  <div id="area" data-wob_ref="3" data-wob_eps="e0"><div data-wob_ref="4" data-wob_eps="e0">
<div id="terminal" data-wob_ref="5" data-wob_eps="e0">
  <div id="terminal-header" data-wob_ref="6" data-wob_eps="e0">terminal</div>
  <div id="terminal-contents" data-wob_ref="7" data-wob_eps="e0">
    <div class="terminal-output" data-wob_ref="8" data-wob_eps="e0">
  <span class="output" data-wob_ref="9" data-wob_eps="e0">Welcome! Type help for a list of available commands.</span>
</div><div class="terminal-output" data-wob_ref="10" data-wob_eps="e0">
  <span class="output" data-wob_ref="11" data-wob_eps="e0">Last login: {login}</span>
</div>{history}<div class="terminal-line" data-wob_ref="12" data-wob_eps="e0">
      <span class="user" data-wob_ref="13" data-wob_eps="e0">user$</span>
      <span id="active-input" class="command"{active}>{input}</span>
      <span id="input-flicker" data-wob_ref="14" data-wob_eps="e0"{flicker}></span>
    </div>
  </div>
</div>
<input type="text" id="terminal-target" data-wob_ref="15" data-wob_eps="e0">
</div></div>
</div>"#,
            query = self.scenario.query_html(),
            login = self.scenario.last_login,
            input = escape(&self.input),
        )
    }

    fn run(&mut self) {
        let line = std::mem::take(&mut self.input);
        let command = line.trim().to_string();
        if command.is_empty() {
            return;
        }
        let mut words = command.split_whitespace();
        let output = match words.next().unwrap_or_default() {
            "ls" => Some(self.files.join(" ")),
            "rm" => {
                let args: Vec<&str> = words.collect();
                match args.as_slice() {
                    [name] if self.files.iter().any(|f| f == name) => {
                        self.files.retain(|f| f != name);
                        self.status = if *name == self.scenario.answer {
                            EpisodeStatus::Succeeded
                        } else {
                            EpisodeStatus::Failed {
                                reason: format!("deleted {name} instead of {}", self.scenario.answer),
                            }
                        };
                        None
                    }
                    [name] => Some(format!("rm: cannot remove '{name}': No such file or directory")),
                    _ => Some("rm: expected exactly one file name".into()),
                }
            }
            "help" => Some("Available commands: ls, rm".into()),
            other => Some(format!("{other}: command not found")),
        };
        self.history.push(Entry { command, output });
    }
}

impl Environment for TerminalEnv {
    fn name(&self) -> &'static str {
        "terminal"
    }

    fn reset(&mut self, seed: u64) -> Result<(TaskSpec, RawState), EnvError> {
        let scenario = TerminalScenario::for_seed(seed);
        self.episode = Some(Episode {
            seed,
            files: scenario.files.clone(),
            scenario,
            history: Vec::new(),
            input: String::new(),
            touched: false,
            steps: 0,
            status: EpisodeStatus::Running,
        });
        Ok((Self::task_for(seed), self.state()?))
    }

    fn state(&self) -> Result<RawState, EnvError> {
        let ep = self.episode()?;
        Ok(RawState::new(ep.render(), ep.steps, ep.seed))
    }

    fn step(&mut self, action: &Action) -> Result<ActionEffect, EnvError> {
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.status.is_done() {
            return Err(EnvError::Finished);
        }
        ep.steps += 1;
        ep.touched = true;
        Ok(match action {
            Action::Type { characters } => {
                ep.input.push_str(characters);
                ActionEffect::Applied
            }
            Action::Press { key } => match key.as_str() {
                "enter" => {
                    ep.run();
                    ActionEffect::Applied
                }
                "backspace" => {
                    ep.input.pop();
                    ActionEffect::Applied
                }
                other => ignored(format!("key {other} does nothing here")),
            },
            Action::ClickXpath { .. } | Action::MoveMouse { .. } | Action::ClickOption { .. } => {
                ignored("the terminal keeps keyboard focus")
            }
            other => {
                return Err(EnvError::UnsupportedAction {
                    env: "terminal",
                    action: other.kind_name(),
                })
            }
        })
    }

    fn status(&self) -> EpisodeStatus {
        self.episode.as_ref().map_or(EpisodeStatus::Running, |e| e.status.clone())
    }
}
