use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{click_target, escape, ignored, ActionEffect, EnvError, Environment, EpisodeStatus};
use crate::model::{Action, BenchmarkMode, RawState, TaskSpec};

pub const FORM_TASK: &str = "Type the text below into the text field and press Submit.";

/// The word to type and the cosmetic skews the page draws it with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormScenario {
    pub word: String,
    pub skews: Vec<(i32, i32)>,
    pub margin: (u32, u32),
    pub button_margin: u32,
}

impl FormScenario {
    pub fn for_seed(seed: u64) -> Self {
        if seed == 0 {
            return Self {
                word: "jrpf".into(),
                skews: vec![(-13, 21), (8, 17), (-13, 32), (2, 18)],
                margin: (13, 19),
                button_margin: 16,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0e3_0003);
        let len = rng.random_range(3..=5);
        let word: String = (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
        let skews = (0..len)
            .map(|_| (rng.random_range(-15..=15), rng.random_range(-32..=32)))
            .collect();
        Self {
            word,
            skews,
            margin: (rng.random_range(5..=15), rng.random_range(5..=20)),
            button_margin: rng.random_range(10..=20),
        }
    }
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    scenario: FormScenario,
    focused: bool,
    value: String,
    steps: u32,
    status: EpisodeStatus,
}

impl Episode {
    fn render(&self) -> String {
        let s = &self.scenario;
        let n = s.word.len() as u32;
        let mut captcha = String::new();
        for (i, (c, (x, y))) in s.word.chars().zip(&s.skews).enumerate() {
            let _ = write!(
                captcha,
                "<span style=\"transform: skewX({x}deg) skewY({y}deg);\" data-wob_ref=\"{}\" data-wob_eps=\"e0\">{c}</span>",
                6 + i
            );
        }
        let value = if self.value.is_empty() {
            String::new()
        } else {
            format!(" value=\"{}\"", escape(&self.value))
        };
        format!(
            r#"<div id="wrap" data-wob_ref="2" data-wob_eps="e0">
  <div id="sol" class="{word}" data-wob_ref="3" data-wob_eps="e0"></div>
  <div id="query">{FORM_TASK}</div>
  <div id="area" data-wob_ref="4" data-wob_eps="e0">
    <div id="captcha" data-wob_ref="5" data-wob_eps="e0">{captcha}</div>
    <div id="form" style="margin-left:{ml}px;margin-top:{mt}px;" data-wob_ref="{form}" data-wob_eps="e0">
      <input type="text" id="tt"{value} data-wob_ref="{input}" data-wob_eps="e0">
      <button id="subbtn" class="secondary-action" style="margin-top:{bm}px;" data-wob_ref="{button}" data-wob_eps="e0">Submit</button>
    </div>
  </div>
</div>"#,
            word = s.word,
            ml = s.margin.0,
            mt = s.margin.1,
            bm = s.button_margin,
            form = 6 + n,
            input = 7 + n,
            button = 8 + n,
        )
    }

    fn submit(&mut self) {
        self.status = if self.value == self.scenario.word {
            EpisodeStatus::Succeeded
        } else {
            EpisodeStatus::Failed {
                reason: format!("submitted {:?}, expected {:?}", self.value, self.scenario.word),
            }
        };
    }
}

/// Copy the distorted word into a text box and submit it.
#[derive(Debug, Default)]
pub struct FormEnv {
    episode: Option<Episode>,
}

impl FormEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn task_for(seed: u64) -> TaskSpec {
        TaskSpec::new(format!("form-fill/{seed}"), FORM_TASK, BenchmarkMode::Episodic)
    }
}

impl Environment for FormEnv {
    fn name(&self) -> &'static str {
        "form-fill"
    }

    fn reset(&mut self, seed: u64) -> Result<(TaskSpec, RawState), EnvError> {
        self.episode = Some(Episode {
            seed,
            scenario: FormScenario::for_seed(seed),
            focused: false,
            value: String::new(),
            steps: 0,
            status: EpisodeStatus::Running,
        });
        Ok((Self::task_for(seed), self.state()?))
    }

    fn state(&self) -> Result<RawState, EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotReset)?;
        Ok(RawState::new(ep.render(), ep.steps, ep.seed))
    }

    fn step(&mut self, action: &Action) -> Result<ActionEffect, EnvError> {
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.status.is_done() {
            return Err(EnvError::Finished);
        }
        ep.steps += 1;
        Ok(match action {
            Action::ClickXpath { xpath } => match click_target(&ep.render(), xpath)? {
                Some((t, _)) => match t.attr("id") {
                    Some("tt") => {
                        ep.focused = true;
                        ActionEffect::Applied
                    }
                    Some("subbtn") => {
                        ep.submit();
                        ActionEffect::Applied
                    }
                    _ => {
                        ep.focused = false;
                        ignored(format!("nothing happens when clicking <{}>", t.tag))
                    }
                },
                None => ignored(format!("{xpath} matches nothing")),
            },
            Action::Type { characters } if ep.focused => {
                ep.value.push_str(characters);
                ActionEffect::Applied
            }
            Action::Type { .. } => ignored("the text field does not have focus"),
            Action::Press { key } => match key.as_str() {
                "enter" if ep.focused => {
                    ep.submit();
                    ActionEffect::Applied
                }
                "backspace" if ep.focused => {
                    ep.value.pop();
                    ActionEffect::Applied
                }
                other => ignored(format!("key {other} does nothing here")),
            },
            Action::MoveMouse { .. } => ActionEffect::Applied,
            other => {
                return Err(EnvError::UnsupportedAction {
                    env: "form-fill",
                    action: other.kind_name(),
                })
            }
        })
    }

    fn status(&self) -> EpisodeStatus {
        self.episode.as_ref().map_or(EpisodeStatus::Running, |e| e.status.clone())
    }
}
