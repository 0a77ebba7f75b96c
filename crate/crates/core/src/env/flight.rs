use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{click_target, escape, ignored, ActionEffect, EnvError, Environment, EpisodeStatus, Target};
use crate::model::{Action, BenchmarkMode, RawState, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Airport {
    pub city: &'static str,
    pub code: &'static str,
}

impl Airport {
    pub fn label(&self) -> String {
        format!("{} ({})", self.city, self.code)
    }
}

const fn ap(city: &'static str, code: &'static str) -> Airport {
    Airport { city, code }
}

/// Autocomplete catalogue. Every city and every `(CODE)` matches exactly one label.
pub const AIRPORTS: [Airport; 36] = [
    ap("Anvik, AK", "ANV"),
    ap("Minot, ND", "MOT"),
    ap("Hartford, CT", "BDL"),
    ap("Traverse City, MI", "TVC"),
    ap("Minto, AK", "MNT"),
    ap("Islip, NY", "ISP"),
    ap("Abilene, TX", "ABI"),
    ap("St Petersburg/Clearwater, FL", "PIE"),
    ap("Seattle Lake Union, WA", "LKE"),
    ap("Manhattan, KS", "MHK"),
    ap("Mountain Home, AR", "WMH"),
    ap("Baton Rouge, LA", "BTR"),
    ap("Bangor, ME", "BGR"),
    ap("Yakutat, AK", "YAK"),
    ap("Dubuque, IA", "DBQ"),
    ap("Eugene, OR", "EUG"),
    ap("Fresno, CA", "FAT"),
    ap("Gillette, WY", "GCC"),
    ap("Helena, MT", "HLN"),
    ap("Ithaca, NY", "ITH"),
    ap("Joplin, MO", "JLN"),
    ap("Kalamazoo, MI", "AZO"),
    ap("Laramie, WY", "LAR"),
    ap("Medford, OR", "MFR"),
    ap("Nome, AK", "OME"),
    ap("Ogdensburg, NY", "OGS"),
    ap("Pueblo, CO", "PUB"),
    ap("Quincy, IL", "UIN"),
    ap("Roswell, NM", "ROW"),
    ap("Sitka, AK", "SIT"),
    ap("Toledo, OH", "TOL"),
    ap("Valdosta, GA", "VLD"),
    ap("Wichita Falls, TX", "SPS"),
    ap("Yuma, AZ", "YUM"),
    ap("Bismarck, ND", "BIS"),
    ap("Casper, WY", "CPR"),
];

const MONTH_NAMES: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

/// The calendar opens on this month; the form treats it as today.
pub const CALENDAR_START: (u32, u32) = (2016, 12);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    Cheapest,
    Shortest,
}

impl Preference {
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::Cheapest => "cheapest",
            Preference::Shortest => "shortest",
        }
    }
}

/// An airport as the task names it: by city or by code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Place {
    pub airport: usize,
    pub by_code: bool,
}

impl Place {
    pub fn airport(&self) -> Airport {
        AIRPORTS[self.airport]
    }

    /// Wording in the task, e.g. `Anvik, AK` or `MOT`.
    pub fn task_text(&self) -> &'static str {
        if self.by_code {
            self.airport().code
        } else {
            self.airport().city
        }
    }

    /// What to type into the autocomplete so the intended airport is first.
    pub fn typed_text(&self) -> String {
        if self.by_code {
            format!("({})", self.airport().code)
        } else {
            self.airport().city.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlightOption {
    pub depart: String,
    pub arrive: String,
    pub duration_minutes: u32,
    pub price: u32,
}

impl FlightOption {
    pub fn duration_text(&self) -> String {
        format!("{}h {}m", self.duration_minutes / 60, self.duration_minutes % 60)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlightScenario {
    pub preference: Preference,
    pub from: Place,
    pub to: Place,
    pub year: u32,
    pub month: u32,
    pub day: u32,
    pub flights: Vec<FlightOption>,
}

fn days_in(year: u32, month: u32) -> u32 {
    match month {
        2 if year.is_multiple_of(4) && (!year.is_multiple_of(100) || year.is_multiple_of(400)) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

fn clock(minutes: u32) -> String {
    let m = minutes % (24 * 60);
    let (h, mm) = (m / 60, m % 60);
    let suffix = if h < 12 { "AM" } else { "PM" };
    let h12 = if h % 12 == 0 { 12 } else { h % 12 };
    format!("{h12}:{mm:02} {suffix}")
}

impl FlightScenario {
    pub fn for_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf119_0002);
        let count = rng.random_range(3..=6usize);
        let mut prices: Vec<u32> = (40..1200).collect();
        prices.shuffle(&mut rng);
        let mut durations: Vec<u32> = (45..900).step_by(5).collect();
        durations.shuffle(&mut rng);
        let mut flights: Vec<FlightOption> = (0..count)
            .map(|i| {
                let depart = rng.random_range(5 * 60..22 * 60) / 5 * 5;
                FlightOption {
                    depart: clock(depart),
                    arrive: clock(depart + durations[i]),
                    duration_minutes: durations[i],
                    price: prices[i],
                }
            })
            .collect();
        if seed == 0 {
            let from = AIRPORTS.iter().position(|a| a.code == "ANV").expect("catalogue");
            let to = AIRPORTS.iter().position(|a| a.code == "MOT").expect("catalogue");
            for f in flights.iter_mut().filter(|f| f.price <= 65) {
                f.price += 1200;
            }
            flights[1].price = 65;
            return Self {
                preference: Preference::Cheapest,
                from: Place { airport: from, by_code: false },
                to: Place { airport: to, by_code: true },
                year: 2016,
                month: 12,
                day: 23,
                flights,
            };
        }
        let preference = if rng.random_bool(0.5) {
            Preference::Cheapest
        } else {
            Preference::Shortest
        };
        let from = rng.random_range(0..AIRPORTS.len());
        let mut to = rng.random_range(0..AIRPORTS.len() - 1);
        if to >= from {
            to += 1;
        }
        let month = rng.random_range(9..=12);
        let day = rng.random_range(1..=days_in(2016, month));
        Self {
            preference,
            from: Place { airport: from, by_code: rng.random_bool(0.4) },
            to: Place { airport: to, by_code: rng.random_bool(0.4) },
            year: 2016,
            month,
            day,
            flights,
        }
    }

    pub fn date_text(&self) -> String {
        format!("{:02}/{:02}/{}", self.month, self.day, self.year)
    }

    pub fn description(&self) -> String {
        format!(
            "Book the {} one-way flight from: {} to: {} on {}.",
            self.preference.as_str(),
            self.from.task_text(),
            self.to.task_text(),
            self.date_text()
        )
    }

    fn query_html(&self) -> String {
        format!(
            "Book the <span class=\"bold\">{}</span> one-way flight from: <span class=\"bold\">{}</span> to: <span class=\"bold\">{}</span> on <span class=\"bold\">{}</span>.",
            self.preference.as_str(),
            escape(self.from.task_text()),
            escape(self.to.task_text()),
            self.date_text()
        )
    }

    /// The option the task asks for.
    pub fn best(&self) -> &FlightOption {
        self.flights
            .iter()
            .min_by_key(|f| match self.preference {
                Preference::Cheapest => f.price,
                Preference::Shortest => f.duration_minutes,
            })
            .expect("at least one flight")
    }

    /// Months between the calendar's opening month and the travel month.
    pub fn months_back(&self) -> u32 {
        (CALENDAR_START.0 * 12 + CALENDAR_START.1) - (self.year * 12 + self.month)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    From,
    To,
}

#[derive(Debug, Clone, Default)]
struct Input {
    text: String,
    selected: Option<usize>,
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    scenario: FlightScenario,
    from: Input,
    to: Input,
    focus: Option<Field>,
    menu_open: bool,
    highlight: Option<usize>,
    calendar: Option<(u32, u32)>,
    shown_month: (u32, u32),
    date: Option<(u32, u32, u32)>,
    searched: Option<bool>,
    steps: u32,
    status: EpisodeStatus,
}

/// One-way flight booking form with autocomplete, a datepicker and a result list.
#[derive(Debug, Default)]
pub struct FlightEnv {
    episode: Option<Episode>,
}

impl FlightEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn task_for(seed: u64) -> TaskSpec {
        TaskSpec::new(format!("book-flight/{seed}"), FlightScenario::for_seed(seed).description(), BenchmarkMode::Episodic)
    }
}

fn matches(typed: &str) -> Vec<usize> {
    let needle = typed.trim().to_lowercase();
    if needle.is_empty() {
        return Vec::new();
    }
    (0..AIRPORTS.len())
        .filter(|&i| AIRPORTS[i].label().to_lowercase().contains(&needle))
        .collect()
}

fn in_chain<'a>(target: &'a Target, up: &'a [Target]) -> impl Iterator<Item = &'a Target> {
    std::iter::once(target).chain(up.iter())
}

impl Episode {
    fn input(&mut self, field: Field) -> &mut Input {
        match field {
            Field::From => &mut self.from,
            Field::To => &mut self.to,
        }
    }

    fn options(&self) -> Vec<usize> {
        match (self.menu_open, self.focus) {
            (true, Some(Field::From)) => matches(&self.from.text),
            (true, Some(Field::To)) => matches(&self.to.text),
            _ => Vec::new(),
        }
    }

    fn select(&mut self, airport: usize) {
        if let Some(field) = self.focus {
            let input = self.input(field);
            input.text = AIRPORTS[airport].label();
            input.selected = Some(airport);
        }
        self.menu_open = false;
        self.highlight = None;
    }

    fn input_html(&self, id: &str, placeholder: &str, input: &Input, wob: u32) -> String {
        let value = if input.text.is_empty() {
            String::new()
        } else {
            format!(" value=\"{}\"", escape(&input.text))
        };
        format!(
            "<input id=\"{id}\" class=\"flight-input ui-autocomplete-input\" type=\"text\" placeholder=\"{placeholder}\" autocomplete=\"off\"{value} data-wob_ref=\"{wob}\" data-wob_eps=\"e0\">"
        )
    }

    fn render(&self) -> String {
        let date_value = self
            .date
            .map(|(y, m, d)| format!(" value=\"{m:02}/{d:02}/{y}\""))
            .unwrap_or_default();
        let (menu_class, results) = match self.searched {
            None => ("", "  <div id=\"results\" class=\"hide\"></div>".to_string()),
            Some(_) => (" class=\"hide\"", self.results_html()),
        };
        let mut page = format!(
            r#"<div id="wrap" data-wob_ref="2" data-wob_eps="e0">
  <div id="query">{query}</div>
  <div id="area" data-wob_ref="3" data-wob_eps="e0">
    <div id="menu"{menu_class} data-wob_ref="4" data-wob_eps="e0">
      <h2 id="header-book" data-wob_ref="5" data-wob_eps="e0">Book Your One-Way Flight</h2>
      <div class="input-container" data-wob_ref="6" data-wob_eps="e0">{from}</div>
      <div class="input-container" data-wob_ref="8" data-wob_eps="e0">{to}</div>
      <div class="departure-container" data-wob_ref="10" data-wob_eps="e0">
        <div class="departure-header" data-wob_ref="11" data-wob_eps="e0">Departure Date</div>
        <div class="input-container" data-wob_ref="12" data-wob_eps="e0"><input id="datepicker" class="flight-input hasDatepicker" type="text" readonly=""{date_value} data-wob_ref="13" data-wob_eps="e0"></div>
      </div>
      <div class="search-container" data-wob_ref="14" data-wob_eps="e0">
        <button id="search" data-wob_ref="15" data-wob_eps="e0">Search</button>
      </div>
    </div>
{results}
  </div>
</div>"#,
            query = self.scenario.query_html(),
            from = self.input_html("flight-from", "From:", &self.from, 7),
            to = self.input_html("flight-to", "To:", &self.to, 9),
        );
        let options = self.options();
        if !options.is_empty() {
            page.push_str("\n<ul id=\"ui-id-1\" class=\"ui-menu ui-widget ui-autocomplete\">");
            for (i, &a) in options.iter().enumerate() {
                let active = if self.highlight == Some(i) { " ui-state-active" } else { "" };
                let _ = write!(
                    page,
                    "<li class=\"ui-menu-item\"><div class=\"ui-menu-item-wrapper{active}\" data-airport=\"{a}\">{}</div></li>",
                    escape(&AIRPORTS[a].label())
                );
            }
            page.push_str("</ul>");
        }
        if let Some((year, month)) = self.calendar {
            page.push_str(&calendar_html(year, month));
        }
        page
    }

    fn results_html(&self) -> String {
        let mut out = String::from("  <div id=\"results\">");
        for (i, f) in self.scenario.flights.iter().enumerate() {
            let _ = write!(
                out,
                "\n    <div class=\"flight\" data-result=\"{i}\">\n      <div class=\"time-container\">\n        <div class=\"depart-time\">{}</div>\n        <div class=\"time-duration\">{}</div>\n        <div class=\"arrive-time\">{}</div>\n      </div>\n      <div class=\"book\"><button class=\"flight-price\" data-price=\"{p}\">Book flight for ${p}</button></div>\n    </div>",
                f.depart,
                f.duration_text(),
                f.arrive,
                p = f.price
            );
        }
        out.push_str("\n  </div>");
        out
    }

    fn click(&mut self, target: Target, up: Vec<Target>) -> ActionEffect {
        let chain: Vec<&Target> = in_chain(&target, &up).collect();
        let id = |t: &&Target| t.attr("id").map(str::to_string);
        if let Some(t) = chain.iter().find(|t| t.has_class("ui-menu-item-wrapper")) {
            if let Some(a) = t.attr("data-airport").and_then(|a| a.parse().ok()) {
                self.select(a);
                return ActionEffect::Applied;
            }
        }
        if let Some(t) = chain.iter().find(|t| matches!(t.attr("title"), Some("Prev") | Some("Next"))) {
            let (y, m) = self.shown_month;
            self.shown_month = if t.attr("title") == Some("Prev") {
                if m == 1 { (y - 1, 12) } else { (y, m - 1) }
            } else if m == 12 {
                (y + 1, 1)
            } else {
                (y, m + 1)
            };
            if self.calendar.is_some() {
                self.calendar = Some(self.shown_month);
            }
            return ActionEffect::Applied;
        }
        if target.tag == "a" && chain.iter().any(|t| t.has_class("ui-datepicker-calendar")) {
            if let Ok(day) = target.text.parse::<u32>() {
                let (y, m) = self.shown_month;
                self.date = Some((y, m, day));
                self.calendar = None;
                return ActionEffect::Applied;
            }
        }
        if chain.iter().any(|t| t.has_class("flight-price")) {
            let price = chain
                .iter()
                .find_map(|t| t.attr("data-price"))
                .and_then(|p| p.parse::<u32>().ok());
            self.book(price);
            return ActionEffect::Applied;
        }
        match chain.iter().find_map(id).as_deref() {
            Some("flight-from") => self.focus_field(Field::From),
            Some("flight-to") => self.focus_field(Field::To),
            Some("datepicker") => {
                self.focus = None;
                self.menu_open = false;
                self.calendar = Some(self.shown_month);
            }
            Some("search") => return self.search(),
            _ => return ignored(format!("nothing happens when clicking <{}>", target.tag)),
        }
        ActionEffect::Applied
    }

    fn focus_field(&mut self, field: Field) {
        self.focus = Some(field);
        self.menu_open = false;
        self.highlight = None;
        self.calendar = None;
    }

    fn search(&mut self) -> ActionEffect {
        if self.from.text.is_empty() || self.to.text.is_empty() || self.date.is_none() {
            return ignored("search needs an origin, a destination and a date");
        }
        let s = &self.scenario;
        let ok = self.from.selected == Some(s.from.airport)
            && self.to.selected == Some(s.to.airport)
            && self.date == Some((s.year, s.month, s.day));
        self.searched = Some(ok);
        self.focus = None;
        self.menu_open = false;
        self.calendar = None;
        ActionEffect::Applied
    }

    fn book(&mut self, price: Option<u32>) {
        let best = self.scenario.best().price;
        self.status = match (self.searched, price) {
            (Some(true), Some(p)) if p == best => EpisodeStatus::Succeeded,
            (Some(true), p) => EpisodeStatus::Failed {
                reason: format!("booked {p:?} but the {} flight costs ${best}", self.scenario.preference.as_str()),
            },
            _ => EpisodeStatus::Failed {
                reason: "booked a flight for the wrong route or date".into(),
            },
        };
    }

    fn press(&mut self, key: &str) -> ActionEffect {
        let options = self.options();
        match key {
            "arrowdown" | "arrowup" if !options.is_empty() => {
                let last = options.len() - 1;
                self.highlight = Some(match (self.highlight, key) {
                    (None, "arrowdown") => 0,
                    (None, _) => last,
                    (Some(i), "arrowdown") => (i + 1).min(last),
                    (Some(i), _) => i.saturating_sub(1),
                });
                ActionEffect::Applied
            }
            "enter" => match self.highlight.and_then(|i| options.get(i).copied()) {
                Some(a) => {
                    self.select(a);
                    ActionEffect::Applied
                }
                None => ignored("no autocomplete entry highlighted"),
            },
            "backspace" => match self.focus {
                Some(field) => {
                    let input = self.input(field);
                    input.text.pop();
                    input.selected = None;
                    self.menu_open = true;
                    self.highlight = None;
                    ActionEffect::Applied
                }
                None => ignored("no field has focus"),
            },
            other => ignored(format!("key {other} does nothing here")),
        }
    }
}

fn calendar_html(year: u32, month: u32) -> String {
    let mut out = format!(
        "\n<div id=\"ui-datepicker-div\" class=\"ui-datepicker ui-widget\"><div class=\"ui-datepicker-header\"><a class=\"ui-datepicker-prev\" title=\"Prev\"><span>Prev</span></a><a class=\"ui-datepicker-next\" title=\"Next\"><span>Next</span></a><div class=\"ui-datepicker-title\"><span class=\"ui-datepicker-month\">{}</span> <span class=\"ui-datepicker-year\">{year}</span></div></div><table class=\"ui-datepicker-calendar\"><tbody><tr>",
        MONTH_NAMES[month as usize - 1]
    );
    for day in 1..=days_in(year, month) {
        let _ = write!(out, "<td><a class=\"ui-state-default\" href=\"#\">{day}</a></td>");
        if day % 7 == 0 {
            out.push_str("</tr><tr>");
        }
    }
    out.push_str("</tr></tbody></table></div>");
    out
}

impl Environment for FlightEnv {
    fn name(&self) -> &'static str {
        "book-flight"
    }

    fn reset(&mut self, seed: u64) -> Result<(TaskSpec, RawState), EnvError> {
        self.episode = Some(Episode {
            seed,
            scenario: FlightScenario::for_seed(seed),
            from: Input::default(),
            to: Input::default(),
            focus: None,
            menu_open: false,
            highlight: None,
            calendar: None,
            shown_month: CALENDAR_START,
            date: None,
            searched: None,
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
            Action::ClickXpath { xpath } | Action::ClickOption { xpath } => match click_target(&ep.render(), xpath)? {
                Some((target, up)) => ep.click(target, up),
                None => ignored(format!("{xpath} matches nothing")),
            },
            Action::MoveMouse { .. } => ActionEffect::Applied,
            Action::Type { characters } => match ep.focus {
                Some(field) => {
                    let input = ep.input(field);
                    input.text.push_str(characters);
                    input.selected = None;
                    ep.menu_open = true;
                    ep.highlight = None;
                    ActionEffect::Applied
                }
                None => ignored("no field has focus"),
            },
            Action::Press { key } => ep.press(key),
            other => {
                return Err(EnvError::UnsupportedAction {
                    env: "book-flight",
                    action: other.kind_name(),
                })
            }
        })
    }

    fn status(&self) -> EpisodeStatus {
        self.episode.as_ref().map_or(EpisodeStatus::Running, |e| e.status.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn click(env: &mut FlightEnv, xpath: &str) -> ActionEffect {
        env.step(&Action::ClickXpath { xpath: xpath.into() }).unwrap()
    }

    fn fill(env: &mut FlightEnv, field: &str, text: &str) {
        click(env, &format!("//*[@id='{field}']"));
        env.step(&Action::Type { characters: text.into() }).unwrap();
        env.step(&Action::Press { key: "arrowdown".into() }).unwrap();
        assert_eq!(env.step(&Action::Press { key: "enter".into() }).unwrap(), ActionEffect::Applied);
    }

    #[test]
    fn catalogue_queries_are_unambiguous() {
        for (i, a) in AIRPORTS.iter().enumerate() {
            assert_eq!(matches(a.city), vec![i], "{}", a.city);
            assert_eq!(matches(&format!("({})", a.code)), vec![i], "{}", a.code);
        }
    }

    #[test]
    fn seed_zero_initial_page_matches_recording() {
        let raw = include_str!("../../../../fixtures/transcripts/book_flight.json");
        let v: serde_json::Value = serde_json::from_str(raw).unwrap();
        let recorded = v["abstraction"][0]["pairs"][2]["state"].as_str().unwrap();
        let (task, state) = FlightEnv::new().reset(0).unwrap();
        assert_eq!(state.html, recorded);
        assert_eq!(task.description, "Book the cheapest one-way flight from: Anvik, AK to: MOT on 12/23/2016.");
    }

    #[test]
    fn booking_the_cheapest_flight() {
        let mut env = FlightEnv::new();
        env.reset(0).unwrap();
        fill(&mut env, "flight-from", "Anvik, AK");
        fill(&mut env, "flight-to", "(MOT)");
        click(&mut env, "//*[@id='datepicker']");
        assert!(env.state().unwrap().html.contains("December"));
        click(&mut env, "//a[text()='23']");
        click(&mut env, "//*[@id='search']");
        let page = env.state().unwrap().html;
        assert!(page.contains("value=\"Minot, ND (MOT)\""));
        assert!(page.contains("value=\"12/23/2016\""));
        assert!(page.contains("Book flight for $65"));
        click(&mut env, "//button[text()='Book flight for $65']");
        assert_eq!(env.status(), EpisodeStatus::Succeeded);
    }

    #[test]
    fn prev_moves_the_calendar_and_wrong_pick_fails() {
        let mut env = FlightEnv::new();
        env.reset(0).unwrap();
        fill(&mut env, "flight-from", "Anvik, AK");
        fill(&mut env, "flight-to", "(MOT)");
        click(&mut env, "//*[@id='datepicker']");
        click(&mut env, "//*[@title='Prev']");
        assert!(env.state().unwrap().html.contains("November"));
        click(&mut env, "//a[text()='23']");
        click(&mut env, "//*[@id='search']");
        click(&mut env, "//button[text()='Book flight for $65']");
        assert!(matches!(env.status(), EpisodeStatus::Failed { .. }));
    }

    #[test]
    fn scenarios_have_a_unique_best() {
        for seed in 0..300 {
            let s = FlightScenario::for_seed(seed);
            assert_ne!(s.from.airport, s.to.airport);
            assert!(s.months_back() <= 3);
            let best = s.best();
            let key = |f: &FlightOption| match s.preference {
                Preference::Cheapest => f.price,
                Preference::Shortest => f.duration_minutes,
            };
            assert_eq!(s.flights.iter().filter(|f| key(f) == key(best)).count(), 1);
            let mut prices: Vec<u32> = s.flights.iter().map(|f| f.price).collect();
            prices.sort();
            prices.dedup();
            assert_eq!(prices.len(), s.flights.len());
        }
    }
}
