use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::html::{self, XPath};
use crate::model::{Action, Observation, RawState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `matches` counts xpath hits; the first one is the target.
    Valid { matches: usize, target: Option<String> },
    Invalid { reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }

    fn invalid(reason: impl Into<String>) -> Self {
        Verdict::Invalid { reason: reason.into() }
    }
}

/// Checks that `action` can be carried out on `state`.
///
/// Id actions are looked up in `observation` when one is given (as `id=N`),
/// otherwise in the state's `backend_node_id` / `data-wob_ref` attributes.
pub fn validate_against_state(action: &Action, state: &RawState, observation: Option<&Observation>) -> Verdict {
    if let Some(expr) = action.xpath() {
        let xpath = match XPath::parse(expr) {
            Ok(x) => x,
            Err(e) => return Verdict::invalid(format!("bad-xpath: {e}")),
        };
        let doc = html::parse(&state.html);
        let hits = xpath.select(&doc);
        return match hits.first() {
            None => Verdict::invalid("no-match"),
            Some(first) => Verdict::Valid {
                matches: hits.len(),
                target: Some(first.html()),
            },
        };
    }
    if let Some(id) = action.element_id() {
        let found = match observation {
            Some(obs) => Regex::new(&format!(r"\bid={id}\b"))
                .expect("static pattern")
                .is_match(&obs.text),
            None => {
                let wanted = id.to_string();
                let doc = html::parse(&state.html);
                let found = html::elements(&doc).any(|el| {
                    ["backend_node_id", "data-wob_ref"]
                        .iter()
                        .any(|a| el.value().attr(a).is_some_and(|v| v.trim() == wanted))
                });
                found
            }
        };
        return if found {
            Verdict::Valid { matches: 1, target: None }
        } else {
            Verdict::invalid("unknown-id")
        };
    }
    Verdict::Valid { matches: 0, target: None }
}
