//! Ranked element filtering and a deterministic lexical reference ranker.
//!
//! The reference ranker scores each element by the task tokens it shares,
//! weighting a token by the most specific field it appears in:
//!
//! | field                                             | weight |
//! |---------------------------------------------------|--------|
//! | own text                                          | 1.0    |
//! | `aria-label`, `title`, `placeholder`, `alt`, `value` | 0.8 |
//! | `name`, `id`                                      | 0.5    |
//! | `class`, `type`, `role`                           | 0.25   |
//!
//! Each distinct task token counts once. Ties keep document order.

use std::collections::{BTreeSet, HashMap, HashSet};

use scraper::ElementRef;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::html;
use crate::model::{Observation, ObservationSource, RawState, TaskSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("k must be positive")]
    ZeroK,
    #[error("ranking is empty")]
    EmptyRanking,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("state has no rankable elements")]
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedElement {
    pub element_id: u64,
    pub score: f64,
    pub snippet: String,
}

pub const FIELD_WEIGHTS: [(&str, f64); 11] = [
    ("aria-label", 0.8),
    ("title", 0.8),
    ("placeholder", 0.8),
    ("alt", 0.8),
    ("value", 0.8),
    ("name", 0.5),
    ("id", 0.5),
    ("class", 0.25),
    ("type", 0.25),
    ("role", 0.25),
    ("", 1.0),
];

const STOPWORDS: [&str; 14] = ["a", "an", "the", "to", "of", "on", "in", "my", "for", "and", "with", "is", "at", "by"];

const SKIPPED_TAGS: [&str; 8] = ["html", "head", "body", "script", "style", "meta", "link", "noscript"];

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// Orders by score descending, then element id ascending.
fn sort_ranking(ranking: &[RankedElement]) -> Vec<&RankedElement> {
    let mut sorted: Vec<&RankedElement> = ranking.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.element_id.cmp(&b.element_id)));
    sorted
}

/// Keeps the `k` best elements, wrapped as `<html> ... </html>`.
pub fn filter_topk(ranking: &[RankedElement], k: usize) -> Result<Observation, RankingError> {
    if k == 0 {
        return Err(RankingError::ZeroK);
    }
    if ranking.is_empty() {
        return Err(RankingError::EmptyRanking);
    }
    let body: Vec<&str> = sort_ranking(ranking).into_iter().take(k).map(|e| e.snippet.as_str()).collect();
    Ok(Observation::unbounded(format!("<html> {} </html>", body.join(" ")), ObservationSource::TopkFilter))
}

/// Ids kept by [`filter_topk`] at `k`.
pub fn topk_ids(ranking: &[RankedElement], k: usize) -> Vec<u64> {
    sort_ranking(ranking).into_iter().take(k).map(|e| e.element_id).collect()
}

/// Fraction of steps whose target survives top-k filtering.
pub fn recall_at_k(dataset: &[(Vec<RankedElement>, u64)], k: usize) -> Result<f64, RankingError> {
    if k == 0 {
        return Err(RankingError::ZeroK);
    }
    if dataset.is_empty() {
        return Err(RankingError::EmptyDataset);
    }
    let hits = dataset
        .iter()
        .filter(|(ranking, target)| topk_ids(ranking, k).contains(target))
        .count();
    Ok(hits as f64 / dataset.len() as f64)
}

/// Element id taken from `backend_node_id`, then `data-wob_ref`, then the
/// preorder position.
fn element_id(el: &ElementRef<'_>, position: usize) -> u64 {
    ["backend_node_id", "data-wob_ref"]
        .iter()
        .find_map(|a| el.value().attr(a).and_then(|v| v.trim().parse().ok()))
        .unwrap_or(position as u64)
}

fn own_text(el: &ElementRef<'_>) -> String {
    let parts: Vec<&str> = el
        .children()
        .filter_map(|c| c.value().as_text().map(|t| t.trim()))
        .filter(|t| !t.is_empty())
        .collect();
    parts.join(" ")
}

/// Compact one-element rendering: `<tag id=N attribute words> text </tag>`.
fn snippet(el: &ElementRef<'_>, id: u64) -> String {
    let tag = el.value().name();
    let mut head = format!("<{tag} id={id}");
    for (attr, _) in FIELD_WEIGHTS.iter().filter(|(a, _)| !a.is_empty() && *a != "id" && *a != "class") {
        if let Some(v) = el.value().attr(attr) {
            let words = v.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if !words.is_empty() {
                head.push(' ');
                head.push_str(&words);
            }
        }
    }
    let text = own_text(el);
    if text.is_empty() {
        format!("{head} />")
    } else {
        format!("{head}> {text} </{tag}>")
    }
}

pub fn reference_rank(state: &RawState, task: &TaskSpec) -> Result<Vec<RankedElement>, RankingError> {
    let wanted: BTreeSet<String> = tokens(&task.description).into_iter().collect();
    let doc = html::parse(&state.html);
    let mut scored = Vec::new();
    let mut seen = HashSet::new();
    for (position, el) in html::elements(&doc).enumerate() {
        if SKIPPED_TAGS.contains(&el.value().name()) {
            continue;
        }
        let mut id = element_id(&el, position);
        while seen.contains(&id) {
            id = id.saturating_add(1_000_000);
        }
        seen.insert(id);
        let mut best: HashMap<String, f64> = HashMap::new();
        for (attr, weight) in FIELD_WEIGHTS {
            let source = if attr.is_empty() {
                own_text(&el)
            } else {
                el.value().attr(attr).unwrap_or_default().to_string()
            };
            for t in tokens(&source).into_iter().filter(|t| wanted.contains(t)) {
                let slot = best.entry(t).or_insert(0.0);
                *slot = f64::max(*slot, weight);
            }
        }
        let mut weights: Vec<f64> = best.into_values().collect();
        weights.sort_by(f64::total_cmp);
        let score = weights.iter().sum();
        scored.push((position, RankedElement { element_id: id, score, snippet: snippet(&el, id) }));
    }
    if scored.is_empty() {
        return Err(RankingError::Unparseable);
    }
    scored.sort_by(|(pa, a), (pb, b)| b.score.total_cmp(&a.score).then(pa.cmp(pb)));
    Ok(scored.into_iter().map(|(_, e)| e).collect())
}
