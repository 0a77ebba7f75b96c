//! Exemplar memory: embedded metadata keys mapped to exemplar trajectories
//! and abstraction prompts, with exact top-n Euclidean retrieval.

mod persist;
mod store;

use std::cmp::Ordering;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::AbstractionPrompt;
use crate::model::{RawState, TaskSpec, Trajectory};

pub use persist::{load, persist, EXEMPLARS_FILE, KEYS_FILE, MANIFEST_FILE};
pub use store::MemoryStore;

/// Embedding dimension of the hosted default model.
pub const DEFAULT_DIM: usize = 1536;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("exemplar {index} ({task_id}) is not a successful trajectory")]
    UnsuccessfulExemplar { index: usize, task_id: String },
    #[error("exemplar {index} ({task_id}) has no steps")]
    EmptyExemplar { index: usize, task_id: String },
    #[error("group id must not be empty")]
    EmptyGroupId,
    #[error("embedding must be non-empty and finite")]
    InvalidEmbedding,
    #[error("memory index is empty")]
    EmptyIndex,
    #[error("n must be at least 1")]
    InvalidN,
    #[error("no retrieval results to resolve")]
    NoResults,
    #[error("task metadata is missing field `{0}`")]
    MissingField(&'static str),
    #[error("corrupt memory directory: {0}")]
    Corrupt(String),
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A fixed-length embedding. Stored as `f32`; distances are computed in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, MemoryError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(MemoryError::InvalidEmbedding);
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Euclidean distance. Panics if dimensions differ.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "embedding dimensions differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| {
                let d = f64::from(a) - f64::from(b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = MemoryError;
    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f32> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub key_text: String,
    pub key: EmbeddingVector,
    pub group_id: String,
    pub exemplars: Vec<Trajectory>,
    pub abstraction_prompts: Vec<AbstractionPrompt>,
    pub insertion_index: u64,
}

/// Append-only list of entries sharing one key dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryIndex {
    dim: usize,
    entries: Vec<MemoryEntry>,
}

#[derive(Debug, Clone, Copy)]
pub struct RetrievalResult<'a> {
    pub entry: &'a MemoryEntry,
    pub distance: f64,
}

impl MemoryIndex {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    /// Appends an entry and returns its insertion index.
    pub fn insert(
        &mut self,
        key_text: impl Into<String>,
        key: EmbeddingVector,
        group_id: impl Into<String>,
        exemplars: Vec<Trajectory>,
        abstraction_prompts: Vec<AbstractionPrompt>,
    ) -> Result<u64, MemoryError> {
        if key.dim() != self.dim {
            return Err(MemoryError::DimensionMismatch {
                expected: self.dim,
                actual: key.dim(),
            });
        }
        let group_id = group_id.into();
        if group_id.is_empty() {
            return Err(MemoryError::EmptyGroupId);
        }
        for (index, t) in exemplars.iter().enumerate() {
            if !t.is_success() {
                return Err(MemoryError::UnsuccessfulExemplar {
                    index,
                    task_id: t.id().to_string(),
                });
            }
            if t.steps.is_empty() {
                return Err(MemoryError::EmptyExemplar {
                    index,
                    task_id: t.id().to_string(),
                });
            }
        }
        let insertion_index = self.entries.last().map_or(0, |e| e.insertion_index + 1);
        self.entries.push(MemoryEntry {
            key_text: key_text.into(),
            key,
            group_id,
            exemplars,
            abstraction_prompts,
            insertion_index,
        });
        Ok(insertion_index)
    }

    /// The `n` nearest entries (fewer if the index is smaller), ascending by
    /// distance with ties broken by insertion index.
    pub fn retrieve_topn(
        &self,
        query: &EmbeddingVector,
        n: usize,
    ) -> Result<Vec<RetrievalResult<'_>>, MemoryError> {
        if self.entries.is_empty() {
            return Err(MemoryError::EmptyIndex);
        }
        if n == 0 {
            return Err(MemoryError::InvalidN);
        }
        if query.dim() != self.dim {
            return Err(MemoryError::DimensionMismatch {
                expected: self.dim,
                actual: query.dim(),
            });
        }
        let mut scored: Vec<RetrievalResult<'_>> = self
            .entries
            .iter()
            .map(|entry| RetrievalResult {
                entry,
                distance: query.distance(&entry.key),
            })
            .collect();
        scored.sort_by(|a, b| {
            a.distance
                .partial_cmp(&b.distance)
                .unwrap_or(Ordering::Equal)
                .then(a.entry.insertion_index.cmp(&b.entry.insertion_index))
        });
        scored.truncate(n);
        Ok(scored)
    }

    /// Entries of `group_id`, in insertion order.
    pub fn group<'a>(&'a self, group_id: &'a str) -> impl Iterator<Item = &'a MemoryEntry> + 'a {
        self.entries.iter().filter(move |e| e.group_id == group_id)
    }
}

/// Most frequent group among `results`; frequency ties go to the group of
/// the nearest tied result.
pub fn resolve_majority<'a>(results: &[RetrievalResult<'a>]) -> Result<&'a str, MemoryError> {
    let mut counts: Vec<(&'a str, usize, f64, u64)> = Vec::new();
    for r in results {
        let g = r.entry.group_id.as_str();
        match counts.iter_mut().find(|c| c.0 == g) {
            Some(c) => {
                c.1 += 1;
                if (r.distance, r.entry.insertion_index) < (c.2, c.3) {
                    c.2 = r.distance;
                    c.3 = r.entry.insertion_index;
                }
            }
            None => counts.push((g, 1, r.distance, r.entry.insertion_index)),
        }
    }
    counts
        .into_iter()
        .min_by(|a, b| {
            b.1.cmp(&a.1)
                .then(a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))
                .then(a.3.cmp(&b.3))
        })
        .map(|c| c.0)
        .ok_or(MemoryError::NoResults)
}

/// MiniWoB key text: the task description, a newline, then the initial page.
pub fn build_metadata_miniwob(task: &TaskSpec, initial_state: &RawState) -> String {
    format!("{}\n{}", task.description, initial_state.html)
}

/// Mind2Web key text built from the website, domain and description fields.
pub fn build_metadata_mind2web(task: &TaskSpec) -> Result<String, MemoryError> {
    let field = |name: &'static str| {
        task.metadata_fields
            .get(name)
            .map(String::as_str)
            .ok_or(MemoryError::MissingField(name))
    };
    Ok(format!(
        "website: {}\ndomain: {}\ntask: {}",
        field("website")?,
        field("domain")?,
        field("description")?
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn v(values: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    fn success(id: &str) -> Trajectory {
        let mut t = Trajectory::new(TaskSpec::new(id, "task", BenchmarkMode::Episodic));
        t.steps.push(Step {
            observation: Observation::unbounded("o", ObservationSource::Explicit),
            action_block: ActionBlock::new(vec![Action::Type { characters: "x".into() }], "", vec![]).unwrap(),
        });
        t.outcome = Outcome::Success;
        t
    }

    fn index(keys: &[(&str, [f32; 2])]) -> MemoryIndex {
        let mut idx = MemoryIndex::new(2);
        for (g, k) in keys {
            idx.insert(*g, v(k), *g, vec![], vec![]).unwrap();
        }
        idx
    }

    #[test]
    fn insert_into_empty_index() {
        let mut idx = MemoryIndex::new(2);
        assert_eq!(idx.insert("k", v(&[0.0, 1.0]), "g", vec![success("a")], vec![]).unwrap(), 0);
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.insert("k2", v(&[0.0, 2.0]), "g", vec![], vec![]).unwrap(), 1);
    }

    #[test]
    fn insert_rejects_failures_and_bad_dims() {
        let mut idx = MemoryIndex::new(2);
        let mut failed = success("f");
        failed.outcome = Outcome::Failure;
        assert!(matches!(
            idx.insert("k", v(&[0.0, 0.0]), "g", vec![failed], vec![]),
            Err(MemoryError::UnsuccessfulExemplar { index: 0, .. })
        ));
        assert!(matches!(
            idx.insert("k", v(&[0.0]), "g", vec![], vec![]),
            Err(MemoryError::DimensionMismatch { expected: 2, actual: 1 })
        ));
        assert!(matches!(idx.insert("k", v(&[0.0, 0.0]), "", vec![], vec![]), Err(MemoryError::EmptyGroupId)));
        assert!(idx.is_empty());
    }

    #[test]
    fn exact_key_is_nearest_and_ties_use_insertion_order() {
        let idx = index(&[("a", [1.0, 0.0]), ("b", [-1.0, 0.0]), ("c", [3.0, 4.0])]);
        let hits = idx.retrieve_topn(&v(&[3.0, 4.0]), 1).unwrap();
        assert_eq!(hits[0].entry.group_id, "c");
        assert_eq!(hits[0].distance, 0.0);

        let hits = idx.retrieve_topn(&v(&[0.0, 0.0]), 10).unwrap();
        let order: Vec<_> = hits.iter().map(|h| h.entry.group_id.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
        assert_eq!(hits[2].distance, 5.0);
    }

    #[test]
    fn retrieval_errors() {
        let empty = MemoryIndex::new(2);
        assert!(matches!(empty.retrieve_topn(&v(&[0.0, 0.0]), 1), Err(MemoryError::EmptyIndex)));
        let idx = index(&[("a", [0.0, 0.0])]);
        assert!(matches!(idx.retrieve_topn(&v(&[0.0, 0.0]), 0), Err(MemoryError::InvalidN)));
        assert!(matches!(
            idx.retrieve_topn(&v(&[0.0]), 1),
            Err(MemoryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn majority_vote() {
        let idx = index(&[("click-button", [0.0, 0.0]), ("enter-date", [1.0, 0.0]), ("enter-date", [2.0, 0.0])]);
        let hits = idx.retrieve_topn(&v(&[0.0, 0.0]), 3).unwrap();
        assert_eq!(resolve_majority(&hits).unwrap(), "enter-date");

        let idx = index(&[("a", [2.0, 0.0]), ("b", [1.0, 0.0]), ("c", [3.0, 0.0])]);
        let hits = idx.retrieve_topn(&v(&[0.0, 0.0]), 3).unwrap();
        assert_eq!(resolve_majority(&hits).unwrap(), "b");
        assert_eq!(resolve_majority(&hits[..1]).unwrap(), "b");
        assert!(matches!(resolve_majority(&[]), Err(MemoryError::NoResults)));
    }

    #[test]
    fn metadata_builders() {
        let task = TaskSpec::new("t", "Book the cheapest flight", BenchmarkMode::Episodic);
        assert_eq!(
            build_metadata_miniwob(&task, &RawState::new("<div></div>", 0, 1)),
            "Book the cheapest flight\n<div></div>"
        );
        assert_eq!(build_metadata_miniwob(&task, &RawState::new("", 0, 1)), "Book the cheapest flight\n");

        let m2w = TaskSpec::new("m", "Add the cheapest SSD to my cart", BenchmarkMode::StaticDataset)
            .with_field("website", "newegg")
            .with_field("domain", "shopping")
            .with_field("description", "Add the cheapest SSD to my cart");
        assert_eq!(
            build_metadata_mind2web(&m2w).unwrap(),
            "website: newegg\ndomain: shopping\ntask: Add the cheapest SSD to my cart"
        );
        let blank = TaskSpec::new("m", "x", BenchmarkMode::StaticDataset)
            .with_field("website", "")
            .with_field("domain", "")
            .with_field("description", "");
        assert_eq!(build_metadata_mind2web(&blank).unwrap(), "website: \ndomain: \ntask: ");
        let missing = TaskSpec::new("m", "x", BenchmarkMode::StaticDataset)
            .with_field("website", "w")
            .with_field("description", "d");
        assert!(matches!(build_metadata_mind2web(&missing), Err(MemoryError::MissingField("domain"))));
    }

    #[test]
    fn embeddings_must_be_finite() {
        assert!(EmbeddingVector::new(vec![]).is_err());
        assert!(EmbeddingVector::new(vec![f32::NAN]).is_err());
        assert!(EmbeddingVector::new(vec![f32::INFINITY, 0.0]).is_err());
    }
}
