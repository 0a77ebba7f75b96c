//! Building an exemplar memory from demonstration files.
//!
//! Episodic demos are JSON lines of [`DemoRecord`]; static datasets reuse
//! [`StaticRecord`] lines from the training split.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::AbstractionPrompt;
use crate::codec::{from_value_with_path, parse_record, CodecError, SCHEMA_VERSION};
use crate::eval::{record_to_exemplar, EvalError, StaticRecord};
use crate::llm::{Gateway, LlmError};
use crate::memory::{build_metadata_miniwob, build_metadata_mind2web, MemoryError, MemoryIndex};
use crate::model::{RawState, Trajectory};

/// One successful demonstration plus the prompts used to abstract its states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoRecord {
    pub schema_version: u64,
    pub group_id: String,
    pub initial_state: RawState,
    pub trajectory: Trajectory,
    #[serde(default)]
    pub abstraction_prompts: Vec<AbstractionPrompt>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("record {index}: {source}")]
    Decode {
        index: usize,
        #[source]
        source: CodecError,
    },
    #[error("record {index}: unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    Version { index: usize, found: u64 },
    #[error("record {index}: {source}")]
    Memory {
        index: usize,
        #[source]
        source: MemoryError,
    },
    #[error("record {index}: {source}")]
    Exemplar {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("record {index}: {source}")]
    Embedding {
        index: usize,
        #[source]
        source: LlmError,
    },
}

impl IngestError {
    pub fn is_backend(&self) -> bool {
        matches!(self, IngestError::Embedding { .. })
    }
}

/// Parses JSON lines, skipping blank ones. Errors carry the 0-based record index.
pub fn parse_lines<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>, IngestError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(index, line)| {
            let value = parse_record(line.as_bytes()).map_err(|source| IngestError::Decode { index, source })?;
            from_value_with_path(value).map_err(|source| IngestError::Decode { index, source })
        })
        .collect()
}

pub fn parse_demos(text: &str) -> Result<Vec<DemoRecord>, IngestError> {
    let records: Vec<DemoRecord> = parse_lines(text)?;
    for (index, r) in records.iter().enumerate() {
        if r.schema_version != SCHEMA_VERSION {
            return Err(IngestError::Version {
                index,
                found: r.schema_version,
            });
        }
    }
    Ok(records)
}

/// Memory over episodic demos, keyed by task description plus initial page.
///
/// `empty_dim` is the dimension of the index when there are no records.
pub fn ingest_demos(records: &[DemoRecord], gateway: &Gateway, empty_dim: usize) -> Result<MemoryIndex, IngestError> {
    let mut index: Option<MemoryIndex> = None;
    for (i, r) in records.iter().enumerate() {
        let key_text = build_metadata_miniwob(&r.trajectory.task, &r.initial_state);
        let key = gateway
            .embed(&key_text)
            .map_err(|source| IngestError::Embedding { index: i, source })?;
        let memory = index.get_or_insert_with(|| MemoryIndex::new(key.dim()));
        memory
            .insert(key_text, key, r.group_id.clone(), vec![r.trajectory.clone()], r.abstraction_prompts.clone())
            .map_err(|source| IngestError::Memory { index: i, source })?;
    }
    Ok(index.unwrap_or_else(|| MemoryIndex::new(empty_dim)))
}

/// Memory over static training records; each task forms its own group.
pub fn ingest_static(
    records: &[StaticRecord],
    gateway: &Gateway,
    k_prev: usize,
    empty_dim: usize,
) -> Result<MemoryIndex, IngestError> {
    let mut index: Option<MemoryIndex> = None;
    for (i, r) in records.iter().enumerate() {
        let key_text = build_metadata_mind2web(&r.task).map_err(|source| IngestError::Memory { index: i, source })?;
        let exemplar = record_to_exemplar(r, k_prev).map_err(|source| IngestError::Exemplar { index: i, source })?;
        let key = gateway
            .embed(&key_text)
            .map_err(|source| IngestError::Embedding { index: i, source })?;
        let memory = index.get_or_insert_with(|| MemoryIndex::new(key.dim()));
        memory
            .insert(key_text, key, r.task.id.clone(), vec![exemplar], Vec::new())
            .map_err(|source| IngestError::Memory { index: i, source })?;
    }
    Ok(index.unwrap_or_else(|| MemoryIndex::new(empty_dim)))
}
