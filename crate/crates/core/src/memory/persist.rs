//! On-disk layout:
//!
//! - `manifest.json`: canonical JSON with dim, file names and per-entry metadata
//! - `keys.f32le`: row-major key matrix, little-endian `f32`
//! - `exemplars.jsonl`: every entry's exemplars, one trajectory per line

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EmbeddingVector, MemoryEntry, MemoryError, MemoryIndex};
use crate::abstraction::AbstractionPrompt;
use crate::codec::{self, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const KEYS_FILE: &str = "keys.f32le";
pub const EXEMPLARS_FILE: &str = "exemplars.jsonl";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    schema_version: u64,
    dim: usize,
    keys_file: String,
    exemplars_file: String,
    entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    key_text: String,
    group_id: String,
    insertion_index: u64,
    exemplar_offset: usize,
    exemplar_count: usize,
    abstraction_prompts: Vec<AbstractionPrompt>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MemoryError + '_ {
    move |source| MemoryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `index` into directory `dir`, creating it if needed.
pub fn persist(index: &MemoryIndex, dir: &Path) -> Result<(), MemoryError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut keys = Vec::with_capacity(index.len() * index.dim() * 4);
    let mut exemplars = Vec::new();
    let mut entries = Vec::with_capacity(index.len());
    let mut offset = 0;
    for e in index.entries() {
        for v in e.key.values() {
            keys.extend_from_slice(&v.to_le_bytes());
        }
        for t in &e.exemplars {
            exemplars.extend_from_slice(&codec::serialize_trajectory(t));
        }
        entries.push(ManifestEntry {
            key_text: e.key_text.clone(),
            group_id: e.group_id.clone(),
            insertion_index: e.insertion_index,
            exemplar_offset: offset,
            exemplar_count: e.exemplars.len(),
            abstraction_prompts: e.abstraction_prompts.clone(),
        });
        offset += e.exemplars.len();
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        dim: index.dim(),
        keys_file: KEYS_FILE.into(),
        exemplars_file: EXEMPLARS_FILE.into(),
        entries,
    };
    let mut text = codec::to_canonical_string(&manifest);
    text.push('\n');
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    };
    write(KEYS_FILE, &keys)?;
    write(EXEMPLARS_FILE, &exemplars)?;
    write(MANIFEST_FILE, text.as_bytes())
}

fn read(path: PathBuf) -> Result<Vec<u8>, MemoryError> {
    fs::read(&path).map_err(|e| {
        if e.kind() == ErrorKind::NotFound {
            MemoryError::MissingFile(path.clone())
        } else {
            MemoryError::Io {
                path: path.clone(),
                source: e,
            }
        }
    })
}

fn plain_name(name: &str) -> Result<&str, MemoryError> {
    let p = Path::new(name);
    if p.components().count() != 1 || p.is_absolute() || name == ".." {
        return Err(MemoryError::Corrupt(format!("file name {name:?} must be a plain relative name")));
    }
    Ok(name)
}

/// Loads a directory written by [`persist`].
pub fn load(dir: &Path) -> Result<MemoryIndex, MemoryError> {
    let manifest_bytes = read(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_slice(&manifest_bytes)
        .map_err(|e| MemoryError::Corrupt(format!("{MANIFEST_FILE}: {e}")))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(MemoryError::Corrupt(format!(
            "unsupported schema_version {}",
            manifest.schema_version
        )));
    }
    if manifest.dim == 0 {
        return Err(MemoryError::Corrupt("dim must be positive".into()));
    }
    let dim = manifest.dim;
    let keys = read(dir.join(plain_name(&manifest.keys_file)?))?;
    let expected = manifest.entries.len() * dim * 4;
    if keys.len() != expected {
        return Err(MemoryError::Corrupt(format!(
            "{} holds {} bytes but {} entries of dim {dim} need {expected}",
            manifest.keys_file,
            keys.len(),
            manifest.entries.len()
        )));
    }
    let exemplar_text = read(dir.join(plain_name(&manifest.exemplars_file)?))?;
    let mut trajectories = Vec::new();
    for (line_no, line) in exemplar_text.split_inclusive(|&b| b == b'\n').enumerate() {
        let t = codec::deserialize_trajectory(line)
            .map_err(|e| MemoryError::Corrupt(format!("{} line {}: {e}", manifest.exemplars_file, line_no + 1)))?;
        trajectories.push(t);
    }

    let mut index = MemoryIndex::new(dim);
    let mut rows = keys.chunks_exact(dim * 4);
    for (i, m) in manifest.entries.into_iter().enumerate() {
        let row = rows.next().expect("length checked above");
        let values = row
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        let key = EmbeddingVector::new(values)
            .map_err(|_| MemoryError::Corrupt(format!("entry {i}: non-finite key")))?;
        let end = m.exemplar_offset.checked_add(m.exemplar_count);
        let exemplars = match end {
            Some(end) if end <= trajectories.len() => trajectories[m.exemplar_offset..end].to_vec(),
            _ => {
                return Err(MemoryError::Corrupt(format!(
                    "entry {i}: exemplar range {}+{} out of bounds",
                    m.exemplar_offset, m.exemplar_count
                )))
            }
        };
        if index.entries.last().is_some_and(|last| last.insertion_index >= m.insertion_index) {
            return Err(MemoryError::Corrupt(format!("entry {i}: insertion_index not increasing")));
        }
        if m.group_id.is_empty() {
            return Err(MemoryError::Corrupt(format!("entry {i}: empty group_id")));
        }
        if let Some(t) = exemplars.iter().find(|t| !t.is_success()) {
            return Err(MemoryError::Corrupt(format!("entry {i}: exemplar {} is not successful", t.id())));
        }
        index.entries.push(MemoryEntry {
            key_text: m.key_text,
            key,
            group_id: m.group_id,
            exemplars,
            abstraction_prompts: m.abstraction_prompts,
            insertion_index: m.insertion_index,
        });
    }
    Ok(index)
}
