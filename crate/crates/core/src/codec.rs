//! Canonical JSON and the JSONL trajectory record format.
//!
//! Canonical form: object keys sorted bytewise, no insignificant whitespace,
//! UTF-8, minimal string escaping. Every trajectory record carries
//! `"schema_version": 1`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::model::Trajectory;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed record at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Invariant { field: String, message: String },
}

/// Serializes any value to canonical JSON text.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value is representable as JSON");
    let mut out = String::new();
    write_canonical(&value, &mut out);
    out
}

/// Writes `value` in canonical form, appending to `out`.
pub fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("string serializes"));
                out.push(':');
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalar serializes")),
    }
}

/// One JSONL record (with trailing newline) for `t`.
pub fn serialize_trajectory(t: &Trajectory) -> Vec<u8> {
    let mut value = serde_json::to_value(t).expect("trajectory is representable as JSON");
    value
        .as_object_mut()
        .expect("trajectory serializes to an object")
        .insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    let mut out = String::new();
    write_canonical(&value, &mut out);
    out.push('\n');
    out.into_bytes()
}

/// Parses one JSONL record and checks trajectory invariants.
pub fn deserialize_trajectory(bytes: &[u8]) -> Result<Trajectory, CodecError> {
    let mut value = parse_record(bytes)?;
    let obj = value.as_object_mut().ok_or_else(|| CodecError::Malformed {
        offset: 0,
        message: "record is not a JSON object".into(),
    })?;
    match obj.remove("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(CodecError::Invariant {
                field: "schema_version".into(),
                message: format!("unsupported version {other}"),
            })
        }
        None => {
            return Err(CodecError::Invariant {
                field: "schema_version".into(),
                message: "missing or not an integer".into(),
            })
        }
    }
    let t: Trajectory = from_value_with_path(value)?;
    t.validate()
        .map_err(|(field, message)| CodecError::Invariant { field, message })?;
    Ok(t)
}

/// Parses a single JSON line. A trailing `\n` (or `\r\n`) is accepted.
pub fn parse_record(bytes: &[u8]) -> Result<Value, CodecError> {
    let body = bytes
        .strip_suffix(b"\n")
        .map(|b| b.strip_suffix(b"\r").unwrap_or(b))
        .unwrap_or(bytes);
    if let Some(pos) = body.iter().position(|&b| b == b'\n') {
        return Err(CodecError::Malformed {
            offset: pos,
            message: "record spans more than one line".into(),
        });
    }
    serde_json::from_slice(body).map_err(|e| CodecError::Malformed {
        offset: error_offset(body, &e),
        message: e.to_string(),
    })
}

/// Deserializes `value`, reporting the failing field path on schema errors.
pub fn from_value_with_path<T: DeserializeOwned>(value: Value) -> Result<T, CodecError> {
    serde_path_to_error::deserialize(value).map_err(|e| CodecError::Invariant {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

// serde_json reports 1-based line/column; records are single-line so the
// column is the byte offset.
fn error_offset(body: &[u8], e: &serde_json::Error) -> usize {
    if e.is_eof() {
        return body.len();
    }
    e.column().saturating_sub(1).min(body.len())
}
