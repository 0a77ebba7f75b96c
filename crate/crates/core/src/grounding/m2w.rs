use super::GroundingError;
use crate::model::{Action, ActionBlock};

/// Parses the first `` `OP [id]` `` or `` `OP [id] [value]` `` span.
///
/// Anything outside the backticks, such as a parenthesised rationale, is
/// ignored. Values are returned untrimmed.
pub fn parse_m2w_action(response: &str) -> Result<Action, GroundingError> {
    let mismatch = || GroundingError::PatternMismatch(response.chars().take(80).collect());
    let open = response.find('`').ok_or_else(mismatch)?;
    let rest = &response[open + 1..];
    let close = rest.find('`').ok_or_else(mismatch)?;
    let span = &rest[..close];

    let (op, args) = span.trim_start().split_once(char::is_whitespace).ok_or_else(mismatch)?;
    let op: &'static str = match op {
        "CLICK" => "CLICK",
        "TYPE" => "TYPE",
        "SELECT" => "SELECT",
        _ => return Err(mismatch()),
    };
    let args = args.trim_start();
    let inner = args.strip_prefix('[').ok_or_else(mismatch)?;
    let id_end = inner.find(']').ok_or_else(mismatch)?;
    let id_text = &inner[..id_end];
    let id: u64 = id_text.trim().parse().map_err(|_| GroundingError::NonIntegerId(id_text.into()))?;
    let after = inner[id_end + 1..].trim_start();

    let value = if after.is_empty() {
        None
    } else {
        let v = after.strip_prefix('[').and_then(|v| v.trim_end().strip_suffix(']')).ok_or_else(mismatch)?;
        Some(v.to_string())
    };
    match (op, value) {
        ("CLICK", None) => Ok(Action::Click { id }),
        ("CLICK", Some(_)) => Err(mismatch()),
        ("TYPE", Some(value)) => Ok(Action::TypeById { id, value }),
        ("SELECT", Some(value)) => Ok(Action::SelectById { id, value }),
        (op, None) => Err(GroundingError::MissingValue(op)),
        _ => unreachable!(),
    }
}

/// Single-action block; raw text is the response minus a leading `Action:`.
pub fn parse_m2w_block(response: &str) -> Result<ActionBlock, GroundingError> {
    let action = parse_m2w_action(response)?;
    let trimmed = response.trim();
    let raw = trimmed.strip_prefix("Action:").map_or(trimmed, str::trim_start);
    Ok(ActionBlock::new(vec![action], raw, Vec::new()).expect("one action"))
}
