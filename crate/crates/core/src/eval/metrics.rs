use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Action;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{preds} predictions for {golds} gold steps")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("nothing to score")]
    Empty,
    #[error("task {0} has no step verdicts")]
    EmptyTask(usize),
}

/// Operation kinds of the id dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Operation {
    Click,
    Type,
    Select,
}

impl Operation {
    pub fn of(action: &Action) -> Option<Self> {
        match action {
            Action::Click { .. } => Some(Operation::Click),
            Action::TypeById { .. } => Some(Operation::Type),
            Action::SelectById { .. } => Some(Operation::Select),
            _ => None,
        }
    }
}

/// How TYPE and SELECT values are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMatch {
    /// Trim surrounding whitespace and compare case-insensitively.
    #[default]
    Normalized,
    Strict,
}

impl ValueMatch {
    pub fn eq(self, a: &str, b: &str) -> bool {
        match self {
            ValueMatch::Strict => a == b,
            ValueMatch::Normalized => a.trim().to_lowercase() == b.trim().to_lowercase(),
        }
    }
}

/// Ground truth for one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStep {
    pub element_id: u64,
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl GoldStep {
    /// The action this step records.
    pub fn action(&self) -> Action {
        let id = self.element_id;
        let value = self.value.clone().unwrap_or_default();
        match self.operation {
            Operation::Click => Action::Click { id },
            Operation::Type => Action::TypeById { id, value },
            Operation::Select => Action::SelectById { id, value },
        }
    }
}

fn check_lengths(preds: usize, golds: usize) -> Result<(), MetricsError> {
    if preds != golds {
        return Err(MetricsError::LengthMismatch { preds, golds });
    }
    if golds == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Fraction of steps whose predicted element id equals the gold id.
pub fn element_accuracy(preds: &[Option<u64>], golds: &[u64]) -> Result<f64, MetricsError> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds.iter().zip(golds).filter(|(p, g)| **p == Some(**g)).count();
    Ok(hits as f64 / golds.len() as f64)
}

/// Element, operation and (for TYPE/SELECT) value all agree.
pub fn step_correct(pred: Option<&Action>, gold: &GoldStep, values: ValueMatch) -> bool {
    let Some(pred) = pred else { return false };
    if pred.element_id() != Some(gold.element_id) || Operation::of(pred) != Some(gold.operation) {
        return false;
    }
    match (pred, &gold.value) {
        (Action::Click { .. }, _) => true,
        (Action::TypeById { value, .. } | Action::SelectById { value, .. }, Some(g)) => values.eq(value, g),
        _ => false,
    }
}

/// Micro-averaged step success over every step of the dataset.
pub fn step_success_rate(preds: &[Option<Action>], golds: &[GoldStep], values: ValueMatch) -> Result<f64, MetricsError> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| step_correct(p.as_ref(), g, values))
        .count();
    Ok(hits as f64 / golds.len() as f64)
}

/// Fraction of tasks whose steps are all correct.
pub fn task_success_rate(per_task: &[Vec<bool>]) -> Result<f64, MetricsError> {
    if per_task.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(i) = per_task.iter().position(Vec::is_empty) {
        return Err(MetricsError::EmptyTask(i));
    }
    let ok = per_task.iter().filter(|t| t.iter().all(|&v| v)).count();
    Ok(ok as f64 / per_task.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(id: u64, op: Operation, value: Option<&str>) -> GoldStep {
        GoldStep {
            element_id: id,
            operation: op,
            value: value.map(str::to_string),
        }
    }

    #[test]
    fn element_accuracy_counts() {
        let golds: Vec<u64> = (0..10).collect();
        let mut preds: Vec<Option<u64>> = golds.iter().map(|&g| Some(g)).collect();
        assert_eq!(element_accuracy(&preds, &golds).unwrap(), 1.0);
        for p in preds.iter_mut().skip(3) {
            *p = None;
        }
        assert_eq!(element_accuracy(&preds, &golds).unwrap(), 0.3);
        assert_eq!(
            element_accuracy(&preds[..2], &golds),
            Err(MetricsError::LengthMismatch { preds: 2, golds: 10 })
        );
    }

    #[test]
    fn step_correctness() {
        let g = gold(5, Operation::Type, Some("western digital"));
        let typed = |v: &str| Action::TypeById { id: 5, value: v.into() };
        assert!(step_correct(Some(&typed("Western digital ")), &g, ValueMatch::Normalized));
        assert!(!step_correct(Some(&typed("Western digital ")), &g, ValueMatch::Strict));
        assert!(!step_correct(Some(&Action::Click { id: 5 }), &g, ValueMatch::Normalized));
        assert!(!step_correct(None, &g, ValueMatch::Normalized));
        assert!(step_correct(Some(&Action::Click { id: 1 }), &gold(1, Operation::Click, None), ValueMatch::Strict));
    }

    #[test]
    fn task_success() {
        let tasks = vec![vec![true, true], vec![true, false], vec![true], vec![false], vec![false, false]];
        assert_eq!(task_success_rate(&tasks).unwrap(), 0.4);
        assert_eq!(task_success_rate(&[vec![true], vec![]]), Err(MetricsError::EmptyTask(1)));
    }
}
