use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::metrics::{element_accuracy, step_correct, step_success_rate, task_success_rate, GoldStep, ValueMatch};
use super::EvalError;
use crate::abstraction::ranking::{filter_topk, recall_at_k, RankedElement};
use crate::codec::SCHEMA_VERSION;
use crate::grounding::parse_m2w_action;
use crate::llm::{Backend, Gateway, ModelProfile};
use crate::memory::{build_metadata_mind2web, MemoryIndex};
use crate::model::{Action, ActionBlock, Outcome, Step, TaskSpec, Trajectory};
use crate::prompting::{build_episode_prompt, build_system_prompt, PartialTrajectory, PromptMode, PromptOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    CrossTask,
    CrossWebsite,
    CrossDomain,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::CrossTask, Split::CrossWebsite, Split::CrossDomain];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::CrossTask => "cross-task",
            Split::CrossWebsite => "cross-website",
            Split::CrossDomain => "cross-domain",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Split::CrossTask => "Cross-Task",
            Split::CrossWebsite => "Cross-Website",
            Split::CrossDomain => "Cross-Domain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticStep {
    pub ranking: Vec<RankedElement>,
    #[serde(flatten)]
    pub gold: GoldStep,
}

/// One annotated task of a static dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticRecord {
    pub task: TaskSpec,
    pub split: Split,
    pub steps: Vec<StaticStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticConfig {
    /// Elements kept for observations already acted on.
    pub k_prev: usize,
    /// Elements kept for the observation awaiting an action.
    pub k_cur: usize,
    pub retrieve_n: usize,
    pub prompt_budget: u64,
    pub value_match: ValueMatch,
    pub recall_ks: Vec<usize>,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self {
            k_prev: 3,
            k_cur: 5,
            retrieve_n: 3,
            prompt_budget: 16_384,
            value_match: ValueMatch::Normalized,
            recall_ks: vec![3, 5, 10, 50],
        }
    }
}

/// Scores for one split, or for the whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub tasks: usize,
    pub steps: usize,
    pub ele_acc: f64,
    /// Micro-averaged over all steps.
    pub step_sr: f64,
    pub sr: f64,
    pub mean_top1_retrieval_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u64,
    pub tasks: usize,
    pub steps: usize,
    pub ele_acc: f64,
    pub step_sr: f64,
    pub sr: f64,
    pub mean_top1_retrieval_distance: Option<f64>,
    /// Keyed by k.
    pub recall_at_k: BTreeMap<String, f64>,
    pub splits: BTreeMap<String, SplitReport>,
    pub step_sr_average: String,
    pub value_match: ValueMatch,
}

/// Gold action in the id dialect, e.g. `` `TYPE [5] [ssd]` ``.
pub fn render_m2w(gold: &GoldStep) -> String {
    match &gold.value {
        Some(v) if gold.operation != super::Operation::Click => {
            format!("`{} [{}] [{v}]`", op_name(gold.operation), gold.element_id)
        }
        _ => format!("`{} [{}]`", op_name(gold.operation), gold.element_id),
    }
}

fn op_name(op: super::Operation) -> &'static str {
    match op {
        super::Operation::Click => "CLICK",
        super::Operation::Type => "TYPE",
        super::Operation::Select => "SELECT",
    }
}

fn gold_block(gold: &GoldStep) -> ActionBlock {
    ActionBlock::new(vec![gold.action()], render_m2w(gold), Vec::new()).expect("one action")
}

/// A training record as a stored exemplar, with observations filtered to `k`.
pub fn record_to_exemplar(record: &StaticRecord, k: usize) -> Result<Trajectory, EvalError> {
    let steps = record
        .steps
        .iter()
        .map(|s| {
            Ok(Step {
                observation: filter_topk(&s.ranking, k)?,
                action_block: gold_block(&s.gold),
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(Trajectory {
        task: record.task.clone(),
        steps,
        outcome: Outcome::Success,
    })
}

struct RecordOutcome {
    split: Split,
    preds: Vec<Option<Action>>,
    top1: Option<f64>,
}

fn evaluate_record(
    record: &StaticRecord,
    memory: &MemoryIndex,
    gateway: &Gateway,
    cfg: &StaticConfig,
) -> Result<RecordOutcome, EvalError> {
    let (exemplars, top1) = if memory.is_empty() {
        (Vec::new(), None)
    } else {
        let query = gateway.embed(&build_metadata_mind2web(&record.task)?)?;
        let results = memory.retrieve_topn(&query, cfg.retrieve_n)?;
        let top1 = results.first().map(|r| r.distance);
        (results.iter().flat_map(|r| r.entry.exemplars.iter().cloned()).collect(), top1)
    };
    let system = build_system_prompt(PromptMode::Mind2web);
    let opts = PromptOptions::new(PromptMode::Mind2web, cfg.prompt_budget);
    let mut preds = Vec::with_capacity(record.steps.len());
    for (i, step) in record.steps.iter().enumerate() {
        let mut partial = PartialTrajectory {
            task: record.task.clone(),
            steps: Vec::with_capacity(i),
            pending: Some(filter_topk(&step.ranking, cfg.k_cur)?),
        };
        for prev in &record.steps[..i] {
            partial.steps.push(Step {
                observation: filter_topk(&prev.ranking, cfg.k_prev)?,
                action_block: gold_block(&prev.gold),
            });
        }
        let bundle = build_episode_prompt(&system, &exemplars, &partial, &opts)?;
        let stops: Vec<&str> = bundle.stop_tokens.iter().map(String::as_str).collect();
        let response = gateway.complete(&bundle.messages, &stops)?;
        preds.push(parse_m2w_action(&response).ok());
    }
    Ok(RecordOutcome {
        split: record.split,
        preds,
        top1,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(records: &[&StaticRecord], outcomes: &[&RecordOutcome], values: ValueMatch) -> Result<SplitReport, EvalError> {
    let golds: Vec<&GoldStep> = records.iter().flat_map(|r| r.steps.iter().map(|s| &s.gold)).collect();
    let preds: Vec<Option<Action>> = outcomes.iter().flat_map(|o| o.preds.iter().cloned()).collect();
    let pred_ids: Vec<Option<u64>> = preds.iter().map(|p| p.as_ref().and_then(Action::element_id)).collect();
    let gold_ids: Vec<u64> = golds.iter().map(|g| g.element_id).collect();
    let gold_steps: Vec<GoldStep> = golds.iter().map(|g| (*g).clone()).collect();
    let per_task: Vec<Vec<bool>> = records
        .iter()
        .zip(outcomes)
        .map(|(r, o)| {
            r.steps
                .iter()
                .zip(&o.preds)
                .map(|(s, p)| step_correct(p.as_ref(), &s.gold, values))
                .collect()
        })
        .collect();
    Ok(SplitReport {
        tasks: records.len(),
        steps: golds.len(),
        ele_acc: element_accuracy(&pred_ids, &gold_ids)?,
        step_sr: step_success_rate(&preds, &gold_steps, values)?,
        sr: task_success_rate(&per_task)?,
        mean_top1_retrieval_distance: mean(outcomes.iter().filter_map(|o| o.top1)),
    })
}

/// Fails if any test task's metadata is literally a memory key.
pub fn check_split_isolation(dataset: &[StaticRecord], memory: &MemoryIndex) -> Result<(), EvalError> {
    let keys: HashSet<&str> = memory.entries().iter().map(|e| e.key_text.as_str()).collect();
    for record in dataset {
        if keys.contains(build_metadata_mind2web(&record.task)?.as_str()) {
            return Err(EvalError::SplitLeakage(record.task.id.clone()));
        }
    }
    Ok(())
}

/// Scores a static dataset with one completion per step.
///
/// Records are spread over `workers` threads, each with its own gateway;
/// aggregation happens afterwards in dataset order.
pub fn evaluate_static(
    dataset: &[StaticRecord],
    memory: &MemoryIndex,
    backend: Arc<dyn Backend>,
    profile: &ModelProfile,
    cfg: &StaticConfig,
    workers: usize,
) -> Result<EvalReport, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if let Some(r) = dataset.iter().find(|r| r.steps.is_empty()) {
        return Err(EvalError::EmptyRecord(r.task.id.clone()));
    }
    check_split_isolation(dataset, memory)?;

    let workers = workers.max(1).min(dataset.len());
    let mut slots: Vec<Option<Result<RecordOutcome, EvalError>>> = (0..dataset.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let backend = Arc::clone(&backend);
                scope.spawn(move || {
                    let gateway = Gateway::new(backend, profile.clone());
                    (w..dataset.len())
                        .step_by(workers)
                        .map(|i| (i, evaluate_record(&dataset[i], memory, &gateway, cfg)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("evaluation worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    let outcomes = slots
        .into_iter()
        .map(|s| s.expect("every record ran"))
        .collect::<Result<Vec<_>, _>>()?;

    let all_records: Vec<&StaticRecord> = dataset.iter().collect();
    let all_outcomes: Vec<&RecordOutcome> = outcomes.iter().collect();
    let overall = summarize(&all_records, &all_outcomes, cfg.value_match)?;
    let mut splits = BTreeMap::new();
    for split in Split::ALL {
        let (records, outs): (Vec<&StaticRecord>, Vec<&RecordOutcome>) =
            dataset.iter().zip(&outcomes).filter(|(_, o)| o.split == split).unzip();
        if !records.is_empty() {
            splits.insert(split.as_str().to_string(), summarize(&records, &outs, cfg.value_match)?);
        }
    }
    let ranked: Vec<(Vec<RankedElement>, u64)> = dataset
        .iter()
        .flat_map(|r| r.steps.iter().map(|s| (s.ranking.clone(), s.gold.element_id)))
        .collect();
    let mut recall = BTreeMap::new();
    for &k in &cfg.recall_ks {
        recall.insert(k.to_string(), recall_at_k(&ranked, k)?);
    }
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        tasks: overall.tasks,
        steps: overall.steps,
        ele_acc: overall.ele_acc,
        step_sr: overall.step_sr,
        sr: overall.sr,
        mean_top1_retrieval_distance: overall.mean_top1_retrieval_distance,
        recall_at_k: recall,
        splits,
        step_sr_average: "micro".into(),
        value_match: cfg.value_match,
    })
}

fn pct(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

/// Fixed-width table with one row per split present plus an overall row.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>6} {:>6} {:>9} {:>8} {:>6} {:>11}",
        "Split", "Tasks", "Steps", "Ele. Acc", "Step SR", "SR", "Top-1 dist"
    );
    let row = |out: &mut String, name: &str, r: &SplitReport| {
        let dist = r.mean_top1_retrieval_distance.map_or_else(|| "-".to_string(), |d| format!("{d:.3}"));
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>6} {:>9} {:>8} {:>6} {:>11}",
            name,
            r.tasks,
            r.steps,
            pct(r.ele_acc),
            pct(r.step_sr),
            pct(r.sr),
            dist
        );
    };
    for split in Split::ALL {
        if let Some(r) = report.splits.get(split.as_str()) {
            row(&mut out, split.title(), r);
        }
    }
    let overall = SplitReport {
        tasks: report.tasks,
        steps: report.steps,
        ele_acc: report.ele_acc,
        step_sr: report.step_sr,
        sr: report.sr,
        mean_top1_retrieval_distance: report.mean_top1_retrieval_distance,
    };
    row(&mut out, "Overall", &overall);
    let mut ks: Vec<(usize, f64)> = report
        .recall_at_k
        .iter()
        .filter_map(|(k, v)| k.parse().ok().map(|k| (k, *v)))
        .collect();
    ks.sort_by_key(|(k, _)| *k);
    let recall: Vec<String> = ks.iter().map(|(k, v)| format!("@{k}={v:.2}")).collect();
    let _ = writeln!(out, "recall {}", recall.join(" "));
    let _ = writeln!(out, "step SR is micro-averaged over steps; values compared {}", match report.value_match {
        ValueMatch::Normalized => "after trim and case-fold",
        ValueMatch::Strict => "exactly",
    });
    out
}
