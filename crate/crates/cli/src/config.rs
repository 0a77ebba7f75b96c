//! Layered settings: flags and environment (both handled by clap) override
//! the TOML config file, which overrides built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use trajmem_core::{AgentConfig, StaticConfig};

use crate::Usage;

/// Fills every `None` field of `$hi` from `$lo`.
macro_rules! layer {
    ($hi:expr, $lo:expr; $($f:ident),+ $(,)?) => {
        $( if $hi.$f.is_none() { $hi.$f = $lo.$f.clone(); } )+
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSettings {
    /// Scripted backend file (YAML); takes priority over --endpoint.
    #[arg(long, global = true, env = "TRAJMEM_SCRIPT")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
    /// Base URL of a chat-completion style HTTP endpoint.
    #[arg(long, global = true, env = "TRAJMEM_ENDPOINT")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[arg(long, global = true, env = "TRAJMEM_MODEL")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long, global = true, env = "TRAJMEM_EMBED_MODEL")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embed_model: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u32>,
    /// Key dimension used when a memory is built from zero records.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_dim: Option<usize>,
}

impl BackendSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; script, endpoint, model, embed_model, temperature, max_output_tokens, embedding_dim);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IngestMode {
    #[default]
    Miniwob,
    Mind2web,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    /// Demonstrations (JSONL).
    #[arg(long)]
    pub demos: Option<PathBuf>,
    /// Output memory directory.
    #[arg(long, env = "TRAJMEM_MEMORY")]
    pub memory: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<IngestMode>,
    /// Elements kept per observation of static exemplars.
    #[arg(long)]
    pub k_prev: Option<usize>,
}

impl IngestSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; demos, memory, mode, k_prev);
        self.mode.get_or_insert_with(IngestMode::default);
        self.k_prev.get_or_insert(StaticConfig::default().k_prev);
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuerySettings {
    #[arg(long, env = "TRAJMEM_MEMORY")]
    pub memory: Option<PathBuf>,
    /// Text to embed and look up.
    #[arg(long)]
    pub query: Option<String>,
    /// Number of neighbours.
    #[arg(short = 'n', long = "top")]
    pub n: Option<usize>,
    /// Also print the majority-vote group.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub resolve: Option<bool>,
}

impl QuerySettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; memory, query, n, resolve);
        self.n.get_or_insert(3);
        self.resolve.get_or_insert(false);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PromptModeArg {
    #[default]
    Miniwob,
    Mind2web,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSettings {
    /// Exemplar trajectories (JSONL), in prompt order.
    #[arg(long)]
    pub exemplars: Option<PathBuf>,
    /// Current partial trajectory (JSON).
    #[arg(long)]
    pub current: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<PromptModeArg>,
    /// Token budget.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Print the assembled prompt instead of calling the model.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dry_run: Option<bool>,
}

impl PromptSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; exemplars, current, mode, budget, dry_run);
        self.mode.get_or_insert_with(PromptModeArg::default);
        self.budget.get_or_insert(AgentConfig::default().prompt_budget);
        self.dry_run.get_or_insert(false);
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    /// Environment name.
    #[arg(long)]
    pub env: Option<String>,
    /// Inclusive seed range `a..b`, or a single seed.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Memory directory built by `ingest`.
    #[arg(long, env = "TRAJMEM_MEMORY")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory: Option<PathBuf>,
    /// Demonstrations (JSONL) ingested in memory before the run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demos: Option<PathBuf>,
    #[arg(long, env = "TRAJMEM_WORKERS")]
    pub workers: Option<usize>,
    /// Write per-episode results (JSONL) here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; env, seeds, memory, demos, workers, out);
        self.workers.get_or_insert(1);
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Test records (JSONL).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, env = "TRAJMEM_MEMORY")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory: Option<PathBuf>,
    /// Training records (JSONL) ingested in memory before scoring.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[arg(long, env = "TRAJMEM_WORKERS")]
    pub workers: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl EvalSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; dataset, memory, train, workers, out);
        self.workers.get_or_insert(1);
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    /// JSON report written by `eval`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

impl ReportSettings {
    pub fn layer(&mut self, lo: &Self) {
        layer!(self, lo; report);
    }
}

/// Agent overrides applied on top of the `[agent]` table.
#[derive(Debug, Clone, Default, Args)]
pub struct AgentFlags {
    #[arg(long)]
    pub max_steps: Option<u32>,
    #[arg(long)]
    pub retrieve_n: Option<usize>,
    #[arg(long)]
    pub prompt_budget: Option<u64>,
    #[arg(long)]
    pub observation_budget: Option<usize>,
}

impl AgentFlags {
    pub fn apply(&self, cfg: &mut AgentConfig) {
        if let Some(v) = self.max_steps {
            cfg.max_steps = v;
        }
        if let Some(v) = self.retrieve_n {
            cfg.retrieve_n = v;
        }
        if let Some(v) = self.prompt_budget {
            cfg.prompt_budget = v;
        }
        if let Some(v) = self.observation_budget {
            cfg.observation_budget = v;
        }
    }
}

/// Scoring overrides applied on top of the `[static]` table.
#[derive(Debug, Clone, Default, Args)]
pub struct StaticFlags {
    #[arg(long)]
    pub k_prev: Option<usize>,
    #[arg(long)]
    pub k_cur: Option<usize>,
    #[arg(long = "retrieve-n")]
    pub retrieve_n: Option<usize>,
    #[arg(long = "prompt-budget")]
    pub prompt_budget: Option<u64>,
}

impl StaticFlags {
    pub fn apply(&self, cfg: &mut StaticConfig) {
        if let Some(v) = self.k_prev {
            cfg.k_prev = v;
        }
        if let Some(v) = self.k_cur {
            cfg.k_cur = v;
        }
        if let Some(v) = self.retrieve_n {
            cfg.retrieve_n = v;
        }
        if let Some(v) = self.prompt_budget {
            cfg.prompt_budget = v;
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub root: Option<PathBuf>,
    pub backend: BackendSettings,
    pub ingest: IngestSettings,
    #[serde(rename = "memory-query")]
    pub memory_query: QuerySettings,
    pub prompt: PromptSettings,
    pub run: RunSettings,
    pub eval: EvalSettings,
    pub report: ReportSettings,
    pub agent: AgentConfig,
    #[serde(rename = "static")]
    pub static_eval: StaticConfig,
}

impl FileConfig {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow::Error::new(Usage(format!("config {}: {e}", path.display()))))
    }
}

/// The settings a command actually used; printing it as TOML and passing
/// it back with `--config` reproduces the run.
#[derive(Debug, Clone, Serialize)]
pub struct Effective<'a> {
    pub root: &'a Path,
    pub backend: &'a BackendSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ingest: Option<&'a IngestSettings>,
    #[serde(rename = "memory-query", skip_serializing_if = "Option::is_none")]
    pub memory_query: Option<&'a QuerySettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<&'a PromptSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<&'a RunSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<&'a EvalSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<&'a ReportSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<&'a AgentConfig>,
    #[serde(rename = "static", skip_serializing_if = "Option::is_none")]
    pub static_eval: Option<&'a StaticConfig>,
}

pub const BLOCK_START: &str = "# --- effective config ---";
pub const BLOCK_END: &str = "# --- end effective config ---";

impl<'a> Effective<'a> {
    pub fn new(root: &'a Path, backend: &'a BackendSettings) -> Self {
        Self {
            root,
            backend,
            ingest: None,
            memory_query: None,
            prompt: None,
            run: None,
            eval: None,
            report: None,
            agent: None,
            static_eval: None,
        }
    }

    pub fn render(&self) -> anyhow::Result<String> {
        let body = toml::to_string(self).context("serializing effective config")?;
        Ok(format!("{BLOCK_START}\n{}\n{BLOCK_END}\n", body.trim_end()))
    }
}

/// Inclusive seed range: `a..b` or a single number.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, Usage> {
    let bad = || Usage(format!("invalid seed range {text:?} (expected a..b or n)"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n: u64 = text.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges_are_inclusive() {
        assert_eq!(parse_seeds("0..49").unwrap().len(), 50);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert!(parse_seeds("5..2").is_err());
        assert!(parse_seeds("a..b").is_err());
    }

    #[test]
    fn flags_win_over_file_values() {
        let mut flags = RunSettings {
            env: Some("terminal".into()),
            ..RunSettings::default()
        };
        let file = RunSettings {
            env: Some("book-flight".into()),
            seeds: Some("0..3".into()),
            ..RunSettings::default()
        };
        flags.layer(&file);
        assert_eq!(flags.env.as_deref(), Some("terminal"));
        assert_eq!(flags.seeds.as_deref(), Some("0..3"));
        assert_eq!(flags.workers, Some(1));
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let err = toml::from_str::<FileConfig>("[run]\nenvv = 'x'\n").unwrap_err();
        assert!(err.to_string().contains("envv"));
        let ok: FileConfig = toml::from_str("[agent]\nmax_steps = 4\n[static]\nk_cur = 7\n").unwrap();
        assert_eq!((ok.agent.max_steps, ok.static_eval.k_cur), (4, 7));
    }
}
