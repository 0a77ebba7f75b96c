//! `trajmem`: ingest demonstrations, inspect memory, assemble prompts, run
//! episodes and score static datasets.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 model backend.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{AgentFlags, BackendSettings, EvalSettings, IngestSettings, PromptSettings, QuerySettings, ReportSettings, RunSettings, StaticFlags};

/// A mistake in how the tool was invoked (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_BACKEND: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "trajmem", version, about = "Exemplar-memory web agent toolkit")]
pub struct Cli {
    /// Directory that every relative path is resolved against.
    #[arg(long, global = true, env = "TRAJMEM_ROOT")]
    pub root: Option<PathBuf>,
    /// TOML file with default settings (flags and environment win).
    #[arg(long, global = true, env = "TRAJMEM_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendSettings,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed demonstrations and persist them as a memory directory.
    Ingest(IngestSettings),
    /// Print the nearest memory entries for a query text.
    MemoryQuery(QuerySettings),
    /// Assemble a prompt from exemplars and a current trajectory.
    Prompt(PromptSettings),
    /// Run closed-loop episodes in a built-in environment.
    Run {
        #[command(flatten)]
        settings: RunSettings,
        #[command(flatten)]
        agent: AgentFlags,
    },
    /// Score a static dataset.
    Eval {
        #[command(flatten)]
        settings: EvalSettings,
        #[command(flatten)]
        scoring: StaticFlags,
    },
    /// Render a JSON report as a table.
    Report(ReportSettings),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use trajmem_core::abstraction::AbstractionError;
    use trajmem_core::eval::EvalError;
    use trajmem_core::ingest::IngestError;
    use trajmem_core::llm::LlmError;
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return if e.is_backend() { EXIT_BACKEND } else { EXIT_DATA };
        }
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            return if e.is_backend() { EXIT_BACKEND } else { EXIT_DATA };
        }
        if let Some(e) = cause.downcast_ref::<LlmError>() {
            return if matches!(e, LlmError::Script(_)) { EXIT_DATA } else { EXIT_BACKEND };
        }
        if let Some(AbstractionError::Llm(_)) = cause.downcast_ref::<AbstractionError>() {
            return EXIT_BACKEND;
        }
    }
    EXIT_DATA
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
