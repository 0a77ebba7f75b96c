use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use trajmem_core::codec::{deserialize_trajectory, from_value_with_path, parse_record, to_canonical_string};
use trajmem_core::eval::{evaluate_static, render_table, run_episodes, EpisodeSummary};
use trajmem_core::ingest::{ingest_demos, ingest_static, parse_demos, parse_lines};
use trajmem_core::llm::{HttpBackend, HttpConfig, ScriptedBackend};
use trajmem_core::memory::{self, resolve_majority, DEFAULT_DIM};
use trajmem_core::prompting::{build_episode_prompt, build_system_prompt, PromptOptions};
use trajmem_core::{AgentConfig, Backend, EvalReport, Gateway, MemoryIndex, ModelProfile, PartialTrajectory, PromptMode, StaticConfig, StaticRecord};

use crate::config::{parse_seeds, BackendSettings, Effective, FileConfig, IngestMode, PromptModeArg};
use crate::{Cli, Command, Usage};

struct Ctx {
    root: PathBuf,
    backend: BackendSettings,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        self.root.join(p)
    }

    fn read(&self, p: &Path) -> Result<String> {
        let full = self.path(p);
        fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))
    }

    fn write(&self, p: &Path, text: &str) -> Result<()> {
        let full = self.path(p);
        if let Some(dir) = full.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&full, text).with_context(|| format!("writing {}", full.display()))
    }

    fn profile(&self) -> ModelProfile {
        let d = ModelProfile::default();
        ModelProfile {
            model_id: self.backend.model.clone().unwrap_or(d.model_id),
            temperature: self.backend.temperature.unwrap_or(d.temperature),
            max_output_tokens: self.backend.max_output_tokens.unwrap_or(d.max_output_tokens),
        }
    }

    /// The configured backend and the key dimension for an empty memory.
    fn backend(&self) -> Result<(Arc<dyn Backend>, usize)> {
        if let Some(script) = &self.backend.script {
            let path = self.path(script);
            let b = ScriptedBackend::from_path(&path).with_context(|| format!("loading script {}", path.display()))?;
            let dim = self.backend.embedding_dim.unwrap_or(b.default_dim());
            return Ok((Arc::new(b), dim));
        }
        if let Some(endpoint) = &self.backend.endpoint {
            let mut cfg = HttpConfig::new(endpoint.clone());
            cfg.api_key = std::env::var("LLM_API_KEY").ok().filter(|k| !k.is_empty());
            if let Some(m) = &self.backend.model {
                cfg.model = m.clone();
            }
            if let Some(m) = &self.backend.embed_model {
                cfg.embed_model = m.clone();
            }
            return Ok((Arc::new(HttpBackend::new(cfg)), self.backend.embedding_dim.unwrap_or(DEFAULT_DIM)));
        }
        bail!(Usage("no model backend configured (pass --script or --endpoint)".into()))
    }

    fn load_memory(&self, dir: &Path) -> Result<MemoryIndex> {
        let full = self.path(dir);
        memory::load(&full).with_context(|| format!("loading memory {}", full.display()))
    }
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Usage(format!("missing required setting --{flag}")).into())
}

fn print_block(effective: &Effective<'_>) -> Result<()> {
    eprint!("{}", effective.render()?);
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::read(path)?,
        None => FileConfig::default(),
    };
    let root = cli.root.clone().or(file.root.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut backend = cli.backend.clone();
    backend.layer(&file.backend);
    let ctx = Ctx { root, backend };
    let mut effective = Effective::new(&ctx.root, &ctx.backend);

    match cli.command {
        Command::Ingest(mut s) => {
            s.layer(&file.ingest);
            effective.ingest = Some(&s);
            print_block(&effective)?;
            let demos = required(&s.demos, "demos")?;
            let out = required(&s.memory, "memory")?;
            let text = ctx.read(demos)?;
            let (backend, empty_dim) = ctx.backend()?;
            let gw = Gateway::new(backend, ctx.profile());
            let index = match s.mode.unwrap_or_default() {
                IngestMode::Miniwob => ingest_demos(&parse_demos(&text)?, &gw, empty_dim)?,
                IngestMode::Mind2web => {
                    let records: Vec<StaticRecord> = parse_lines(&text)?;
                    ingest_static(&records, &gw, s.k_prev.unwrap_or(3), empty_dim)?
                }
            };
            let full = ctx.path(out);
            memory::persist(&index, &full).with_context(|| format!("writing memory {}", full.display()))?;
            println!("{} entries, dim {}", index.len(), index.dim());
        }
        Command::MemoryQuery(mut s) => {
            s.layer(&file.memory_query);
            effective.memory_query = Some(&s);
            print_block(&effective)?;
            let index = ctx.load_memory(required(&s.memory, "memory")?)?;
            let query = required(&s.query, "query")?;
            if index.is_empty() {
                bail!("memory is empty");
            }
            let (backend, _) = ctx.backend()?;
            let key = Gateway::new(backend, ctx.profile()).embed(query)?;
            let n = s.n.unwrap_or(3);
            if n == 0 {
                bail!(Usage("-n must be positive".into()));
            }
            let results = index.retrieve_topn(&key, n)?;
            for (rank, r) in results.iter().enumerate() {
                let task = r.entry.key_text.lines().next().unwrap_or("");
                println!("{}\t{}\t{:.6}\t{}", rank + 1, r.entry.group_id, r.distance, task);
            }
            if s.resolve == Some(true) {
                println!("resolved: {}", resolve_majority(&results)?);
            }
        }
        Command::Prompt(mut s) => {
            s.layer(&file.prompt);
            effective.prompt = Some(&s);
            print_block(&effective)?;
            let mode = match s.mode.unwrap_or_default() {
                PromptModeArg::Miniwob => PromptMode::Miniwob,
                PromptModeArg::Mind2web => PromptMode::Mind2web,
            };
            let current: PartialTrajectory = {
                let text = ctx.read(required(&s.current, "current")?)?;
                from_value_with_path(parse_record(text.trim_end().as_bytes())?)?
            };
            let exemplars = match &s.exemplars {
                Some(p) => ctx
                    .read(p)?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .enumerate()
                    .map(|(i, l)| deserialize_trajectory(l.as_bytes()).with_context(|| format!("exemplar record {i}")))
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            let opts = PromptOptions::new(mode, s.budget.unwrap_or(16_384));
            let bundle = build_episode_prompt(&build_system_prompt(mode), &exemplars, &current, &opts)?;
            if s.dry_run == Some(true) {
                println!("{}", to_canonical_string(&bundle));
            } else {
                let (backend, _) = ctx.backend()?;
                let gw = Gateway::new(backend, ctx.profile());
                let stops: Vec<&str> = bundle.stop_tokens.iter().map(String::as_str).collect();
                println!("{}", gw.complete(&bundle.messages, &stops)?);
            }
        }
        Command::Run { mut settings, agent } => {
            settings.layer(&file.run);
            let mut cfg: AgentConfig = file.agent.clone();
            agent.apply(&mut cfg);
            effective.run = Some(&settings);
            effective.agent = Some(&cfg);
            print_block(&effective)?;
            let env = required(&settings.env, "env")?;
            let seeds = parse_seeds(required(&settings.seeds, "seeds")?)?;
            let (backend, empty_dim) = ctx.backend()?;
            let index = match (&settings.memory, &settings.demos) {
                (Some(_), Some(_)) => bail!(Usage("pass either --memory or --demos, not both".into())),
                (Some(dir), None) => ctx.load_memory(dir)?,
                (None, Some(demos)) => {
                    let gw = Gateway::new(backend.clone(), ctx.profile());
                    ingest_demos(&parse_demos(&ctx.read(demos)?)?, &gw, empty_dim)?
                }
                (None, None) => MemoryIndex::new(empty_dim.max(1)),
            };
            let results = run_episodes(env, &seeds, &index, backend, &ctx.profile(), &cfg, settings.workers.unwrap_or(1))?;
            for r in &results {
                println!(
                    "seed {}\t{}\tactions={} abstraction={} primitives={}{}",
                    r.seed,
                    if r.success { "success" } else { "failure" },
                    r.llm_calls,
                    r.abstraction_calls,
                    r.primitive_actions,
                    r.failure_reason.as_ref().map(|f| format!("\t{f}")).unwrap_or_default()
                );
            }
            let summary = EpisodeSummary::from_results(env, &results);
            println!(
                "{}: {}/{} succeeded ({:.1}%), {} action calls, {} abstraction calls, {} primitive actions",
                summary.env,
                summary.successes,
                summary.episodes,
                summary.success_rate * 100.0,
                summary.llm_calls,
                summary.abstraction_calls,
                summary.primitive_actions
            );
            if let Some(out) = &settings.out {
                let lines: String = results.iter().map(|r| to_canonical_string(r) + "\n").collect();
                ctx.write(out, &lines)?;
            }
        }
        Command::Eval { mut settings, scoring } => {
            settings.layer(&file.eval);
            let mut cfg: StaticConfig = file.static_eval.clone();
            scoring.apply(&mut cfg);
            effective.eval = Some(&settings);
            effective.static_eval = Some(&cfg);
            print_block(&effective)?;
            let dataset: Vec<StaticRecord> = parse_lines(&ctx.read(required(&settings.dataset, "dataset")?)?)?;
            let (backend, empty_dim) = ctx.backend()?;
            let index = match (&settings.memory, &settings.train) {
                (Some(_), Some(_)) => bail!(Usage("pass either --memory or --train, not both".into())),
                (Some(dir), None) => ctx.load_memory(dir)?,
                (None, Some(train)) => {
                    let records: Vec<StaticRecord> = parse_lines(&ctx.read(train)?)?;
                    let gw = Gateway::new(backend.clone(), ctx.profile());
                    ingest_static(&records, &gw, cfg.k_prev, empty_dim)?
                }
                (None, None) => MemoryIndex::new(empty_dim.max(1)),
            };
            let report = evaluate_static(&dataset, &index, backend, &ctx.profile(), &cfg, settings.workers.unwrap_or(1))?;
            print!("{}", render_table(&report));
            if let Some(out) = &settings.out {
                ctx.write(out, &(to_canonical_string(&report) + "\n"))?;
            }
        }
        Command::Report(mut s) => {
            s.layer(&file.report);
            effective.report = Some(&s);
            print_block(&effective)?;
            let text = ctx.read(required(&s.report, "report")?)?;
            let report: EvalReport = from_value_with_path(parse_record(text.trim_end().as_bytes())?)?;
            print!("{}", render_table(&report));
        }
    }
    Ok(())
}
