use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn trajmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajmem"))
        .arg("--root")
        .arg(root())
        .args(args)
        .env_remove("TRAJMEM_SCRIPT")
        .env_remove("TRAJMEM_WORKERS")
        .env_remove("TRAJMEM_MEMORY")
        .env_remove("TRAJMEM_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), stderr(&o));
    stdout(&o)
}

fn tmp_path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn ingest_reports_entries_and_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(trajmem(&[
        "ingest",
        "--demos",
        "fixtures/demos/pack.jsonl",
        "--memory",
        &tmp_path(tmp.path(), "pack"),
        "--script",
        "fixtures/scripts/terminal.yaml",
    ]));
    assert_eq!(out.trim(), "240 entries, dim 64");

    let empty = tmp.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = ok(trajmem(&[
        "ingest",
        "--demos",
        empty.to_str().unwrap(),
        "--memory",
        &tmp_path(tmp.path(), "empty"),
        "--script",
        "fixtures/scripts/terminal.yaml",
    ]));
    assert!(out.starts_with("0 entries"), "{out}");
}

#[test]
fn ingest_rejects_failed_demonstrations() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("fixtures/demos/terminal.jsonl")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = lines[1].replace("\"outcome\":\"success\"", "\"outcome\":\"failure\"");
    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let o = trajmem(&[
        "ingest",
        "--demos",
        bad.to_str().unwrap(),
        "--memory",
        &tmp_path(tmp.path(), "m"),
        "--script",
        "fixtures/scripts/terminal.yaml",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("record 1"), "{}", stderr(&o));
}

#[test]
fn memory_query_orders_and_resolves() {
    let tmp = tempfile::tempdir().unwrap();
    let mem = tmp_path(tmp.path(), "vote");
    ok(trajmem(&["ingest", "--demos", "fixtures/demos/vote.jsonl", "--memory", &mem, "--script", "fixtures/scripts/vote.yaml"]));
    let out = ok(trajmem(&[
        "memory-query",
        "--memory",
        &mem,
        "--query",
        "pick a date",
        "-n",
        "3",
        "--resolve",
        "--script",
        "fixtures/scripts/vote.yaml",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    let groups: Vec<&str> = lines[..3].iter().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(groups, ["enter-date", "click-button", "enter-date"]);
    assert_eq!(lines[3], "resolved: enter-date");

    let all = ok(trajmem(&["memory-query", "--memory", &mem, "--query", "anything", "-n", "10", "--script", "fixtures/scripts/vote.yaml"]));
    assert_eq!(all.lines().count(), 3);
}

#[test]
fn memory_query_finds_a_stored_key_at_distance_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mem = tmp_path(tmp.path(), "t");
    ok(trajmem(&["ingest", "--demos", "fixtures/demos/pack.jsonl", "--memory", &mem, "--script", "fixtures/scripts/terminal.yaml"]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("t/manifest.json")).unwrap()).unwrap();
    let key = manifest["entries"][17]["key_text"].as_str().unwrap();
    let out = ok(trajmem(&["memory-query", "--memory", &mem, "--query", key, "-n", "1", "--script", "fixtures/scripts/terminal.yaml"]));
    let fields: Vec<&str> = out.trim().split('\t').collect();
    assert_eq!(fields[2], "0.000000", "{out}");
    assert_eq!(fields[1], manifest["entries"][17]["group_id"].as_str().unwrap());
}

#[test]
fn prompt_dry_run_matches_goldens() {
    for (name, step) in [("terminal", 2), ("terminal", 4), ("book_flight", 2), ("book_flight", 4)] {
        let out = ok(trajmem(&[
            "prompt",
            "--dry-run",
            "--exemplars",
            &format!("fixtures/cli/{name}_exemplars.jsonl"),
            "--current",
            &format!("fixtures/cli/{name}_step{step}_current.json"),
        ]));
        let golden = std::fs::read_to_string(root().join(format!("fixtures/prompts/{name}_step{step}.golden.json"))).unwrap();
        assert_eq!(out, golden, "{name} step {step}");
    }
}

#[test]
fn scripted_runs_succeed_on_every_seed() {
    let out = ok(trajmem(&[
        "run",
        "--env",
        "terminal",
        "--script",
        "fixtures/scripts/terminal.yaml",
        "--demos",
        "fixtures/demos/terminal.jsonl",
        "--seeds",
        "0..49",
        "--workers",
        "4",
    ]));
    assert!(out.lines().last().unwrap().starts_with("terminal: 50/50 succeeded"), "{out}");

    let tmp = tempfile::tempdir().unwrap();
    let mem = tmp_path(tmp.path(), "flight");
    ok(trajmem(&["ingest", "--demos", "fixtures/demos/book_flight.jsonl", "--memory", &mem, "--script", "fixtures/scripts/book_flight.yaml"]));
    let out = ok(trajmem(&[
        "run",
        "--env",
        "book-flight",
        "--script",
        "fixtures/scripts/book_flight.yaml",
        "--memory",
        &mem,
        "--seeds",
        "0..49",
    ]));
    assert!(out.lines().last().unwrap().starts_with("book-flight: 50/50 succeeded"), "{out}");
}

#[test]
fn eval_and_report_render_the_same_table() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp_path(tmp.path(), "report.json");
    let table = ok(trajmem(&[
        "eval",
        "--dataset",
        "fixtures/mind2web/test.jsonl",
        "--train",
        "fixtures/mind2web/train.jsonl",
        "--script",
        "fixtures/scripts/mind2web.yaml",
        "--workers",
        "3",
        "--out",
        &report,
    ]));
    let overall = table.lines().find(|l| l.starts_with("Overall")).unwrap();
    assert_eq!(overall.split_whitespace().filter(|c| *c == "100.0").count(), 3, "{table}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!((json["ele_acc"].as_f64(), json["step_sr"].as_f64(), json["sr"].as_f64()), (Some(1.0), Some(1.0), Some(1.0)));
    assert_eq!(ok(trajmem(&["report", "--report", &report])), table);
}

fn effective_block(err: &str) -> String {
    let start = err.find("# --- effective config ---").unwrap();
    let end = err.find("# --- end effective config ---").unwrap();
    err[start..end].to_string()
}

#[test]
fn effective_config_reproduces_the_run() {
    let first = trajmem(&[
        "run",
        "--env",
        "terminal",
        "--script",
        "fixtures/scripts/terminal.yaml",
        "--demos",
        "fixtures/demos/terminal.jsonl",
        "--seeds",
        "3..9",
        "--max-steps",
        "5",
    ]);
    let out = ok(first.clone());
    let block = effective_block(&stderr(&first));
    assert!(block.contains("max_steps = 5"), "{block}");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("effective.toml");
    std::fs::write(&cfg, &block).unwrap();
    let second = trajmem(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(ok(second.clone()), out);
    assert_eq!(effective_block(&stderr(&second)), block);
}

#[test]
fn flags_override_environment_override_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[backend]\nscript = \"fixtures/scripts/missing.yaml\"\n[run]\nenv = \"terminal\"\nseeds = \"0..4\"\ndemos = \"fixtures/demos/terminal.jsonl\"\n",
    )
    .unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_trajmem"));
        c.arg("--root").arg(root()).arg("--config").arg(&cfg).arg("run").args(extra);
        c.env_remove("TRAJMEM_SCRIPT").env_remove("TRAJMEM_WORKERS").env_remove("TRAJMEM_MEMORY");
        if let Some(s) = env {
            c.env("TRAJMEM_SCRIPT", s);
        }
        c.output().unwrap()
    };
    // file only: the script does not exist
    assert_eq!(run(&[], None).status.code(), Some(3));
    // environment beats the file
    let out = ok(run(&[], Some("fixtures/scripts/terminal.yaml")));
    assert!(out.contains("5/5 succeeded"), "{out}");
    // flags beat both
    let out = ok(run(&["--seeds", "0..1"], Some("fixtures/scripts/terminal.yaml")));
    assert!(out.contains("2/2 succeeded"), "{out}");
}

#[test]
fn exit_codes_classify_failures() {
    assert_eq!(trajmem(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(trajmem(&["run", "--script", "fixtures/scripts/terminal.yaml", "--seeds", "0..1"]).status.code(), Some(2));
    assert_eq!(
        trajmem(&["run", "--env", "terminal", "--seeds", "0..1", "--script", "fixtures/scripts/terminal.yaml", "--bad-range"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(trajmem(&["report", "--report", "no/such/file.json"]).status.code(), Some(3));
    let o = trajmem(&["run", "--env", "moon-landing", "--seeds", "0", "--script", "fixtures/scripts/terminal.yaml"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    // a script with no answer for the action prompt is a backend failure
    let o = trajmem(&["run", "--env", "terminal", "--seeds", "0", "--script", "fixtures/scripts/vote.yaml"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(trajmem(&["--help"]).status.success());
}
