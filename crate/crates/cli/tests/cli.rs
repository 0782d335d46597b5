use std::fs;
use std::path::Path;
use std::process::Command;

use stmtevo::backends::sim::{ModeProbs, SimProfile};
use stmtevo::backends::GenMode;
use stmtevo::search::{CallKind, Provenance, RunEvent, SearchConfig};
use stmtevo::Problem;
use stmtevo_cli::prove::cmd_prove;
use stmtevo_cli::report::{cmd_metrics, sibling};
use stmtevo_cli::run::{cmd_run, read_events, read_manifest};
use stmtevo_cli::{parse_problems, BackendChoice, CliError};

const REF: &str = "import Mathlib\n\ntheorem r (n : ℕ) (h : 0 < n) : n ≠ 0 ∧ 1 ≤ n := by sorry";

fn problems_text(n: usize, profile: Option<SimProfile>) -> String {
    (0..n)
        .map(|i| {
            let mut p = Problem::new(format!("prob_{i}"), format!("Statement number {i}."));
            p.reference_statements = vec![REF.into()];
            p.sim = profile.clone();
            serde_json::to_string(&p).unwrap()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn do_run(dir: &Path, n: usize, budget: usize, parallelism: usize, profile: Option<SimProfile>) -> stmtevo_cli::run::Manifest {
    let text = problems_text(n, profile);
    let problems = parse_problems(&text, Path::new("mem")).unwrap();
    let cfg = SearchConfig { budget, rng_seed: 7, ..SearchConfig::default() };
    cmd_run(&cfg, &problems, &text, BackendChoice::Sim, parallelism, dir).unwrap()
}

#[test]
fn run_writes_one_full_log_per_problem() {
    let dir = tempfile::tempdir().unwrap();
    let m = do_run(dir.path(), 3, 20, 2, None);
    assert!(m.all_completed());
    assert_eq!(fs::read_dir(dir.path().join("events")).unwrap().count(), 3);
    for p in &m.problems {
        let events = read_events(&dir.path().join(&p.events_file)).unwrap();
        assert_eq!(events.len(), 20);
        assert!(events.iter().all(|e| e.run_id == m.run_id && e.problem_id == p.problem_id && e.timestamp.is_none()));
    }
    assert_eq!(read_manifest(dir.path()).unwrap(), m);
}

#[test]
fn parallelism_does_not_change_logs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = do_run(a.path(), 6, 30, 1, None);
    let mb = do_run(b.path(), 6, 30, 4, None);
    for (pa, pb) in ma.problems.iter().zip(&mb.problems) {
        let la = fs::read(a.path().join(&pa.events_file)).unwrap();
        let lb = fs::read(b.path().join(&pb.events_file)).unwrap();
        assert_eq!(la, lb, "{}", pa.problem_id);
    }
}

fn event(problem: &str, i: usize, c: bool, j: bool, key: &str) -> RunEvent {
    RunEvent {
        run_id: "handmade".into(),
        problem_id: problem.into(),
        call_index: i,
        kind: CallKind::Patch,
        provenance: Provenance::Full,
        operator_mode: GenMode::Full,
        candidate_id: i,
        compile_ok: c,
        semantic_ok: c && j,
        score: u8::from(c) * (1 + u8::from(c && j)),
        canonical_key: key.into(),
        statement_text: REF.into(),
        error_type: None,
        judge_rationale: None,
        parent_id: None,
        island: 0,
        generation: 0,
        inserted: c,
        timestamp: None,
    }
}

/// A run directory with hand-written logs.
fn handmade(dir: &Path, traces: &[Vec<RunEvent>]) {
    let m = do_run(dir, traces.len(), 4, 1, None);
    for (p, t) in m.problems.iter().zip(traces) {
        let body: String = t.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
        fs::write(dir.join(&p.events_file), body).unwrap();
    }
}

#[test]
fn metrics_on_constructed_logs() {
    let dir = tempfile::tempdir().unwrap();
    let miss = |p: &str| (1..=4).map(|i| event(p, i, i % 2 == 0, false, &format!("k{i}"))).collect::<Vec<_>>();
    let hit4 = (1..=4).map(|i| event("prob_3", i, true, true, &format!("h{i}"))).collect::<Vec<_>>();
    handmade(dir.path(), &[miss("prob_0"), miss("prob_1"), miss("prob_2"), hit4]);
    let out = dir.path().join("report.json");
    let r = cmd_metrics(dir.path(), None, &out).unwrap();
    assert_eq!(r.summary.success_counts, vec![0, 0, 0, 4]);
    assert!((r.summary.gini - 0.75).abs() < 1e-9);
    assert_eq!(r.summary.sh, 0.25);
    assert_eq!(r.problems[3].first_hit, Some(1));
    assert_eq!(r.problems[0].first_hit, None);
    assert_eq!(r.budget_audit.gen, 16);
    assert_eq!(r.curves.len(), 4);
    // rerunning gives the same report
    assert_eq!(cmd_metrics(dir.path(), None, &out).unwrap(), r);
    for suffix in ["summary.csv", "problems.csv", "curves.csv"] {
        assert!(fs::read_to_string(sibling(&out, suffix)).unwrap().lines().count() >= 2);
    }
    // prefix semantics
    let r2 = cmd_metrics(dir.path(), Some(2), &out).unwrap();
    assert_eq!(r2.summary.success_counts, vec![0, 0, 0, 2]);
    assert_eq!(r2.problems[0].events, 2);
}

#[test]
fn metrics_on_failures_and_torn_logs() {
    let dir = tempfile::tempdir().unwrap();
    let fail = |p: &str| (1..=4).map(|i| event(p, i, false, false, "x")).collect::<Vec<_>>();
    handmade(dir.path(), &[fail("prob_0"), fail("prob_1")]);
    let m = read_manifest(dir.path()).unwrap();
    // an interrupted writer leaves a partial final line
    let path = dir.path().join(&m.problems[1].events_file);
    let mut body = fs::read_to_string(&path).unwrap();
    body.push_str("{\"run_id\":\"hand");
    fs::write(&path, body).unwrap();
    let r = cmd_metrics(dir.path(), None, &dir.path().join("r.json")).unwrap();
    assert_eq!((r.summary.ch, r.summary.sh), (0.0, 0.0));
    assert_eq!(r.problems[1].events, 4);
    fs::remove_file(&path).unwrap();
    assert!(matches!(cmd_metrics(dir.path(), None, &dir.path().join("r.json")), Err(CliError::MissingLogs(_))));
}

#[test]
fn prove_with_empty_repertoires() {
    let dir = tempfile::tempdir().unwrap();
    let prof = SimProfile { semantic_prob: ModeProbs::uniform(0.0), ..SimProfile::default() };
    do_run(dir.path(), 2, 10, 1, Some(prof));
    let out = dir.path().join("proofs.json");
    let r = cmd_prove(dir.path(), 64, BackendChoice::Sim, false, 1, &out).unwrap();
    let u = r.rows[0].utility;
    assert_eq!((u.n, u.attempted, u.pass, u.complete, u.theorem_complete), (2, 0, 0, 0, 0));
    assert_eq!(fs::read_to_string(sibling(&out, "attempts.jsonl")).unwrap(), "");
}

#[test]
fn prove_with_an_always_complete_prover() {
    let dir = tempfile::tempdir().unwrap();
    let prof = SimProfile {
        compile_prob: ModeProbs::uniform(1.0),
        semantic_prob: ModeProbs::uniform(1.0),
        prover_complete_prob: 1.0,
        ..SimProfile::default()
    };
    do_run(dir.path(), 3, 10, 1, Some(prof));
    let out = dir.path().join("proofs.json");
    let r = cmd_prove(dir.path(), 64, BackendChoice::Sim, true, 2, &out).unwrap();
    let rep = &r.rows[0];
    let nonempty = rep.problems.iter().filter(|p| p.statements > 0).count();
    assert_eq!(nonempty, 3);
    assert_eq!((rep.utility.pass, rep.utility.complete, rep.utility.theorem_complete), (3, 3, 3));
    assert!(rep.problems.iter().all(|p| p.attempts == 64));
    assert_eq!(r.rows[1].label, "oracle");
    assert_eq!(r.rows[1].utility.theorem_complete, 3);
    let lines = fs::read_to_string(sibling(&out, "attempts.jsonl")).unwrap().lines().count();
    assert_eq!(lines, 2 * 3 * 64);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stmtevo"))
}

#[test]
fn binary_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("problems.jsonl"), problems_text(2, None)).unwrap();
    fs::write(d.join("config.toml"), "budget = 12\nrng_seed = 3\n").unwrap();
    let st = bin()
        .args(["run", "--config", "config.toml", "--problems", "problems.jsonl", "--backend", "sim", "--parallelism", "2", "--out", "run"])
        .current_dir(d)
        .status()
        .unwrap();
    assert!(st.success());
    let st = bin().args(["metrics", "--run", "run", "--t", "12", "--out", "report.json"]).current_dir(d).status().unwrap();
    assert!(st.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["budget_audit"]["gen"].as_u64().unwrap() + report["budget_audit"]["crep"].as_u64().unwrap() + report["budget_audit"]["srep"].as_u64().unwrap(), 24);
    let st = bin().args(["prove", "--run", "run", "--budget", "8", "--out", "proofs.json", "--oracle"]).current_dir(d).status().unwrap();
    assert!(st.success());
    fs::write(d.join("stmt.lean"), "import Mathlib\n\ntheorem t (a b : ℕ) (h : a < b) : b > a ∧ (a = a ∨ b ≤ a) := by sorry").unwrap();
    let out = bin().args(["evolast", "--file", "stmt.lean", "--n", "4", "--verify"]).current_dir(d).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("[equivalent]").count(), 4, "{text}");
    let bad = bin().args(["run", "--config", "nope.toml", "--problems", "problems.jsonl", "--out", "x"]).current_dir(d).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unreachable_http_backend_consumes_calls() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("problems.jsonl"), problems_text(1, None)).unwrap();
    fs::write(d.join("config.toml"), "budget = 5\n").unwrap();
    let url = "http://127.0.0.1:9/v1/chat/completions";
    let st = bin()
        .args(["run", "--config", "config.toml", "--problems", "problems.jsonl", "--backend", "http", "--out", "run"])
        .env("STMTEVO_GENERATOR_URL", url)
        .env("STMTEVO_COMPILER_URL", url)
        .env("STMTEVO_JUDGE_URL", url)
        .env("STMTEVO_MAX_RETRIES", "1")
        .env("STMTEVO_BACKOFF_MS", "0")
        .env("STMTEVO_TIMEOUT_S", "2")
        .current_dir(d)
        .status()
        .unwrap();
    assert!(st.success());
    let m = read_manifest(&d.join("run")).unwrap();
    let events = read_events(&d.join("run").join(&m.problems[0].events_file)).unwrap();
    assert_eq!(events.len(), 5);
    assert!(events.iter().all(|e| !e.compile_ok && e.error_type.as_deref() == Some("backend_failure")));
    let missing = bin().args(["run", "--problems", "problems.jsonl", "--backend", "http", "--out", "r2"]).current_dir(d).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
