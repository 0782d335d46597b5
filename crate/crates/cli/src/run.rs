use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stmtevo::backends::http::{Endpoint, HttpCompiler, HttpGenerator, HttpJudge};
use stmtevo::backends::sim::SimBackend;
use stmtevo::backends::{Backends, Compiler, Generator, Judge};
use stmtevo::search::{run_problem, RunEvent, SearchConfig};
use stmtevo::{derive_seed, Problem};

use crate::{io_err, log_file_name, BackendChoice, CliError};

pub const MANIFEST: &str = "manifest.json";
pub const PROBLEMS_COPY: &str = "problems.jsonl";
pub const EVENTS_DIR: &str = "events";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProblem {
    pub problem_id: String,
    pub seed: u64,
    pub events_file: String,
    pub events: usize,
    pub completed: bool,
    pub error: Option<String>,
}

/// Everything needed to reproduce the logs: config, seeds, backend identity, and
/// the copied problems file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub created_at: String,
    pub tool_version: String,
    pub backend: BackendChoice,
    pub backend_identity: Vec<String>,
    pub run_seed: u64,
    pub parallelism: usize,
    pub config: SearchConfig,
    pub problems: Vec<ManifestProblem>,
}

impl Manifest {
    pub fn all_completed(&self) -> bool {
        self.problems.iter().all(|p| p.completed)
    }
}

pub fn problem_seed(run_seed: u64, problem_id: &str) -> u64 {
    derive_seed(&[&run_seed.to_le_bytes(), problem_id.as_bytes()])
}

/// Run id depends only on the inputs, so reruns write identical logs.
pub fn run_id(cfg: &SearchConfig, problems: &[Problem], backend: BackendChoice) -> String {
    let cfg_json = serde_json::to_string(cfg).expect("config serializes");
    let ids: Vec<&str> = problems.iter().map(|p| p.problem_id.as_str()).collect();
    let backend = serde_json::to_string(&backend).expect("backend serializes");
    format!("run-{:016x}", derive_seed(&[cfg_json.as_bytes(), ids.join("\n").as_bytes(), backend.as_bytes()]))
}

/// HTTP adapters configured from the environment.
pub struct HttpSet {
    seed: HttpGenerator,
    gen: HttpGenerator,
    compiler: HttpCompiler,
    judge: HttpJudge,
}

fn endpoint(role: &str) -> Result<Endpoint, CliError> {
    Endpoint::from_env(role).ok_or_else(|| CliError::Backend(format!("STMTEVO_{role}_URL is not set")))
}

impl HttpSet {
    fn from_env() -> Result<HttpSet, CliError> {
        let gen = endpoint("GENERATOR")?;
        let seed = Endpoint::from_env("SEED").unwrap_or_else(|| gen.clone());
        Ok(HttpSet {
            seed: HttpGenerator { endpoint: seed },
            gen: HttpGenerator { endpoint: gen },
            compiler: HttpCompiler { endpoint: endpoint("COMPILER")? },
            judge: HttpJudge { endpoint: endpoint("JUDGE")? },
        })
    }

    fn identity(&self) -> Vec<String> {
        let id = |role: &str, ep: &Endpoint| format!("{role}: {} {}", ep.url, ep.model);
        vec![
            id("seed", &self.seed.endpoint),
            id("generator", &self.gen.endpoint),
            id("compiler", &self.compiler.endpoint),
            id("judge", &self.judge.endpoint),
        ]
    }
}

/// Backend objects for a run, owned here and lent to each problem's loop.
pub enum BackendSet {
    Sim(SimBackend),
    Http(Box<HttpSet>),
}

impl BackendSet {
    pub fn build(choice: BackendChoice, problems: &[Problem]) -> Result<BackendSet, CliError> {
        Ok(match choice {
            BackendChoice::Sim => BackendSet::Sim(SimBackend::new(problems)),
            BackendChoice::Http => BackendSet::Http(Box::new(HttpSet::from_env()?)),
        })
    }

    pub fn backends(&self) -> Backends<'_> {
        match self {
            BackendSet::Sim(s) => Backends { seed_generator: s, generator: s, compiler: s, judge: s },
            BackendSet::Http(h) => Backends {
                seed_generator: &h.seed as &dyn Generator,
                generator: &h.gen,
                compiler: &h.compiler as &dyn Compiler,
                judge: &h.judge as &dyn Judge,
            },
        }
    }

    pub fn identity(&self) -> Vec<String> {
        match self {
            BackendSet::Sim(_) => vec!["sim: built-in simulator".into()],
            BackendSet::Http(h) => h.identity(),
        }
    }

    /// The verifier used on prover outputs.
    pub fn compiler(&self) -> &dyn Compiler {
        self.backends().compiler
    }
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<(), CliError> {
    let path = dir.join(MANIFEST);
    let tmp = dir.join("manifest.json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(m).expect("manifest serializes")).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Streams one problem's events to its log, flushing after every line.
fn run_one(problem: &Problem, cfg: &SearchConfig, backends: Backends<'_>, seed: u64, run_id: &str, path: &Path) -> Result<usize, String> {
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = BufWriter::new(file);
    let mut write_err: Option<String> = None;
    let mut sink = |ev: &RunEvent| {
        if write_err.is_some() {
            return;
        }
        let line = serde_json::to_string(ev).expect("event serializes");
        if let Err(e) = writeln!(out, "{line}").and_then(|_| out.flush()) {
            write_err = Some(e.to_string());
        }
    };
    let log = run_problem(problem, cfg, backends, seed, run_id, &mut sink);
    match write_err {
        Some(e) => Err(e),
        None => Ok(log.events.len()),
    }
}

/// Runs every problem (up to `parallelism` at a time) and returns the manifest.
pub fn cmd_run(
    cfg: &SearchConfig,
    problems: &[Problem],
    problems_text: &str,
    backend: BackendChoice,
    parallelism: usize,
    out: &Path,
) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let set = BackendSet::build(backend, problems)?;
    cmd_run_with(cfg, problems, problems_text, backend, &set, parallelism, out)
}

pub fn cmd_run_with(
    cfg: &SearchConfig,
    problems: &[Problem],
    problems_text: &str,
    backend: BackendChoice,
    set: &BackendSet,
    parallelism: usize,
    out: &Path,
) -> Result<Manifest, CliError> {
    let events_dir = out.join(EVENTS_DIR);
    fs::create_dir_all(&events_dir).map_err(io_err(&events_dir))?;
    let copy = out.join(PROBLEMS_COPY);
    fs::write(&copy, problems_text).map_err(io_err(&copy))?;

    let run_id = run_id(cfg, problems, backend);
    let entries: Vec<ManifestProblem> = problems
        .iter()
        .enumerate()
        .map(|(i, p)| ManifestProblem {
            problem_id: p.problem_id.clone(),
            seed: problem_seed(cfg.rng_seed, &p.problem_id),
            events_file: format!("{EVENTS_DIR}/{}", log_file_name(i, &p.problem_id)),
            events: 0,
            completed: false,
            error: None,
        })
        .collect();
    let manifest = Mutex::new(Manifest {
        run_id: run_id.clone(),
        created_at: chrono::Utc::now().to_rfc3339(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        backend,
        backend_identity: set.identity(),
        run_seed: cfg.rng_seed,
        parallelism,
        config: cfg.clone(),
        problems: entries,
    });
    // written up front so an interrupted run still describes its logs
    write_manifest(out, &manifest.lock().expect("manifest lock"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        problems.par_iter().enumerate().for_each(|(i, p)| {
            let (seed, file) = {
                let m = manifest.lock().expect("manifest lock");
                (m.problems[i].seed, out.join(&m.problems[i].events_file))
            };
            log::info!("problem {} starting", p.problem_id);
            let result = run_one(p, cfg, set.backends(), seed, &run_id, &file);
            let mut m = manifest.lock().expect("manifest lock");
            let entry = &mut m.problems[i];
            match result {
                Ok(n) => {
                    entry.events = n;
                    entry.completed = n == cfg.budget;
                }
                Err(e) => {
                    log::error!("problem {} failed: {e}", p.problem_id);
                    entry.error = Some(e);
                }
            }
        });
    });
    let m = manifest.into_inner().expect("manifest lock");
    write_manifest(out, &m)?;
    Ok(m)
}

pub fn read_manifest(run_dir: &Path) -> Result<Manifest, CliError> {
    let path = run_dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|_| CliError::MissingLogs(format!("{} not found", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Reads an event log. A torn final line (interrupted write) is dropped.
pub fn read_events(path: &Path) -> Result<Vec<RunEvent>, CliError> {
    let text = fs::read_to_string(path).map_err(|_| CliError::MissingLogs(format!("{} not found", path.display())))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut events = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str::<RunEvent>(line) {
            Ok(ev) => events.push(ev),
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => break,
            Err(e) => return Err(CliError::Schema { path: path.to_path_buf(), line: i + 1, reason: e.to_string() }),
        }
    }
    events.sort_by_key(|e| e.call_index);
    Ok(events)
}

/// Problems and their event logs, in manifest order.
pub fn load_run(run_dir: &Path) -> Result<(Manifest, Vec<Problem>, Vec<Vec<RunEvent>>), CliError> {
    let manifest = read_manifest(run_dir)?;
    let problems = crate::load_problems(&run_dir.join(PROBLEMS_COPY))?;
    let mut traces = Vec::new();
    for entry in &manifest.problems {
        let path: PathBuf = run_dir.join(&entry.events_file);
        traces.push(read_events(&path)?);
    }
    Ok((manifest, problems, traces))
}
