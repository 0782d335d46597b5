use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stmtevo::backends::http::{Endpoint, HttpCompiler, HttpProver};
use stmtevo::backends::sim::SimBackend;
use stmtevo::backends::{extract_code_block, Compiler, Prover};
use stmtevo::metrics::{proof_utility, repertoire_for_proving, rr64_schedule, ProofUtility, ProverAttempt};
use stmtevo::{derive_seed, Problem};

use crate::report::sibling;
use crate::run::load_run;
use crate::{io_err, BackendChoice, CliError};

pub const REPERTOIRE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemProof {
    pub problem_id: String,
    pub statements: usize,
    pub attempts: usize,
    pub pass: bool,
    pub complete: bool,
    pub theorem_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofRow {
    /// `repertoire` for searched statements, `oracle` for reference statements.
    pub label: String,
    pub utility: ProofUtility,
    pub problems: Vec<ProblemProof>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofReport {
    pub run_id: String,
    pub budget: usize,
    pub rows: Vec<ProofRow>,
}

/// Prover plus the verifier that decides `pass`.
pub struct ProverSet {
    prover: Box<dyn Prover>,
    verifier: Box<dyn Compiler>,
}

impl ProverSet {
    pub fn new(prover: Box<dyn Prover>, verifier: Box<dyn Compiler>) -> ProverSet {
        ProverSet { prover, verifier }
    }

    pub fn build(choice: BackendChoice, problems: &[Problem]) -> Result<ProverSet, CliError> {
        Ok(match choice {
            BackendChoice::Sim => {
                let sim = std::sync::Arc::new(SimBackend::new(problems));
                ProverSet { prover: Box::new(SharedSim(sim.clone())), verifier: Box::new(SharedSim(sim)) }
            }
            BackendChoice::Http => {
                let ep = |role: &str| Endpoint::from_env(role).ok_or_else(|| CliError::Backend(format!("STMTEVO_{role}_URL is not set")));
                ProverSet {
                    prover: Box::new(HttpProver { endpoint: ep("PROVER")?, temperature: 1.0 }),
                    verifier: Box::new(HttpCompiler { endpoint: ep("COMPILER")? }),
                }
            }
        })
    }
}

struct SharedSim(std::sync::Arc<SimBackend>);

impl Prover for SharedSim {
    fn prove(&self, problem: &Problem, lean_file: &str, seed: u64) -> Result<String, stmtevo::backends::BackendError> {
        self.0.prove(problem, lean_file, seed)
    }
}

impl Compiler for SharedSim {
    fn compile(&self, t: &str) -> Result<stmtevo::backends::CompileResult, stmtevo::backends::BackendError> {
        self.0.compile(t)
    }

    fn verify_proof(&self, t: &str) -> Result<stmtevo::backends::CompileResult, stmtevo::backends::BackendError> {
        self.0.verify_proof(t)
    }
}

/// Runs the round-robin schedule over `statements` for one problem. Backend
/// failures count as failed attempts.
pub fn prove_problem(set: &ProverSet, problem: &Problem, statements: &[String], budget: usize, run_seed: u64, label: &str) -> Vec<ProverAttempt> {
    rr64_schedule(statements.len(), budget)
        .into_iter()
        .map(|slot| {
            let seed = derive_seed(&[
                label.as_bytes(),
                &run_seed.to_le_bytes(),
                problem.problem_id.as_bytes(),
                &(slot.statement_index as u64).to_le_bytes(),
                &(slot.sample_index as u64).to_le_bytes(),
            ]);
            let stmt = &statements[slot.statement_index];
            match set.prover.prove(problem, stmt, seed) {
                Ok(resp) => {
                    let text = extract_code_block(&resp).unwrap_or(resp);
                    let verified = set.verifier.verify_proof(&text).map(|r| r.ok).unwrap_or(false);
                    ProverAttempt::classify(&problem.problem_id, slot, text, verified)
                }
                Err(e) => ProverAttempt::classify(&problem.problem_id, slot, format!("-- prover failure: {e}"), false),
            }
        })
        .collect()
}

fn row(label: &str, problems: &[Problem], per_problem: &[(usize, Vec<ProverAttempt>)]) -> ProofRow {
    let all: Vec<ProverAttempt> = per_problem.iter().flat_map(|(_, a)| a.iter().cloned()).collect();
    ProofRow {
        label: label.to_string(),
        utility: proof_utility(&all, problems.len()),
        problems: problems
            .iter()
            .zip(per_problem)
            .map(|(p, (m, a))| ProblemProof {
                problem_id: p.problem_id.clone(),
                statements: *m,
                attempts: a.len(),
                pass: a.iter().any(|x| x.pass),
                complete: a.iter().any(|x| x.complete),
                theorem_complete: a.iter().any(|x| x.theorem_complete),
            })
            .collect(),
    }
}

/// Proves each problem's repertoire (and, with `oracle`, its reference
/// statements) and writes the report to `out` and attempts to
/// `<stem>.attempts.jsonl`.
pub fn cmd_prove(run_dir: &Path, budget: usize, backend: BackendChoice, oracle: bool, parallelism: usize, out: &Path) -> Result<ProofReport, CliError> {
    let (manifest, problems, traces) = load_run(run_dir)?;
    let set = ProverSet::build(backend, &problems)?;
    cmd_prove_with(&set, &manifest.run_id, manifest.run_seed, &problems, &traces, budget, oracle, parallelism, out)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_prove_with(
    set: &ProverSet,
    run_id: &str,
    run_seed: u64,
    problems: &[Problem],
    traces: &[Vec<stmtevo::search::RunEvent>],
    budget: usize,
    oracle: bool,
    parallelism: usize,
    out: &Path,
) -> Result<ProofReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let run_label = |label: &str, pick: &(dyn Fn(usize) -> Vec<String> + Sync)| -> Vec<(usize, Vec<ProverAttempt>)> {
        pool.install(|| {
            problems
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    let stmts = pick(i);
                    (stmts.len(), prove_problem(set, p, &stmts, budget, run_seed, label))
                })
                .collect()
        })
    };
    let repertoire = |i: usize| -> Vec<String> {
        traces.get(i).map(|t| repertoire_for_proving(t, REPERTOIRE_CAP).into_iter().map(|e| e.statement_text.clone()).collect()).unwrap_or_default()
    };
    let mut labelled = vec![("repertoire", run_label("repertoire", &repertoire))];
    if oracle {
        let refs = |i: usize| problems[i].reference_statements.iter().take(REPERTOIRE_CAP).cloned().collect();
        labelled.push(("oracle", run_label("oracle", &refs)));
    }

    let attempts_path = sibling(out, "attempts.jsonl");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&attempts_path).map_err(io_err(&attempts_path))?);
    for (label, per) in &labelled {
        for a in per.iter().flat_map(|(_, a)| a) {
            let mut v = serde_json::to_value(a).expect("attempt serializes");
            v["label"] = serde_json::Value::from(*label);
            writeln!(f, "{v}").map_err(io_err(&attempts_path))?;
        }
    }
    f.flush().map_err(io_err(&attempts_path))?;

    let report = ProofReport { run_id: run_id.to_string(), budget, rows: labelled.iter().map(|(l, per)| row(l, problems, per)).collect() };
    std::fs::write(out, serde_json::to_string_pretty(&report).expect("report serializes")).map_err(io_err(out))?;
    Ok(report)
}
