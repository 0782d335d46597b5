use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::archive::Archive;
use super::config::SearchConfig;
use super::select::{gated_score, parent_weights_with, sample_index, sample_island};
use super::types::{BudgetLedger, CallKind, Candidate, LedgerEntry, Provenance, RunEvent, RunLog};
use crate::backends::{extract_code_block, Backends, Feedback, GenMode, GeneratorRequest};
use crate::evolast::evolast_variant;
use crate::problem::Problem;
use crate::statement::{canonicalize, parse_file, print_file_with, CanonicalKey, ParseError, StatementFile, SymbolStyle};

/// Runs the budgeted search for one problem. `sink` sees every event as soon as
/// it is final, in call order.
pub fn run_problem(
    problem: &Problem,
    cfg: &SearchConfig,
    backends: Backends<'_>,
    seed: u64,
    run_id: &str,
    sink: &mut dyn FnMut(&RunEvent),
) -> RunLog {
    let mut e = Engine {
        problem,
        cfg,
        b: backends,
        rng: ChaCha8Rng::seed_from_u64(seed),
        archive: Archive::new(cfg.islands, cfg.capacity, cfg.elitism_top),
        ledger: BudgetLedger { limit: cfg.budget, entries: Vec::new() },
        events: Vec::new(),
        t: 0,
        next_id: 0,
        generation: 0,
        run_id,
        sink,
        parents: BTreeSet::new(),
        migrations: 0,
    };
    e.seedbank();
    while e.t < cfg.budget && !e.archive.is_empty() {
        e.iteration();
    }
    RunLog {
        problem_id: problem.problem_id.clone(),
        events: e.events,
        ledger: e.ledger,
        parents_used: e.parents.into_iter().collect(),
        archive_size: e.archive.len(),
        migrations: e.migrations,
    }
}

struct Engine<'a, 's> {
    problem: &'a Problem,
    cfg: &'a SearchConfig,
    b: Backends<'a>,
    rng: ChaCha8Rng,
    archive: Archive,
    ledger: BudgetLedger,
    events: Vec<RunEvent>,
    t: usize,
    next_id: usize,
    generation: usize,
    run_id: &'a str,
    sink: &'s mut dyn FnMut(&RunEvent),
    parents: BTreeSet<usize>,
    migrations: usize,
}

/// Where a candidate came from, for building it.
struct Origin {
    provenance: Provenance,
    parent_id: Option<usize>,
    island: usize,
    call_index: usize,
}

/// A debited call together with the mode it was issued in.
#[derive(Clone, Copy)]
struct Call {
    index: usize,
    kind: CallKind,
    mode: GenMode,
}

enum Output {
    Text(String),
    Failed { error_type: &'static str, msg: String },
}

impl<'a, 's> Engine<'a, 's> {
    fn debit(&mut self, kind: CallKind, mode: GenMode) -> Option<Call> {
        if self.t >= self.cfg.budget {
            return None;
        }
        self.t += 1;
        Some(Call { index: self.t, kind, mode })
    }

    fn fresh_id(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn seedbank(&mut self) {
        let preseeds = self.problem.preseeds.clone();
        let planned = if preseeds.is_empty() { self.cfg.seedbank_size } else { preseeds.len() };
        let mut feasible = 0usize;
        let mut issued = 0usize;
        // keep drawing seeds while nothing is archived, otherwise the loop has no parents
        while issued < planned || (self.archive.is_empty() && self.t < self.cfg.budget) {
            let Some(call) = self.debit(CallKind::Seed, GenMode::Seed) else {
                break;
            };
            let output = match preseeds.get(issued) {
                Some(text) => Output::Text(text.clone()),
                None => self.generate(GenMode::Seed, None, vec![], Feedback::None, self.cfg.seed_temperature, true),
            };
            issued += 1;
            let island = feasible % self.archive.num_islands();
            let origin = Origin { provenance: Provenance::Seed, parent_id: None, island, call_index: call.index };
            let mut c = self.candidate_from_output(output, &origin, None, GenMode::Seed);
            self.gate(&mut c);
            if c.compile_ok {
                feasible += 1;
            }
            self.finish(c, call, false, &mut 0);
        }
    }

    fn iteration(&mut self) {
        self.generation += 1;
        let island = sample_island(&self.archive.island_sizes(), &mut self.rng).expect("archive nonempty");
        let members = self.archive.island(island);
        let scores: Vec<f64> = members.iter().map(|c| c.score as f64).collect();
        let usages: Vec<u32> = members.iter().map(|c| c.usage_count).collect();
        let w = parent_weights_with(&scores, &usages, self.cfg.lambda, self.cfg.beta, self.cfg.eps_mad, self.cfg.usage_penalty)
            .expect("island nonempty");
        let parent_id = members[sample_index(&w, &mut self.rng)].id;
        let parent = {
            let p = self.archive.get_mut(parent_id).expect("parent archived");
            p.usage_count += 1;
            p.clone()
        };
        self.parents.insert(parent_id);

        let [archive_n, topk_n] = self.cfg.inspiration_counts;
        let (picks, top) = self.archive.sample_context(island, parent_id, archive_n, topk_n, &mut self.rng);
        let pool: Vec<usize> = picks.into_iter().chain(top).collect();
        let mut mode = [GenMode::Full, GenMode::Diff, GenMode::Cross][sample_index(&self.cfg.operator_probs, &mut self.rng)];
        if mode == GenMode::Cross && pool.is_empty() {
            mode = GenMode::Full;
        }
        let inspirations = if mode == GenMode::Cross {
            let id = pool[self.rng.gen_range(0..pool.len())];
            vec![self.archive.get(id).expect("inspiration archived").raw_text.clone()]
        } else {
            vec![]
        };

        let call = self.debit(CallKind::Patch, mode).expect("loop runs only below budget");
        let feedback = Feedback::Evaluation {
            metrics: format!(
                "compile_ok: {}\nsemantic_ok: {}\nscore: {}",
                u8::from(parent.compile_ok),
                u8::from(parent.semantic_ok),
                parent.score
            ),
            judge_feedback: (!parent.semantic_ok).then(|| parent.judge_rationale.clone()),
        };
        let output = self.generate(mode, Some(parent.raw_text.clone()), inspirations, feedback, self.cfg.patch_temperature, false);
        let origin = Origin { provenance: mode.into(), parent_id: Some(parent_id), island, call_index: call.index };
        let mut cand = self.candidate_from_output(output, &origin, parent.file.as_ref(), mode);
        let mut repairs_left = self.cfg.repair_max_attempts;

        let generation_failed = matches!(cand.error_type.as_deref(), Some("backend_failure" | "no_block"));
        if generation_failed {
            // nothing was proposed, so there is nothing to rewrite or repair
            self.finish(cand, call, false, &mut 0);
        } else if cand.file.is_some() && self.archive.contains_key(&cand.canonical) {
            match self.evolast_of(&parent, call.index, island) {
                Some(rep) => self.finish(rep, call, false, &mut repairs_left),
                None => self.finish(cand, call, false, &mut repairs_left),
            }
        } else {
            self.gate(&mut cand);
            if cand.compile_ok {
                self.finish(cand, call, true, &mut repairs_left);
            } else {
                match self.evolast_of(&parent, call.index, island) {
                    Some(rep) => self.finish(rep, call, false, &mut repairs_left),
                    None => self.finish(cand.clone(), call, false, &mut repairs_left),
                }
                if repairs_left > 0 {
                    if let Some(rcall) = self.debit(CallKind::CompileRepair, GenMode::CompileRepair) {
                        repairs_left -= 1;
                        let fb = Feedback::Compile {
                            error_type: cand.error_type.clone().unwrap_or_default(),
                            error_msg: cand.error_msg.clone(),
                        };
                        let out =
                            self.generate(GenMode::CompileRepair, Some(cand.raw_text.clone()), vec![], fb, self.cfg.repair_temperature, false);
                        let o = Origin { provenance: Provenance::CompileRepair, parent_id: Some(parent_id), island, call_index: rcall.index };
                        let mut fixed = self.candidate_from_output(out, &o, None, GenMode::CompileRepair);
                        self.gate(&mut fixed);
                        self.finish(fixed, rcall, true, &mut repairs_left);
                    }
                }
            }
        }
        self.migrations += self.archive.maybe_migrate(self.generation, self.cfg.migration_interval, self.cfg.migration_rate, &mut self.rng);
    }

    /// Judge (behind the gate), insert, log, and optionally issue one semantic repair.
    fn finish(&mut self, mut c: Candidate, call: Call, allow_semantic_repair: bool, repairs_left: &mut usize) {
        if c.compile_ok {
            match self.b.judge.judge(self.problem, &c.raw_text) {
                Ok(j) => {
                    c.semantic_ok = j.ok;
                    c.judge_rationale = j.rationale;
                }
                Err(err) => {
                    c.semantic_ok = false;
                    c.judge_rationale = format!("judge failure: {err}");
                }
            }
        }
        c.score = gated_score(c.compile_ok, c.semantic_ok);
        let inserted = self.archive.insert(c.clone()).accepted();
        self.record(&c, call, inserted);

        if c.compile_ok && !c.semantic_ok && allow_semantic_repair && *repairs_left > 0 {
            if let Some(rcall) = self.debit(CallKind::SemanticRepair, GenMode::SemanticRepair) {
                *repairs_left -= 1;
                let fb = Feedback::Critic(c.judge_rationale.clone());
                let out = self.generate(GenMode::SemanticRepair, Some(c.raw_text.clone()), vec![], fb, self.cfg.repair_temperature, false);
                let o = Origin { provenance: Provenance::SemanticRepair, parent_id: Some(c.id), island: c.island, call_index: rcall.index };
                let mut r = self.candidate_from_output(out, &o, None, GenMode::SemanticRepair);
                self.gate(&mut r);
                self.finish(r, rcall, false, repairs_left);
            }
        }
    }

    fn record(&mut self, c: &Candidate, call: Call, inserted: bool) {
        let ev = RunEvent {
            run_id: self.run_id.to_string(),
            problem_id: self.problem.problem_id.clone(),
            call_index: call.index,
            kind: call.kind,
            provenance: c.provenance,
            operator_mode: call.mode,
            candidate_id: c.id,
            compile_ok: c.compile_ok,
            semantic_ok: c.semantic_ok,
            score: c.score,
            canonical_key: c.canonical.to_string(),
            statement_text: c.raw_text.clone(),
            error_type: c.error_type.clone(),
            judge_rationale: c.compile_ok.then(|| c.judge_rationale.clone()),
            parent_id: c.parent_id,
            island: c.island,
            generation: c.generation,
            inserted,
            timestamp: None,
        };
        self.ledger.entries.push(LedgerEntry { call_index: call.index, kind: call.kind, representative_id: c.id });
        (self.sink)(&ev);
        self.events.push(ev);
    }

    fn generate(
        &mut self,
        mode: GenMode,
        parent_text: Option<String>,
        inspirations: Vec<String>,
        feedback: Feedback,
        temperature: f64,
        seed_model: bool,
    ) -> Output {
        let req = GeneratorRequest { mode, parent_text, inspirations, feedback, temperature, rng_seed: self.rng.gen() };
        let g = if seed_model { self.b.seed_generator } else { self.b.generator };
        match g.generate(self.problem, &req) {
            Ok(resp) => match extract_code_block(&resp) {
                Some(code) => Output::Text(code),
                None => Output::Failed { error_type: "no_block", msg: "response has no lean code block".into() },
            },
            Err(err) => Output::Failed { error_type: "backend_failure", msg: err.to_string() },
        }
    }

    /// Builds a candidate and applies the output protocol: single declaration,
    /// placeholder proof, and in diff mode the parent's preamble.
    fn candidate_from_output(&mut self, output: Output, o: &Origin, parent: Option<&StatementFile>, mode: GenMode) -> Candidate {
        let id = self.fresh_id();
        let mut c = Candidate {
            id,
            file: None,
            raw_text: String::new(),
            canonical: CanonicalKey::of_raw_text(""),
            compile_ok: false,
            semantic_ok: false,
            judge_rationale: String::new(),
            error_type: None,
            error_msg: String::new(),
            score: 0,
            usage_count: 0,
            island: o.island,
            generation: if o.provenance == Provenance::Seed { 0 } else { self.generation },
            provenance: o.provenance,
            parent_id: o.parent_id,
            call_index: o.call_index,
        };
        let text = match output {
            Output::Text(t) => t,
            Output::Failed { error_type, msg } => {
                c.error_type = Some(error_type.to_string());
                c.error_msg = msg;
                return c;
            }
        };
        match parse_file(&text) {
            Ok(mut f) => {
                if let (GenMode::Diff, Some(p)) = (mode, parent) {
                    f.preamble = p.preamble.clone();
                }
                f.proof_body = "by sorry".to_string();
                c.raw_text = print_file_with(&f, SymbolStyle::Unicode);
                c.canonical = canonicalize(&f);
                c.file = Some(f);
            }
            Err(err @ (ParseError::MultipleDeclarations { .. } | ParseError::NoDeclaration)) => {
                c.canonical = CanonicalKey::of_raw_text(&text);
                c.raw_text = text;
                c.error_type = Some("protocol".into());
                c.error_msg = err.to_string();
            }
            Err(_) => {
                c.canonical = CanonicalKey::of_raw_text(&text);
                c.raw_text = text;
            }
        }
        c
    }

    /// Compile gate. Protocol and generation failures never reach the compiler.
    fn gate(&mut self, c: &mut Candidate) {
        if c.error_type.is_some() {
            return;
        }
        match self.b.compiler.compile(&c.raw_text) {
            Ok(r) if r.ok => c.compile_ok = true,
            Ok(r) => {
                c.error_type = Some(r.error_type);
                c.error_msg = r.error_msg;
            }
            Err(err) => {
                c.error_type = Some("backend_failure".into());
                c.error_msg = err.to_string();
            }
        }
    }

    /// Zero-call fallback: a rewritten parent, gated. `None` when disabled or the
    /// parent has no rewrite sites.
    fn evolast_of(&mut self, parent: &Candidate, call_index: usize, island: usize) -> Option<Candidate> {
        if !self.cfg.evolast_enabled {
            return None;
        }
        let f = parent.file.as_ref()?;
        let v = evolast_variant(f, self.rng.gen(), self.cfg.evolast_max_steps)?;
        let id = self.fresh_id();
        let mut c = Candidate {
            id,
            raw_text: print_file_with(&v.file, SymbolStyle::Unicode),
            canonical: canonicalize(&v.file),
            file: Some(v.file),
            compile_ok: false,
            semantic_ok: false,
            judge_rationale: String::new(),
            error_type: None,
            error_msg: String::new(),
            score: 0,
            usage_count: 0,
            island,
            generation: self.generation,
            provenance: Provenance::Evolast,
            parent_id: Some(parent.id),
            call_index,
        };
        self.gate(&mut c);
        Some(c)
    }
}
