//! Seeded stand-ins for the generator, compiler, judge and prover.
//!
//! Each problem carries reference statements (the hidden ground truth) and an
//! optional profile describing how often generated text compiles and how often it
//! is semantically right, per generation mode.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BackendError, CompileResult, Compiler, Feedback, GenMode, Generator, GeneratorRequest, Judge, JudgeResult, Prover};
use crate::evolast::{equiv_oracle, evolast_variant};
use crate::problem::{derive_seed, Problem};
use crate::statement::{
    canonicalize, parse_file, print_binder, print_file_with, Binder, CanonicalKey, Conn, Expr, ParseError, Rel, StatementFile, SymbolStyle,
};

/// Names the simulated compiler treats as library symbols.
pub const MOCK_LIBRARY: &[&str] = &[
    "Type", "Sort", "Prop", "True", "False", "Not", "And", "Or", "Iff", "Nat", "Int", "Rat", "Real", "Complex", "ℕ", "ℤ", "ℚ", "ℝ", "ℂ",
    "Bool", "Fin", "Finset", "Set", "List", "Function", "Group", "CommGroup", "AddGroup", "Monoid", "Ring", "CommRing", "Field",
    "Module", "Ideal", "Subgroup", "IsSimpleGroup", "Fintype", "Finite", "Prime", "Even", "Odd", "Polynomial", "Matrix", "abs", "max",
    "min", "gcd", "lcm", "range", "card", "deriv", "sqrt", "exp", "log", "sin", "cos", "fun", "let", "in", "if", "then", "else", "at",
    "_",
];

/// Per-mode probabilities; unset modes fall back to `default`, then to the
/// caller's fallback.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeProbs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compile_repair: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_repair: Option<f64>,
}

impl ModeProbs {
    pub fn uniform(p: f64) -> ModeProbs {
        ModeProbs { default: Some(p), ..ModeProbs::default() }
    }

    pub fn get(&self, mode: GenMode, fallback: f64) -> f64 {
        let specific = match mode {
            GenMode::Seed => self.seed,
            GenMode::Full => self.full,
            GenMode::Diff => self.diff,
            GenMode::Cross => self.cross,
            GenMode::CompileRepair => self.compile_repair,
            GenMode::SemanticRepair => self.semantic_repair,
        };
        specific.or(self.default).unwrap_or(fallback)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimProfile {
    /// Base statements for generated text; empty means the problem's references.
    pub templates: Vec<String>,
    pub compile_prob: ModeProbs,
    pub semantic_prob: ModeProbs,
    /// Probability that a compile repair removes the reported defect.
    pub repair_fix_prob: f64,
    /// Always emit the first template verbatim.
    pub degenerate: bool,
    /// Rewrite steps applied to correct outputs at temperature 1.
    pub noise_steps: usize,
    pub extra_symbols: Vec<String>,
    pub prover_complete_prob: f64,
    pub prover_sorry_prob: f64,
}

const DEFAULT_COMPILE: f64 = 0.7;
const DEFAULT_SEMANTIC: f64 = 0.4;

impl Default for SimProfile {
    fn default() -> Self {
        SimProfile {
            templates: Vec::new(),
            compile_prob: ModeProbs::default(),
            semantic_prob: ModeProbs::default(),
            repair_fix_prob: 0.8,
            degenerate: false,
            noise_steps: 2,
            extra_symbols: Vec::new(),
            prover_complete_prob: 0.3,
            prover_sorry_prob: 0.4,
        }
    }
}

impl SimProfile {
    pub fn compile_p(&self, mode: GenMode) -> f64 {
        self.compile_prob.get(mode, DEFAULT_COMPILE)
    }

    pub fn semantic_p(&self, mode: GenMode) -> f64 {
        self.semantic_prob.get(mode, DEFAULT_SEMANTIC)
    }
}

struct SimProblem {
    profile: SimProfile,
    refs: Vec<StatementFile>,
    ref_keys: HashSet<CanonicalKey>,
    templates: Vec<String>,
}

pub struct SimBackend {
    problems: HashMap<String, SimProblem>,
    symbols: HashSet<String>,
}

const TYPO: &str = "_typo";
const EXTRA_DECL: &str = "\n\ntheorem extra_decl : True := by sorry";
const FALLBACK_TEMPLATE: &str = "import Mathlib\nimport Aesop\n\ntheorem stmt : True := by sorry";

impl SimBackend {
    pub fn new(problems: &[Problem]) -> SimBackend {
        let mut symbols: HashSet<String> = MOCK_LIBRARY.iter().map(|s| s.to_string()).collect();
        let mut map = HashMap::new();
        for p in problems {
            let profile = p.sim.clone().unwrap_or_default();
            symbols.extend(profile.extra_symbols.iter().cloned());
            let refs: Vec<StatementFile> = p.reference_statements.iter().filter_map(|r| parse_file(r).ok()).collect();
            let mut templates = if profile.templates.is_empty() { p.reference_statements.clone() } else { profile.templates.clone() };
            if templates.is_empty() {
                templates.push(FALLBACK_TEMPLATE.to_string());
            }
            for f in refs.iter().chain(templates.iter().filter_map(|t| parse_file(t).ok()).collect::<Vec<_>>().iter()) {
                for id in file_identifiers(f) {
                    symbols.insert(first_segment(&id).to_string());
                }
            }
            let ref_keys = refs.iter().map(canonicalize).collect();
            map.insert(p.problem_id.clone(), SimProblem { profile, refs, ref_keys, templates });
        }
        SimBackend { problems: map, symbols }
    }

    fn problem(&self, id: &str) -> Result<&SimProblem, BackendError> {
        self.problems.get(id).ok_or_else(|| BackendError::UnknownProblem(id.to_string()))
    }

    pub fn is_known(&self, id: &str) -> bool {
        self.symbols.contains(first_segment(id))
    }

    fn check_identifiers(&self, f: &StatementFile) -> Result<(), String> {
        let bound: HashSet<String> = f.all_bound_names().into_iter().collect();
        for id in file_identifiers(f) {
            let head = first_segment(&id);
            if !bound.contains(head) && !self.is_known(head) {
                return Err(id);
            }
        }
        Ok(())
    }

    /// Statement check: parses, one declaration, placeholder proof, known symbols.
    pub fn sim_compile(&self, text: &str) -> CompileResult {
        let f = match parse_file(text) {
            Ok(f) => f,
            Err(e @ (ParseError::MultipleDeclarations { .. } | ParseError::NoDeclaration)) => {
                return CompileResult::failure("protocol", e.to_string())
            }
            Err(e) => return CompileResult::failure("parse", e.to_string()),
        };
        if crate::statement::collapse_ws(&f.proof_body) != "by sorry" {
            return CompileResult::failure("protocol", format!("proof body must be `by sorry`, found `{}`", f.proof_body));
        }
        match self.check_identifiers(&f) {
            Ok(()) => CompileResult::success(),
            Err(id) => CompileResult::failure("unknown_identifier", format!("unknown identifier '{id}'")),
        }
    }

    /// Proof check: the header must compile; any proof body is accepted.
    pub fn sim_verify_proof(&self, text: &str) -> CompileResult {
        let f = match parse_file(text) {
            Ok(f) => f,
            Err(e) => return CompileResult::failure("parse", e.to_string()),
        };
        match self.check_identifiers(&f) {
            Ok(()) => CompileResult::success(),
            Err(id) => CompileResult::failure("unknown_identifier", format!("unknown identifier '{id}'")),
        }
    }

    pub fn sim_judge(&self, problem_id: &str, text: &str) -> Result<JudgeResult, BackendError> {
        let p = self.problem(problem_id)?;
        Ok(match parse_file(text) {
            Ok(f) => judge_against(p, &f),
            Err(e) => JudgeResult { ok: false, rationale: format!("statement does not parse: {e}") },
        })
    }

    pub fn sim_generate(&self, problem_id: &str, req: &GeneratorRequest) -> Result<String, BackendError> {
        let p = self.problem(problem_id)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[problem_id.as_bytes(), &req.rng_seed.to_le_bytes(), req.mode.as_str().as_bytes()]));
        let prof = &p.profile;
        let text = match req.mode {
            GenMode::CompileRepair => {
                let broken = req.parent_text.clone().unwrap_or_default();
                let kind = match &req.feedback {
                    Feedback::Compile { error_type, .. } => error_type.as_str(),
                    _ => "",
                };
                if rng.gen_bool(prof.repair_fix_prob.clamp(0.0, 1.0)) {
                    fix_defect(&broken, kind)
                } else {
                    broken
                }
            }
            _ if prof.degenerate => p.templates[0].clone(),
            mode => {
                let preamble = match (mode, req.parent_text.as_deref().map(parse_file)) {
                    (GenMode::SemanticRepair, Some(Ok(parent))) => Some(parent.preamble),
                    _ => None,
                };
                let correct = rng.gen_bool(prof.semantic_p(mode).clamp(0.0, 1.0));
                let mut out = if correct {
                    self.correct_variant(p, &mut rng, req.temperature)
                } else {
                    self.decoy(p, &mut rng)
                };
                if let (Some(pre), Ok(mut f)) = (preamble, parse_file(&out)) {
                    f.preamble = pre;
                    out = print_file_with(&f, SymbolStyle::Ascii);
                }
                if !rng.gen_bool(prof.compile_p(mode).clamp(0.0, 1.0)) {
                    out = self.inject_defect(&out, &mut rng);
                }
                out
            }
        };
        Ok(format!("```lean\n{}\n```", text.trim_end()))
    }

    fn correct_variant(&self, p: &SimProblem, rng: &mut ChaCha8Rng, temperature: f64) -> String {
        let template = p.templates.choose(rng).expect("templates nonempty");
        let Ok(mut f) = parse_file(template) else {
            return template.clone();
        };
        let steps = ((p.profile.noise_steps as f64) * temperature.max(0.0)).ceil() as usize;
        let n = rng.gen_range(0..=steps);
        if n > 0 {
            if let Some(v) = evolast_variant(&f, rng.gen(), n) {
                f = v.file;
            }
        }
        f.decl_name = format!("thm_{:04}", rng.gen_range(0..10_000));
        let style = if rng.gen_bool(0.5) { SymbolStyle::Unicode } else { SymbolStyle::Ascii };
        print_file_with(&f, style)
    }

    fn decoy(&self, p: &SimProblem, rng: &mut ChaCha8Rng) -> String {
        let template = p.templates.choose(rng).expect("templates nonempty");
        let Ok(base) = parse_file(template) else {
            return template.clone();
        };
        for _ in 0..8 {
            if let Some(mut f) = mutate(&base, rng) {
                f.decl_name = format!("thm_{:04}", rng.gen_range(0..10_000));
                if !judge_against(p, &f).ok {
                    return print_file_with(&f, SymbolStyle::Ascii);
                }
            }
        }
        let mut f = base;
        f.goal = Expr::atom("False");
        f.decl_name = format!("thm_{:04}", rng.gen_range(0..10_000));
        print_file_with(&f, SymbolStyle::Ascii)
    }

    fn inject_defect(&self, text: &str, rng: &mut ChaCha8Rng) -> String {
        let roll: f64 = rng.gen();
        if roll < 0.6 {
            if let Ok(mut f) = parse_file(text) {
                let bound: HashSet<String> = f.all_bound_names().into_iter().collect();
                let mut free: Vec<String> =
                    file_identifiers(&f).into_iter().filter(|id| !id.contains('.') && id != "_" && !bound.contains(id)).collect();
                free.sort();
                free.dedup();
                if let Some(target) = free.choose(rng).cloned() {
                    let mut rename = |id: &str| if id == target { format!("{id}{TYPO}") } else { id.to_string() };
                    for b in &mut f.binders {
                        b.type_expr.map_identifiers(&mut rename);
                    }
                    f.goal.map_identifiers(&mut rename);
                    return print_file_with(&f, SymbolStyle::Ascii);
                }
            }
        }
        if roll < 0.8 {
            if let Some(pos) = text.rfind(":= by sorry") {
                return format!("{}{}", &text[..pos], &text[pos + 3..]);
            }
        }
        format!("{}{EXTRA_DECL}", text.trim_end())
    }

    pub fn sim_prove(&self, problem_id: &str, lean_file: &str, seed: u64) -> Result<String, BackendError> {
        let p = self.problem(problem_id)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[b"prove", problem_id.as_bytes(), &seed.to_le_bytes()]));
        let roll: f64 = rng.gen();
        let prof = &p.profile;
        let head = match lean_file.rfind(":=") {
            Some(pos) => lean_file[..pos].trim_end(),
            None => lean_file.trim_end(),
        };
        let body = if roll < prof.prover_complete_prob {
            format!("{head} := by\n  intros\n  aesop")
        } else if roll < prof.prover_complete_prob + prof.prover_sorry_prob {
            format!("{head} := by\n  have h : True := trivial\n  sorry")
        } else {
            format!("{head} by\n  aesop")
        };
        Ok(format!("```lean4\n{body}\n```"))
    }
}

fn first_segment(id: &str) -> &str {
    id.split('.').next().unwrap_or(id)
}

fn file_identifiers(f: &StatementFile) -> Vec<String> {
    let mut ids = Vec::new();
    for b in &f.binders {
        b.type_expr.identifiers(&mut ids);
    }
    f.goal.identifiers(&mut ids);
    ids
}

fn judge_against(p: &SimProblem, f: &StatementFile) -> JudgeResult {
    if p.refs.is_empty() {
        return JudgeResult { ok: false, rationale: "no reference statement available".into() };
    }
    if p.ref_keys.contains(&canonicalize(f)) {
        return JudgeResult { ok: true, rationale: "matches a reference formalization".into() };
    }
    let mut first_mismatch = None;
    for r in &p.refs {
        match compare(r, f) {
            Ok(()) => return JudgeResult { ok: true, rationale: "equivalent to a reference formalization".into() },
            Err(m) => {
                first_mismatch.get_or_insert(m);
            }
        }
    }
    JudgeResult { ok: false, rationale: first_mismatch.unwrap_or_default() }
}

fn exprs_equivalent(a: &Expr, b: &Expr) -> bool {
    a == b || equiv_oracle(a, b, -2..=2).unwrap_or(false)
}

fn compare(r: &StatementFile, f: &StatementFile) -> Result<(), String> {
    if r.binders.len() != f.binders.len() {
        return Err(format!("binder count mismatch: expected {}, found {}", r.binders.len(), f.binders.len()));
    }
    let mut unused: Vec<&Binder> = r.binders.iter().collect();
    for b in &f.binders {
        let hit = unused.iter().position(|u| u.kind == b.kind && u.names == b.names && exprs_equivalent(&u.type_expr, &b.type_expr));
        match hit {
            Some(i) => {
                unused.remove(i);
            }
            None => return Err(format!("binder mismatch: {} has no counterpart", print_binder(b, SymbolStyle::Ascii))),
        }
    }
    if !exprs_equivalent(&r.goal, &f.goal) {
        return Err("goal mismatch: conclusion is not equivalent to the informal claim".into());
    }
    Ok(())
}

fn fix_defect(text: &str, kind: &str) -> String {
    match kind {
        "unknown_identifier" => text.replace(TYPO, ""),
        "parse" => match text.rfind(" by sorry") {
            Some(pos) if !text[..pos].trim_end().ends_with(":=") => format!("{} := by sorry{}", &text[..pos], &text[pos + 9..]),
            _ => text.to_string(),
        },
        "protocol" => {
            let mut out = Vec::new();
            let mut seen = false;
            for line in text.lines() {
                let t = line.trim_start();
                if t.starts_with("theorem ") || t.starts_with("lemma ") {
                    if seen {
                        break;
                    }
                    seen = true;
                }
                out.push(line);
            }
            out.join("\n").trim_end().to_string()
        }
        _ => text.to_string(),
    }
}

/// One semantic mutation: flip a relation, swap ∧/∨, or drop a binder group.
fn mutate(f: &StatementFile, rng: &mut ChaCha8Rng) -> Option<StatementFile> {
    let mut g = f.clone();
    match rng.gen_range(0..3) {
        0 => {
            let n = count_nodes(&g.goal, &|e| matches!(e, Expr::Relation { .. }));
            if n == 0 {
                return None;
            }
            let k = rng.gen_range(0..n);
            edit_nth(&mut g.goal, &|e| matches!(e, Expr::Relation { .. }), k, &mut |e| {
                if let Expr::Relation { op, .. } = e {
                    *op = match op {
                        Rel::Eq => Rel::Ne,
                        Rel::Ne => Rel::Eq,
                        Rel::Lt => Rel::Le,
                        Rel::Le => Rel::Lt,
                        Rel::Gt => Rel::Ge,
                        Rel::Ge => Rel::Gt,
                    };
                }
            });
        }
        1 => {
            let is_andor = |e: &Expr| matches!(e, Expr::Connective { op: Conn::And | Conn::Or, .. });
            let n = count_nodes(&g.goal, &is_andor);
            if n == 0 {
                return None;
            }
            let k = rng.gen_range(0..n);
            edit_nth(&mut g.goal, &is_andor, k, &mut |e| {
                if let Expr::Connective { op, .. } = e {
                    *op = if *op == Conn::And { Conn::Or } else { Conn::And };
                }
            });
        }
        _ => {
            if g.binders.is_empty() {
                return None;
            }
            let i = rng.gen_range(0..g.binders.len());
            g.binders.remove(i);
        }
    }
    Some(g)
}

/// Pre-order count over the logical skeleton (terms are not entered).
fn count_nodes(e: &Expr, pred: &dyn Fn(&Expr) -> bool) -> usize {
    let own = usize::from(pred(e));
    own + match e {
        Expr::Connective { operands, .. } => operands.iter().map(|o| count_nodes(o, pred)).sum(),
        Expr::Arrow(a, b) => count_nodes(a, pred) + count_nodes(b, pred),
        Expr::Quantifier { body, .. } => count_nodes(body, pred),
        _ => 0,
    }
}

fn edit_nth(e: &mut Expr, pred: &dyn Fn(&Expr) -> bool, k: usize, edit: &mut dyn FnMut(&mut Expr)) -> Option<usize> {
    let mut k = k;
    if pred(e) {
        if k == 0 {
            edit(e);
            return None;
        }
        k -= 1;
    }
    let children: Vec<&mut Expr> = match e {
        Expr::Connective { operands, .. } => operands.iter_mut().collect(),
        Expr::Arrow(a, b) => vec![a.as_mut(), b.as_mut()],
        Expr::Quantifier { body, .. } => vec![body.as_mut()],
        _ => vec![],
    };
    for c in children {
        k = edit_nth(c, pred, k, edit)?;
    }
    Some(k)
}

impl Generator for SimBackend {
    fn generate(&self, problem: &Problem, req: &GeneratorRequest) -> Result<String, BackendError> {
        self.sim_generate(&problem.problem_id, req)
    }
}

impl Compiler for SimBackend {
    fn compile(&self, file_text: &str) -> Result<CompileResult, BackendError> {
        Ok(self.sim_compile(file_text))
    }

    fn verify_proof(&self, file_text: &str) -> Result<CompileResult, BackendError> {
        Ok(self.sim_verify_proof(file_text))
    }
}

impl Judge for SimBackend {
    fn judge(&self, problem: &Problem, file_text: &str) -> Result<JudgeResult, BackendError> {
        self.sim_judge(&problem.problem_id, file_text)
    }
}

impl Prover for SimBackend {
    fn prove(&self, problem: &Problem, lean_file: &str, seed: u64) -> Result<String, BackendError> {
        self.sim_prove(&problem.problem_id, lean_file, seed)
    }
}
