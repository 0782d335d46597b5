use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Feedback, GenMode, GeneratorRequest};

pub const INITIAL: &str = include_str!("templates/initial.txt");
pub const SKELETON: &str = include_str!("templates/skeleton.txt");
pub const FULL_ADDENDA: &str = include_str!("templates/full_addenda.txt");
pub const DIFF_PREFIX: &str = include_str!("templates/diff_prefix.txt");
pub const CROSS_PREFIX: &str = include_str!("templates/cross_prefix.txt");
pub const INSPIRATION: &str = include_str!("templates/inspiration.txt");
pub const COMPILE_REPAIR: &str = include_str!("templates/compile_repair.txt");
pub const SEMANTIC_REPAIR: &str = include_str!("templates/semantic_repair.txt");
pub const JUDGE: &str = include_str!("templates/judge.txt");
pub const PROVER: &str = include_str!("templates/prover.txt");

const PLACEHOLDERS: &[&str] = &[
    "informal",
    "code_content",
    "performance_metrics",
    "text_feedback_section",
    "original_code",
    "compile_error_type",
    "compile_error_msg",
    "critic_feedback",
    "inspiration_code_1",
    "lean_statement",
    "lean_file",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("missing value for placeholder {{{0}}}")]
    MissingPlaceholder(String),
}

/// The five full-mode addenda, one per line.
pub fn full_addenda() -> Vec<&'static str> {
    FULL_ADDENDA.lines().collect()
}

/// Single-pass substitution of `{name}` placeholders. Braces that do not form a
/// known placeholder (e.g. the JSON object in the judge template) are left alone,
/// and substituted values are never rescanned.
pub fn fill(template: &str, values: &HashMap<&str, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let name = after.find('}').map(|close| &after[..close]).filter(|n| PLACEHOLDERS.contains(n));
        match name {
            Some(n) => {
                let v = values.get(n).ok_or_else(|| PromptError::MissingPlaceholder(n.to_string()))?;
                out.push_str(v);
                rest = &after[n.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Renders the generator prompt for a request. Prefixes and the full-mode addendum
/// are placed before the shared skeleton; the cross inspiration block follows the
/// cross prefix.
pub fn render_prompt(req: &GeneratorRequest, informal: &str) -> Result<String, PromptError> {
    let mut v: HashMap<&str, String> = HashMap::new();
    v.insert("informal", informal.to_string());
    if let Some(p) = &req.parent_text {
        v.insert("code_content", p.clone());
        v.insert("original_code", p.clone());
    }
    match &req.feedback {
        Feedback::None => {}
        Feedback::Compile { error_type, error_msg } => {
            v.insert("compile_error_type", error_type.clone());
            v.insert("compile_error_msg", error_msg.clone());
        }
        Feedback::Critic(text) => {
            v.insert("critic_feedback", text.clone());
        }
        Feedback::Evaluation { metrics, judge_feedback } => {
            v.insert("performance_metrics", metrics.clone());
            let section = match judge_feedback {
                Some(t) if !t.is_empty() => format!("\n\nJudge feedback:\n{t}"),
                _ => String::new(),
            };
            v.insert("text_feedback_section", section);
        }
    }
    match req.mode {
        GenMode::Seed => fill(INITIAL, &v),
        GenMode::Full => {
            let addenda = full_addenda();
            let mut rng = ChaCha8Rng::seed_from_u64(req.rng_seed);
            let pick = addenda[rng.gen_range(0..addenda.len())];
            Ok(format!("{pick}\n\n{}", fill(SKELETON, &v)?))
        }
        GenMode::Diff => Ok(format!("{DIFF_PREFIX}\n\n{}", fill(SKELETON, &v)?)),
        GenMode::Cross => {
            let insp = req.inspirations.first().ok_or_else(|| PromptError::MissingPlaceholder("inspiration_code_1".into()))?;
            v.insert("inspiration_code_1", insp.clone());
            Ok(format!("{CROSS_PREFIX}\n\n{}\n\n{}", fill(INSPIRATION, &v)?, fill(SKELETON, &v)?))
        }
        GenMode::CompileRepair => fill(COMPILE_REPAIR, &v),
        GenMode::SemanticRepair => fill(SEMANTIC_REPAIR, &v),
    }
}

pub fn render_judge_prompt(informal: &str, lean_statement: &str) -> String {
    let v = HashMap::from([("informal", informal.to_string()), ("lean_statement", lean_statement.to_string())]);
    fill(JUDGE, &v).expect("judge placeholders supplied")
}

pub fn render_prover_prompt(lean_file: &str) -> String {
    let v = HashMap::from([("lean_file", lean_file.to_string())]);
    fill(PROVER, &v).expect("prover placeholder supplied")
}
