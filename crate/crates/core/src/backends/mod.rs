//! Generator, compiler, judge and prover interfaces with simulated and HTTP
//! implementations.

pub mod http;
pub mod prompts;
pub mod sim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;

pub use prompts::{render_judge_prompt, render_prompt, render_prover_prompt, PromptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenMode {
    Seed,
    Full,
    Diff,
    Cross,
    CompileRepair,
    SemanticRepair,
}

impl GenMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GenMode::Seed => "seed",
            GenMode::Full => "full",
            GenMode::Diff => "diff",
            GenMode::Cross => "cross",
            GenMode::CompileRepair => "compile_repair",
            GenMode::SemanticRepair => "semantic_repair",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feedback {
    None,
    Compile { error_type: String, error_msg: String },
    Critic(String),
    /// Parent evaluation shown to the patch operators.
    Evaluation { metrics: String, judge_feedback: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRequest {
    pub mode: GenMode,
    /// Parent file for patch modes, failing/rejected file for repairs.
    pub parent_text: Option<String>,
    pub inspirations: Vec<String>,
    pub feedback: Feedback,
    pub temperature: f64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileResult {
    pub ok: bool,
    #[serde(default)]
    pub error_type: String,
    #[serde(default)]
    pub error_msg: String,
}

impl CompileResult {
    pub fn success() -> CompileResult {
        CompileResult { ok: true, error_type: String::new(), error_msg: String::new() }
    }

    pub fn failure(error_type: &str, error_msg: impl Into<String>) -> CompileResult {
        CompileResult { ok: false, error_type: error_type.to_string(), error_msg: error_msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeResult {
    pub ok: bool,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend failure: {cause}")]
    BackendFailure { cause: String },
    #[error("response has no lean code block")]
    NoBlock,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("unknown problem {0}")]
    UnknownProblem(String),
}

impl BackendError {
    pub fn failure(cause: impl Into<String>) -> BackendError {
        BackendError::BackendFailure { cause: cause.into() }
    }
}

/// Produces a raw model response (expected to contain one fenced Lean block).
pub trait Generator: Send + Sync {
    fn generate(&self, problem: &Problem, req: &GeneratorRequest) -> Result<String, BackendError>;
}

pub trait Compiler: Send + Sync {
    /// Statement check: the file must elaborate with a placeholder proof.
    fn compile(&self, file_text: &str) -> Result<CompileResult, BackendError>;
    /// Proof check for prover outputs; `sorry` is accepted.
    fn verify_proof(&self, file_text: &str) -> Result<CompileResult, BackendError>;
}

pub trait Judge: Send + Sync {
    fn judge(&self, problem: &Problem, file_text: &str) -> Result<JudgeResult, BackendError>;
}

pub trait Prover: Send + Sync {
    fn prove(&self, problem: &Problem, lean_file: &str, seed: u64) -> Result<String, BackendError>;
}

#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub seed_generator: &'a dyn Generator,
    pub generator: &'a dyn Generator,
    pub compiler: &'a dyn Compiler,
    pub judge: &'a dyn Judge,
}

/// Contents of the first fenced block tagged `lean` or `lean4`.
pub fn extract_code_block(response: &str) -> Option<String> {
    let mut lines = response.split('\n');
    while let Some(line) = lines.next() {
        let t = line.trim();
        let Some(tag) = t.strip_prefix("```") else {
            continue;
        };
        if tag.trim() != "lean" && tag.trim() != "lean4" {
            continue;
        }
        let mut body = Vec::new();
        for inner in lines.by_ref() {
            if inner.trim() == "```" {
                return Some(body.join("\n"));
            }
            body.push(inner);
        }
        return Some(body.join("\n"));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_block_extraction() {
        assert_eq!(extract_code_block("```lean\nX\n```").as_deref(), Some("X"));
        assert_eq!(extract_code_block("no fence here"), None);
        assert_eq!(extract_code_block("```lean4\nA\n```\ntext\n```lean\nB\n```").as_deref(), Some("A"));
        assert_eq!(extract_code_block("```python\nx\n```\n```lean\nY\nZ\n```").as_deref(), Some("Y\nZ"));
        assert_eq!(extract_code_block("```\nx\n```"), None);
    }
}
