//! Chat-completion and compiler-service adapters over blocking HTTP.

use std::time::Duration;

use serde_json::{json, Value};

use super::{
    render_judge_prompt, render_prompt, render_prover_prompt, BackendError, CompileResult, Compiler, Generator, GeneratorRequest, Judge,
    JudgeResult, Prover,
};
use crate::problem::Problem;

const SYSTEM_PROMPT: &str = "You are a careful assistant for Lean 4 and Mathlib.";

#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub max_retries: u32,
    /// First retry delay; doubles on each further retry. Zero disables sleeping.
    pub backoff_base: Duration,
    pub timeout: Duration,
    pub max_tokens: u32,
}

impl Endpoint {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Endpoint {
        Endpoint {
            url: url.into(),
            model: model.into(),
            api_key: None,
            max_retries: 2,
            backoff_base: Duration::from_millis(500),
            timeout: Duration::from_secs(300),
            max_tokens: 4096,
        }
    }

    /// Reads `STMTEVO_<ROLE>_URL` and `STMTEVO_<ROLE>_MODEL`; the key comes from
    /// `STMTEVO_API_KEY`. `STMTEVO_MAX_RETRIES`, `STMTEVO_BACKOFF_MS` and
    /// `STMTEVO_TIMEOUT_S` override the retry policy for every role.
    pub fn from_env(role: &str) -> Option<Endpoint> {
        let url = std::env::var(format!("STMTEVO_{role}_URL")).ok()?;
        let model = std::env::var(format!("STMTEVO_{role}_MODEL")).unwrap_or_default();
        let mut ep = Endpoint::new(url, model);
        ep.api_key = std::env::var("STMTEVO_API_KEY").ok();
        let num = |name: &str| std::env::var(name).ok().and_then(|v| v.trim().parse::<u64>().ok());
        if let Some(n) = num("STMTEVO_MAX_RETRIES") {
            ep.max_retries = n as u32;
        }
        if let Some(ms) = num("STMTEVO_BACKOFF_MS") {
            ep.backoff_base = Duration::from_millis(ms);
        }
        if let Some(s) = num("STMTEVO_TIMEOUT_S") {
            ep.timeout = Duration::from_secs(s);
        }
        Some(ep)
    }
}

fn client(ep: &Endpoint) -> Result<reqwest::blocking::Client, BackendError> {
    reqwest::blocking::Client::builder().timeout(ep.timeout).build().map_err(|e| BackendError::failure(e.to_string()))
}

/// POSTs `body` and returns the decoded JSON response. Transport errors, 5xx and
/// 429 are retried up to `max_retries` times; anything else fails immediately.
pub fn post_json(ep: &Endpoint, body: &Value) -> Result<Value, BackendError> {
    let client = client(ep)?;
    let mut last = String::new();
    for attempt in 0..=ep.max_retries {
        if attempt > 0 && !ep.backoff_base.is_zero() {
            std::thread::sleep(ep.backoff_base * 2u32.saturating_pow(attempt - 1));
        }
        let mut rb = client.post(&ep.url).json(body);
        if let Some(key) = &ep.api_key {
            rb = rb.bearer_auth(key);
        }
        match rb.send() {
            Err(e) => last = format!("transport error: {e}"),
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    return resp.json::<Value>().map_err(|e| BackendError::failure(format!("invalid response body: {e}")));
                }
                last = format!("http status {status}");
                if !(status.is_server_error() || status.as_u16() == 429) {
                    break;
                }
            }
        }
        log::warn!("request to {} failed (attempt {}): {last}", ep.url, attempt + 1);
    }
    Err(BackendError::failure(last))
}

/// One chat-completion call; returns the assistant message text.
pub fn http_backend_call(ep: &Endpoint, prompt: &str, temperature: f64) -> Result<String, BackendError> {
    let body = json!({
        "model": ep.model,
        "messages": [
            {"role": "system", "content": SYSTEM_PROMPT},
            {"role": "user", "content": prompt},
        ],
        "temperature": temperature,
        "max_tokens": ep.max_tokens,
    });
    let v = post_json(ep, &body)?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::failure("response missing choices[0].message.content"))
}

pub struct HttpGenerator {
    pub endpoint: Endpoint,
}

impl Generator for HttpGenerator {
    fn generate(&self, problem: &Problem, req: &GeneratorRequest) -> Result<String, BackendError> {
        let prompt = render_prompt(req, &problem.informal_text)?;
        http_backend_call(&self.endpoint, &prompt, req.temperature)
    }
}

pub struct HttpJudge {
    pub endpoint: Endpoint,
}

/// Reads the judge's JSON verdict from free-form response text.
pub fn parse_judge_response(text: &str) -> Result<JudgeResult, BackendError> {
    let start = text.find('{');
    let end = text.rfind('}');
    let v: Value = match (start, end) {
        (Some(s), Some(e)) if s < e => serde_json::from_str(&text[s..=e]).map_err(|e| BackendError::failure(format!("judge JSON: {e}")))?,
        _ => return Err(BackendError::failure("judge response has no JSON object")),
    };
    let verdict = v.get("is_assistant_correct").and_then(Value::as_str).ok_or_else(|| BackendError::failure("judge verdict missing"))?;
    Ok(JudgeResult {
        ok: verdict.trim() == "Correct",
        rationale: v.get("reasons").and_then(Value::as_str).unwrap_or_default().to_string(),
    })
}

impl Judge for HttpJudge {
    fn judge(&self, problem: &Problem, file_text: &str) -> Result<JudgeResult, BackendError> {
        let prompt = render_judge_prompt(&problem.informal_text, file_text);
        parse_judge_response(&http_backend_call(&self.endpoint, &prompt, 0.0)?)
    }
}

pub struct HttpProver {
    pub endpoint: Endpoint,
    pub temperature: f64,
}

impl Prover for HttpProver {
    fn prove(&self, _problem: &Problem, lean_file: &str, _seed: u64) -> Result<String, BackendError> {
        http_backend_call(&self.endpoint, &render_prover_prompt(lean_file), self.temperature)
    }
}

/// Compiler service: POST `{file_text}`, response `{ok, error_type, error_msg}`.
pub struct HttpCompiler {
    pub endpoint: Endpoint,
}

impl HttpCompiler {
    fn check(&self, file_text: &str) -> Result<CompileResult, BackendError> {
        let v = post_json(&self.endpoint, &json!({ "file_text": file_text }))?;
        serde_json::from_value(v).map_err(|e| BackendError::failure(format!("compiler response: {e}")))
    }
}

impl Compiler for HttpCompiler {
    fn compile(&self, file_text: &str) -> Result<CompileResult, BackendError> {
        self.check(file_text)
    }

    fn verify_proof(&self, file_text: &str) -> Result<CompileResult, BackendError> {
        self.check(file_text)
    }
}
