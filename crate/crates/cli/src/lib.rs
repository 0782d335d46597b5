//! Operational shell around the search engine: config and problem loading, run
//! orchestration, event logs, reports.
pub mod prove;
pub mod report;
pub mod rewrite;
pub mod run;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use stmtevo::search::{ConfigInvalid, SearchConfig};
use stmtevo::Problem;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigInvalid),
    #[error("{path}: line {line}: {reason}")]
    Schema { path: PathBuf, line: usize, reason: String },
    #[error("missing logs: {0}")]
    MissingLogs(String),
    #[error("backend setup: {0}")]
    Backend(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Which backend family drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Sim,
    Http,
}

/// Parses a TOML config; absent keys take the defaults.
pub fn parse_config(text: &str) -> Result<SearchConfig, ConfigInvalid> {
    let cfg: SearchConfig = toml::from_str(text).map_err(|e| {
        let field = e.message().split('`').nth(1).unwrap_or("<document>").to_string();
        ConfigInvalid { field, reason: e.message().trim().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SearchConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(parse_config(&text)?)
}

/// One problem per non-blank line; ids must be unique.
pub fn parse_problems(text: &str, path: &Path) -> Result<Vec<Problem>, CliError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |reason: String| CliError::Schema { path: path.to_path_buf(), line: i + 1, reason };
        let p: Problem = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        if p.problem_id.is_empty() {
            return Err(schema("empty problem_id".into()));
        }
        if !seen.insert(p.problem_id.clone()) {
            return Err(schema(format!("duplicate problem_id {:?}", p.problem_id)));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn load_problems(path: &Path) -> Result<Vec<Problem>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_problems(&text, path)
}

/// File-name-safe rendering of a problem id, prefixed by its position so that
/// ids differing only in unsafe characters stay distinct.
pub fn log_file_name(index: usize, problem_id: &str) -> String {
    let safe: String = problem_id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    format!("{index:04}_{safe}.jsonl")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("").unwrap(), SearchConfig::default());
        let c = parse_config("budget = 20\nislands = 1\n").unwrap();
        assert_eq!((c.budget, c.islands, c.capacity), (20, 1, 40));
    }

    #[test]
    fn bad_configs() {
        assert_eq!(parse_config("operator_probs = [0.5, 0.3, 0.3]").unwrap_err().field, "operator_probs");
        assert_eq!(parse_config("islands = 0").unwrap_err().field, "islands");
        assert_eq!(parse_config("bogus = 1").unwrap_err().field, "bogus");
        assert!(parse_config("budget = \"many\"").is_err());
    }

    #[test]
    fn problems_schema() {
        let p = Path::new("p.jsonl");
        let ok = "{\"problem_id\":\"a\",\"informal_text\":\"x\"}\n\n{\"problem_id\":\"b\",\"informal_text\":\"y\",\"preseeds\":[\"theorem t : True := by sorry\"]}\n";
        let v = parse_problems(ok, p).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].preseeds.len(), 1);
        let dup = "{\"problem_id\":\"a\",\"informal_text\":\"x\"}\n{\"problem_id\":\"a\",\"informal_text\":\"y\"}\n";
        assert!(matches!(parse_problems(dup, p), Err(CliError::Schema { line: 2, .. })));
        assert!(matches!(parse_problems("{\"problem_id\":\"a\"}", p), Err(CliError::Schema { line: 1, .. })));
        assert!(matches!(parse_problems("{\"problem_id\":\"a\",\"informal_text\":\"x\",\"extra\":1}", p), Err(CliError::Schema { .. })));
    }

    #[test]
    fn file_names_are_safe() {
        assert_eq!(log_file_name(3, "0063_usamo/2000 p4"), "0003_0063_usamo_2000_p4.jsonl");
    }
}
