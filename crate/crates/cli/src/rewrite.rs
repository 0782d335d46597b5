use serde::Serialize;

use stmtevo::derive_seed;
use stmtevo::evolast::{equiv_oracle, evolast_variant, statement_prop, OracleError};
use stmtevo::statement::{canonicalize, parse_file, print_file_with, SymbolStyle};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantReport {
    pub index: usize,
    pub text: String,
    pub steps: Vec<String>,
    pub canonical_key: String,
    /// `Some(true)` when the truth-table check passed, `None` when skipped or
    /// the table was too large.
    pub verified: Option<bool>,
}

/// Up to `n` rewrite variants of the statement in `text`.
pub fn cmd_evolast(text: &str, n: usize, seed: u64, max_steps: usize, verify: bool) -> Result<Vec<VariantReport>, CliError> {
    let f = parse_file(text).map_err(|e| CliError::Invalid(format!("statement does not parse: {e}")))?;
    let original = statement_prop(&f);
    let mut out = Vec::new();
    for i in 0..n {
        let Some(v) = evolast_variant(&f, derive_seed(&[&seed.to_le_bytes(), &(i as u64).to_le_bytes()]), max_steps.max(1)) else {
            return Err(CliError::Invalid("no rewrite sites in this statement".into()));
        };
        let verified = if verify {
            match equiv_oracle(&original, &statement_prop(&v.file), -2..=2) {
                Ok(ok) => Some(ok),
                Err(OracleError::OracleTooLarge { .. }) => None,
            }
        } else {
            None
        };
        out.push(VariantReport {
            index: i,
            text: print_file_with(&v.file, SymbolStyle::Unicode),
            steps: v.steps.iter().map(|s| s.rule.as_str().to_string()).collect(),
            canonical_key: canonicalize(&v.file).to_string(),
            verified,
        });
    }
    Ok(out)
}
