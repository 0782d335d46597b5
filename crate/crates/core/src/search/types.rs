use serde::{Deserialize, Serialize};

use crate::backends::GenMode;
use crate::statement::{CanonicalKey, StatementFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Seed,
    Patch,
    CompileRepair,
    SemanticRepair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Full,
    Diff,
    Cross,
    CompileRepair,
    SemanticRepair,
    Evolast,
}

impl From<GenMode> for Provenance {
    fn from(m: GenMode) -> Provenance {
        match m {
            GenMode::Seed => Provenance::Seed,
            GenMode::Full => Provenance::Full,
            GenMode::Diff => Provenance::Diff,
            GenMode::Cross => Provenance::Cross,
            GenMode::CompileRepair => Provenance::CompileRepair,
            GenMode::SemanticRepair => Provenance::SemanticRepair,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: usize,
    /// `None` when the text did not parse.
    pub file: Option<StatementFile>,
    pub raw_text: String,
    pub canonical: CanonicalKey,
    pub compile_ok: bool,
    pub semantic_ok: bool,
    pub judge_rationale: String,
    pub error_type: Option<String>,
    pub error_msg: String,
    pub score: u8,
    pub usage_count: u32,
    pub island: usize,
    pub generation: usize,
    pub provenance: Provenance,
    pub parent_id: Option<usize>,
    /// Debited call that produced this candidate.
    pub call_index: usize,
}

/// One debited call and the candidate that represents it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub call_index: usize,
    pub kind: CallKind,
    pub representative_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub limit: usize,
    pub entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn count(&self, kind: CallKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }
}

/// Log record for one debited call. The sole input to the metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEvent {
    pub run_id: String,
    pub problem_id: String,
    pub call_index: usize,
    pub kind: CallKind,
    pub provenance: Provenance,
    /// Generation mode of the debited call (differs from provenance for EvolAST
    /// representatives).
    pub operator_mode: GenMode,
    pub candidate_id: usize,
    pub compile_ok: bool,
    pub semantic_ok: bool,
    pub score: u8,
    pub canonical_key: String,
    pub statement_text: String,
    pub error_type: Option<String>,
    pub judge_rationale: Option<String>,
    pub parent_id: Option<usize>,
    pub island: usize,
    pub generation: usize,
    pub inserted: bool,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub problem_id: String,
    pub events: Vec<RunEvent>,
    pub ledger: BudgetLedger,
    /// Distinct parent ids selected during the loop, ascending.
    pub parents_used: Vec<usize>,
    pub archive_size: usize,
    pub migrations: usize,
}
