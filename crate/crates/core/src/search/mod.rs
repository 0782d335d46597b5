mod archive;
mod config;
mod engine;
mod select;
mod types;

pub use archive::{Archive, InsertOutcome};
pub use config::{ConfigInvalid, SearchConfig};
pub use engine::run_problem;
pub use select::{gated_score, median, median_and_mad, parent_weights, parent_weights_with, sample_index, sample_island, sigmoid, SelectError};
pub use types::{BudgetLedger, CallKind, Candidate, LedgerEntry, Provenance, RunEvent, RunLog};
