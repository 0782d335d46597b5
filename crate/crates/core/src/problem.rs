use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backends::sim::SimProfile;

/// One informal input. `reference_statements` feed the simulated judge and the
/// oracle proving mode; `preseeds` replace seed-model calls (each still debited).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub problem_id: String,
    pub informal_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_statements: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preseeds: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimProfile>,
}

impl Problem {
    pub fn new(id: impl Into<String>, informal: impl Into<String>) -> Problem {
        Problem {
            problem_id: id.into(),
            informal_text: informal.into(),
            reference_statements: Vec::new(),
            preseeds: Vec::new(),
            sim: None,
        }
    }
}

/// Stable 64-bit seed from a sequence of byte strings.
pub fn derive_seed(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}
