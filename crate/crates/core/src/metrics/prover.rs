use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::statement::classify_proof_output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledAttempt {
    pub statement_index: usize,
    pub sample_index: usize,
}

/// Round-robin allocation of `budget` attempts over `m` statements: attempt t
/// goes to statement t mod m as its (t div m)-th sample.
pub fn rr64_schedule(m: usize, budget: usize) -> Vec<ScheduledAttempt> {
    if m == 0 {
        return Vec::new();
    }
    (0..budget).map(|t| ScheduledAttempt { statement_index: t % m, sample_index: t / m }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverAttempt {
    pub problem_id: String,
    pub statement_index: usize,
    pub sample_index: usize,
    pub output_text: String,
    pub pass: bool,
    pub complete: bool,
    pub theorem_complete: bool,
}

impl ProverAttempt {
    /// `verified` is the external verifier's verdict; text alone never sets pass.
    pub fn classify(problem_id: &str, slot: ScheduledAttempt, output_text: String, verified: bool) -> ProverAttempt {
        let c = classify_proof_output(&output_text);
        ProverAttempt {
            problem_id: problem_id.to_string(),
            statement_index: slot.statement_index,
            sample_index: slot.sample_index,
            output_text,
            pass: verified,
            complete: verified && c.complete,
            theorem_complete: verified && c.theorem_complete,
        }
    }
}

/// Problem counts out of `n`; problems without attempts count as failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofUtility {
    pub n: usize,
    pub attempted: usize,
    pub pass: usize,
    pub complete: usize,
    pub theorem_complete: usize,
}

pub fn proof_utility(attempts: &[ProverAttempt], n: usize) -> ProofUtility {
    let mut by_problem: BTreeMap<&str, [bool; 3]> = BTreeMap::new();
    for a in attempts {
        let f = by_problem.entry(&a.problem_id).or_default();
        f[0] |= a.pass;
        f[1] |= a.complete;
        f[2] |= a.theorem_complete;
    }
    let count = |i: usize| by_problem.values().filter(|f| f[i]).count();
    ProofUtility { n, attempted: by_problem.len(), pass: count(0), complete: count(1), theorem_complete: count(2) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(m: usize) -> Vec<usize> {
        let mut c = vec![0; m];
        for a in rr64_schedule(m, 64) {
            c[a.statement_index] += 1;
        }
        c
    }

    #[test]
    fn schedule_shapes() {
        let s = rr64_schedule(1, 64);
        assert_eq!(s.len(), 64);
        assert!(s.iter().enumerate().all(|(i, a)| a.statement_index == 0 && a.sample_index == i));
        assert_eq!(counts(64), vec![1; 64]);
        assert_eq!(counts(3), vec![22, 21, 21]);
        assert!(rr64_schedule(0, 64).is_empty());
    }

    #[test]
    fn utility_counts() {
        assert_eq!(proof_utility(&[], 100), ProofUtility { n: 100, attempted: 0, pass: 0, complete: 0, theorem_complete: 0 });
        let slot = ScheduledAttempt { statement_index: 0, sample_index: 0 };
        let ok = ProverAttempt::classify("a", slot, "theorem t : True := by\n  trivial".into(), true);
        let sorry = ProverAttempt::classify("b", slot, "theorem t : True := by\n  sorry".into(), true);
        let rejected = ProverAttempt::classify("c", slot, "theorem t : True := by\n  trivial".into(), false);
        assert!(ok.theorem_complete && sorry.pass && !sorry.complete && !rejected.pass && !rejected.complete);
        let u = proof_utility(&[ok, sorry, rejected], 100);
        assert_eq!(u, ProofUtility { n: 100, attempted: 3, pass: 2, complete: 1, theorem_complete: 1 });
    }

    #[test]
    fn decomposition_mirror() {
        // 57 problems attempted, 13 of them solved at theorem level
        let slot = ScheduledAttempt { statement_index: 0, sample_index: 0 };
        let attempts: Vec<ProverAttempt> = (0..57)
            .map(|i| {
                let text = if i < 13 { "lemma l : True := by\n  trivial" } else { "lemma l : True := by\n  sorry" };
                ProverAttempt::classify(&format!("p{i}"), slot, text.into(), true)
            })
            .collect();
        let u = proof_utility(&attempts, 100);
        assert_eq!((u.attempted, u.theorem_complete, u.n), (57, 13, 100));
    }
}
