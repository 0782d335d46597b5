//! Reporting formulas over event streams. Every function reads only the logged
//! events, so metrics can be recomputed from any log prefix.
mod prover;
mod stats;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search::{CallKind, Provenance, RunEvent};

pub use prover::{proof_utility, rr64_schedule, ProofUtility, ProverAttempt, ScheduledAttempt};
pub use stats::{exact_sign_test, paired_bootstrap_ci, percentile, BootstrapCi, SignTest};

pub const GINI_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("t = {t} outside 1..={len}")]
    OutOfRange { t: usize, len: usize },
    #[error("paired vectors differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallMetrics {
    pub fy: f64,
    pub ch: f64,
    pub sh: f64,
    pub sd: f64,
    pub sy: f64,
    pub div: usize,
}

fn is_hit(e: &RunEvent) -> bool {
    e.compile_ok && e.semantic_ok
}

/// Metrics over the first `t` events of one problem's trace.
pub fn per_call_metrics(events: &[RunEvent], t: usize) -> Result<CallMetrics, MetricsError> {
    if t == 0 || t > events.len() {
        return Err(MetricsError::OutOfRange { t, len: events.len() });
    }
    Ok(prefix_metrics(events, t))
}

/// As [`per_call_metrics`], but a trace shorter than `t` is measured whole and
/// an empty trace scores zero everywhere.
pub fn prefix_metrics(events: &[RunEvent], t: usize) -> CallMetrics {
    let e = &events[..t.min(events.len())];
    if e.is_empty() {
        return CallMetrics { fy: 0.0, ch: 0.0, sh: 0.0, sd: 0.0, sy: 0.0, div: 0 };
    }
    let n = e.len() as f64;
    let feasible = e.iter().filter(|x| x.compile_ok).count();
    let hits = e.iter().filter(|x| is_hit(x)).count();
    let div = e.iter().filter(|x| is_hit(x)).map(|x| &x.canonical_key).collect::<HashSet<_>>().len();
    CallMetrics {
        fy: feasible as f64 / n,
        ch: f64::from(u8::from(feasible > 0)),
        sh: f64::from(u8::from(hits > 0)),
        sd: if feasible == 0 { 0.0 } else { hits as f64 / feasible as f64 },
        sy: hits as f64 / n,
        div,
    }
}

/// Σ_i Σ_j |s_i − s_j| / (2N Σ s + eps).
pub fn gini(counts: &[f64], eps: f64) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    // sorted form of the double sum: Σ_i (2i − n + 1)·s_(i), counted twice
    let mut s = counts.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let pairs: f64 = s.iter().enumerate().map(|(i, v)| (2.0 * i as f64 - n as f64 + 1.0) * v).sum::<f64>() * 2.0;
    let total: f64 = s.iter().sum();
    pairs / (2.0 * n as f64 * total + eps)
}

/// Share of the total held by the ⌈fraction·N⌉ largest counts; among equal
/// counts the lower index is taken first.
pub fn top_share(counts: &[f64], fraction: f64) -> f64 {
    let total: f64 = counts.iter().sum();
    if counts.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let k = ((fraction * counts.len() as f64).ceil() as usize).clamp(1, counts.len());
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].total_cmp(&counts[a]).then(a.cmp(&b)));
    order[..k].iter().map(|&i| counts[i]).sum::<f64>() / total
}

/// Call index of the first compile-and-judge success, `None` past the budget.
pub fn first_hit(events: &[RunEvent]) -> Option<usize> {
    events.iter().find(|e| is_hit(e)).map(|e| e.call_index)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetAudit {
    /// Seed and patch calls.
    pub gen: usize,
    pub crep: usize,
    pub srep: usize,
    /// Compilable representatives, each of which went to the judge exactly once.
    pub judge_calls: usize,
    pub evolast_judge: usize,
}

impl BudgetAudit {
    pub fn total(&self) -> usize {
        self.gen + self.crep + self.srep
    }
}

pub fn budget_audit<'a>(traces: impl IntoIterator<Item = &'a [RunEvent]>) -> BudgetAudit {
    let mut a = BudgetAudit::default();
    for e in traces.into_iter().flatten() {
        match e.kind {
            CallKind::Seed | CallKind::Patch => a.gen += 1,
            CallKind::CompileRepair => a.crep += 1,
            CallKind::SemanticRepair => a.srep += 1,
        }
        if e.compile_ok {
            a.judge_calls += 1;
            if e.provenance == Provenance::Evolast {
                a.evolast_judge += 1;
            }
        }
    }
    a
}

/// Distinct semantic successes in call order, earliest instance per key, at
/// most `cap` of them.
pub fn repertoire_for_proving(events: &[RunEvent], cap: usize) -> Vec<&RunEvent> {
    let mut seen = HashSet::new();
    let mut hits: Vec<&RunEvent> = events.iter().filter(|e| is_hit(e)).collect();
    hits.sort_by_key(|e| e.call_index);
    hits.into_iter().filter(|e| seen.insert(e.canonical_key.as_str())).take(cap).collect()
}

/// Dataset-level summary at budget `t`. Per-problem rates are averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    pub n: usize,
    pub t: usize,
    pub ch: f64,
    pub sh: f64,
    pub fy: f64,
    pub sd: f64,
    pub sy: f64,
    pub mean_div: f64,
    pub gini: f64,
    pub top10_share: f64,
    /// Deduplicated semantic successes per problem, in input order.
    pub success_counts: Vec<usize>,
}

pub fn dataset_metrics(traces: &[&[RunEvent]], t: usize) -> DatasetMetrics {
    let per: Vec<CallMetrics> = traces.iter().map(|e| prefix_metrics(e, t)).collect();
    let n = per.len();
    let mean = |f: fn(&CallMetrics) -> f64| if n == 0 { 0.0 } else { per.iter().map(f).sum::<f64>() / n as f64 };
    let counts: Vec<f64> = per.iter().map(|m| m.div as f64).collect();
    DatasetMetrics {
        n,
        t,
        ch: mean(|m| m.ch),
        sh: mean(|m| m.sh),
        fy: mean(|m| m.fy),
        sd: mean(|m| m.sd),
        sy: mean(|m| m.sy),
        mean_div: mean(|m| m.div as f64),
        gini: gini(&counts, GINI_EPS),
        top10_share: top_share(&counts, 0.10),
        success_counts: per.iter().map(|m| m.div).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::GenMode;

    pub(crate) fn ev(call_index: usize, c: bool, j: bool, key: &str) -> RunEvent {
        RunEvent {
            run_id: "r".into(),
            problem_id: "p".into(),
            call_index,
            kind: CallKind::Patch,
            provenance: Provenance::Full,
            operator_mode: GenMode::Full,
            candidate_id: call_index,
            compile_ok: c,
            semantic_ok: c && j,
            score: u8::from(c) * (1 + u8::from(c && j)),
            canonical_key: key.into(),
            statement_text: String::new(),
            error_type: None,
            judge_rationale: None,
            parent_id: None,
            island: 0,
            generation: 0,
            inserted: false,
            timestamp: None,
        }
    }

    #[test]
    fn call_metric_examples() {
        let m = per_call_metrics(&[ev(1, true, true, "a")], 1).unwrap();
        assert_eq!(m, CallMetrics { fy: 1.0, ch: 1.0, sh: 1.0, sd: 1.0, sy: 1.0, div: 1 });
        let fails = [ev(1, false, false, "a"), ev(2, false, false, "b")];
        let m = per_call_metrics(&fails, 2).unwrap();
        assert_eq!((m.fy, m.sd, m.ch), (0.0, 0.0, 0.0));
        let dup = [ev(1, true, true, "k"), ev(2, true, false, "x"), ev(3, true, true, "k")];
        let m = per_call_metrics(&dup, 3).unwrap();
        assert_eq!(m.div, 1);
        assert!((m.sd - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(per_call_metrics(&dup, 4), Err(MetricsError::OutOfRange { t: 4, len: 3 }));
        assert_eq!(per_call_metrics(&dup, 0), Err(MetricsError::OutOfRange { t: 0, len: 3 }));
    }

    #[test]
    fn gini_and_top_share_examples() {
        assert!((gini(&[0.0, 0.0, 0.0, 4.0], 0.0) - 0.75).abs() < 1e-12);
        assert_eq!(gini(&[1.0; 4], GINI_EPS), 0.0);
        assert_eq!(gini(&[0.0; 5], GINI_EPS), 0.0);
        assert!((top_share(&[1.0; 10], 0.1) - 0.1).abs() < 1e-15);
        let mut v = vec![0.0; 10];
        v[9] = 10.0;
        assert_eq!(top_share(&v, 0.1), 1.0);
        assert_eq!(top_share(&[0.0; 3], 0.1), 0.0);
    }

    #[test]
    fn top_share_tie_takes_lower_index() {
        // N=20 gives two slots; the tie between indices 1 and 2 at 5 resolves to index 1
        let mut v = vec![1.0; 20];
        v[0] = 9.0;
        v[1] = 5.0;
        v[2] = 5.0;
        let total: f64 = v.iter().sum();
        assert_eq!(top_share(&v, 0.1), (9.0 + 5.0) / total);
        // the other resolution has the same mass here, so check the selected set directly
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        assert_eq!(&order[..2], &[0, 1]);
    }

    #[test]
    fn first_hit_and_repertoire() {
        let t = [ev(1, false, false, "a"), ev(2, true, false, "b"), ev(3, true, false, "c"), ev(4, true, true, "d")];
        assert_eq!(first_hit(&t), Some(4));
        assert_eq!(first_hit(&t[..3]), None);
        let t = [ev(1, true, true, "x"), ev(2, true, true, "y"), ev(3, true, true, "x"), ev(4, false, false, "z"), ev(5, true, true, "z")];
        let r: Vec<usize> = repertoire_for_proving(&t, 64).iter().map(|e| e.call_index).collect();
        assert_eq!(r, vec![1, 2, 5]);
        let many: Vec<RunEvent> = (1..=70).map(|i| ev(i, true, true, &format!("k{i}"))).collect();
        let r = repertoire_for_proving(&many, 64);
        assert_eq!(r.len(), 64);
        assert_eq!(r.last().unwrap().call_index, 64);
    }

    #[test]
    fn audit_partitions_calls() {
        let mut t = vec![ev(1, true, true, "a"), ev(2, false, false, "b"), ev(3, true, false, "c")];
        t[0].kind = CallKind::Seed;
        t[1].kind = CallKind::Patch;
        t[1].provenance = Provenance::Evolast;
        t[2].kind = CallKind::SemanticRepair;
        t[2].provenance = Provenance::Evolast;
        let a = budget_audit([t.as_slice()]);
        assert_eq!(a, BudgetAudit { gen: 2, crep: 0, srep: 1, judge_calls: 2, evolast_judge: 1 });
        assert_eq!(a.total(), 3);
    }
}
