use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stmtevo::backends::GenMode;
use stmtevo::metrics::{
    exact_sign_test, gini, paired_bootstrap_ci, prefix_metrics, repertoire_for_proving, rr64_schedule, top_share, GINI_EPS,
};
use stmtevo::search::{CallKind, Provenance, RunEvent};

fn brute_gini(s: &[f64], eps: f64) -> f64 {
    let n = s.len() as f64;
    let mut num = 0.0;
    for a in s {
        for b in s {
            num += (a - b).abs();
        }
    }
    num / (2.0 * n * s.iter().sum::<f64>() + eps)
}

fn brute_top(s: &[f64], fraction: f64) -> f64 {
    let total: f64 = s.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let k = (fraction * s.len() as f64).ceil() as usize;
    // repeatedly take the leftmost maximum among what remains
    let mut left: Vec<Option<f64>> = s.iter().copied().map(Some).collect();
    let mut acc = 0.0;
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for (i, v) in left.iter().enumerate() {
            if let Some(v) = v {
                if best.map_or(true, |b| *v > left[b].unwrap()) {
                    best = Some(i);
                }
            }
        }
        let b = best.unwrap();
        acc += left[b].take().unwrap();
    }
    acc / total
}

#[test]
fn gini_and_top_share_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=200);
        let v: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0..30) as f64 }).collect();
        assert!((gini(&v, GINI_EPS) - brute_gini(&v, GINI_EPS)).abs() < 1e-12);
        assert!((top_share(&v, 0.1) - brute_top(&v, 0.1)).abs() < 1e-12);
    }
}

/// Two-sided tail probability from a row of Pascal's triangle built in f64.
fn pascal_sign_p(w: usize, l: usize) -> f64 {
    let n = w + l;
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.5 * row[0]];
        for i in 1..row.len() {
            next.push(0.5 * (row[i - 1] + row[i]));
        }
        next.push(0.5 * row[row.len() - 1]);
        row = next;
    }
    let lo = w.min(l);
    let hi = w.max(l);
    let p: f64 = row[..=lo].iter().sum::<f64>() + row[hi..].iter().sum::<f64>();
    p.min(1.0)
}

fn pattern(w: usize, l: usize, t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..w {
        a.push(1.0);
        b.push(0.0);
    }
    for _ in 0..l {
        a.push(0.0);
        b.push(1.0);
    }
    for i in 0..t {
        let x = (i % 2) as f64;
        a.push(x);
        b.push(x);
    }
    (a, b)
}

#[test]
fn sign_test_matches_pascal() {
    let (a, b) = pattern(16, 4, 80);
    let t = exact_sign_test(&a, &b).unwrap();
    assert_eq!((t.wins, t.losses, t.ties), (16, 4, 80));
    assert!((t.p_value - pascal_sign_p(16, 4)).abs() < 1e-12);
    assert!((t.p_value - 0.011818).abs() < 1e-6);
    for (w, l) in [(0, 1), (3, 9), (10, 10), (40, 2), (60, 61), (70, 80)] {
        let (a, b) = pattern(w, l, 3);
        let p = exact_sign_test(&a, &b).unwrap().p_value;
        assert!((p - pascal_sign_p(w, l)).abs() < 1e-12, "{w}/{l}: {p}");
    }
}

#[test]
fn bootstrap_on_the_win_loss_pattern() {
    let (a, b) = pattern(16, 4, 80);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ci = paired_bootstrap_ci(&a, &b, 10_000, 0.95, &mut rng).unwrap();
    assert!((ci.delta - 0.12).abs() < 1e-12);
    assert!((ci.lo - 0.04).abs() <= 0.015 && (ci.hi - 0.20).abs() <= 0.015, "{ci:?}");
    let mut again = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(paired_bootstrap_ci(&a, &b, 10_000, 0.95, &mut again).unwrap(), ci);
}

#[test]
fn schedule_conservation() {
    for m in 1..=64 {
        let s = rr64_schedule(m, 64);
        assert_eq!(s.len(), 64);
        let mut c = vec![0usize; m];
        for a in &s {
            c[a.statement_index] += 1;
        }
        assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1, "m={m}");
    }
}

fn event(i: usize, c: bool, j: bool, key: u8) -> RunEvent {
    RunEvent {
        run_id: "r".into(),
        problem_id: "p".into(),
        call_index: i,
        kind: CallKind::Patch,
        provenance: Provenance::Diff,
        operator_mode: GenMode::Diff,
        candidate_id: i,
        compile_ok: c,
        semantic_ok: c && j,
        score: u8::from(c) * (1 + u8::from(c && j)),
        canonical_key: format!("k{key}"),
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

proptest! {
    #[test]
    fn prefix_laws(flags in prop::collection::vec((any::<bool>(), any::<bool>(), 0u8..6), 1..60)) {
        let trace: Vec<RunEvent> = flags.iter().enumerate().map(|(i, &(c, j, k))| event(i + 1, c, j, k)).collect();
        let mut prev = prefix_metrics(&trace, 1);
        for t in 1..=trace.len() {
            let m = prefix_metrics(&trace, t);
            prop_assert!(m.ch >= prev.ch && m.sh >= prev.sh);
            prop_assert!(0.0 <= m.sy && m.sy <= m.fy && m.fy <= 1.0);
            prop_assert!((0.0..=1.0).contains(&m.sd));
            prop_assert_eq!(m.div, repertoire_for_proving(&trace[..t], usize::MAX).len());
            prev = m;
        }
    }

    #[test]
    fn concentration_bounds(v in prop::collection::vec(0u32..50, 1..100)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let g = gini(&v, GINI_EPS);
        prop_assert!((0.0..1.0).contains(&g));
        let s = top_share(&v, 0.1);
        if v.iter().sum::<f64>() > 0.0 {
            prop_assert!(s > 0.0 && s <= 1.0 + 1e-15);
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }
}
