use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean_a: f64,
    pub mean_b: f64,
    pub delta: f64,
    pub lo: f64,
    pub hi: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Linear-interpolation percentile of sorted data, q in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos - pos.floor());
    match sorted.get(i + 1) {
        Some(next) if frac > 0.0 => sorted[i] + frac * (next - sorted[i]),
        _ => sorted[i],
    }
}

/// Paired bootstrap over problems for mean(a) − mean(b).
pub fn paired_bootstrap_ci<R: Rng>(a: &[f64], b: &[f64], reps: usize, level: f64, rng: &mut R) -> Result<BootstrapCi, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() || reps == 0 {
        return Err(MetricsError::Empty);
    }
    let n = a.len();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut deltas: Vec<f64> = (0..reps).map(|_| (0..n).map(|_| diff[rng.gen_range(0..n)]).sum::<f64>() / n as f64).collect();
    deltas.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        mean_a: mean(a),
        mean_b: mean(b),
        delta: mean(&diff),
        lo: percentile(&deltas, alpha),
        hi: percentile(&deltas, 1.0 - alpha),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub p_value: f64,
}

/// Two-sided exact sign test, ties dropped. The p-value sums both tails,
/// P(X ≥ max) + P(X ≤ min) under Binomial(wins+losses, 1/2), capped at 1; with
/// no untied pairs it is 1.
pub fn exact_sign_test(a: &[f64], b: &[f64]) -> Result<SignTest, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    let n = wins + losses;
    let p_value = if n == 0 {
        1.0
    } else {
        let k = wins.min(losses);
        (2.0 * lower_tail(n, k)).min(1.0)
    };
    Ok(SignTest { wins, losses, ties, p_value })
}

/// P(X ≤ k) for X ~ Binomial(n, 1/2).
fn lower_tail(n: usize, k: usize) -> f64 {
    if n <= 125 {
        // exact integer arithmetic: every C(125, j) and 2^125 fit in u128
        let mut c: u128 = 1;
        let mut sum: u128 = 1;
        for j in 0..k {
            c = c * (n - j) as u128 / (j + 1) as u128;
            sum += c;
        }
        return sum as f64 / 2f64.powi(n as i32);
    }
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    let mut terms = vec![0.0];
    for j in 0..k {
        ln_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        terms.push(ln_c);
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (top - ln_half_n + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bootstrap_degenerate_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = [0.0, 1.0, 1.0, 0.0];
        let ci = paired_bootstrap_ci(&a, &a, 500, 0.95, &mut rng).unwrap();
        assert_eq!((ci.delta, ci.lo, ci.hi), (0.0, 0.0, 0.0));
        let b: Vec<f64> = a.iter().map(|x| x - 1.0).collect();
        let ci = paired_bootstrap_ci(&a, &b, 500, 0.95, &mut rng).unwrap();
        assert_eq!((ci.delta, ci.lo, ci.hi), (1.0, 1.0, 1.0));
        assert_eq!(paired_bootstrap_ci(&a, &b[..2], 10, 0.95, &mut rng), Err(MetricsError::LengthMismatch { a: 4, b: 2 }));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert!((percentile(&v, 0.5) - 2.5).abs() < 1e-15);
        assert_eq!(percentile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn sign_test_conventions() {
        let t = exact_sign_test(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!((t.wins, t.losses, t.ties, t.p_value), (0, 0, 2, 1.0));
        assert_eq!(exact_sign_test(&[1.0], &[0.0]).unwrap().p_value, 1.0);
        assert_eq!(exact_sign_test(&[1.0, 0.0], &[0.0, 1.0]).unwrap().p_value, 1.0);
    }

    #[test]
    fn large_n_tail_agrees_with_exact_path() {
        // the log-space branch on n = 125 must agree with the integer branch
        for k in [0, 10, 40, 62] {
            let exact = lower_tail(125, k);
            let ln_half_n = 125.0 * std::f64::consts::LN_2;
            let mut ln_c = 0.0;
            let mut acc = (-ln_half_n).exp();
            for j in 0..k {
                ln_c += ((125 - j) as f64).ln() - ((j + 1) as f64).ln();
                acc += (ln_c - ln_half_n).exp();
            }
            assert!((exact - acc).abs() < 1e-12 * exact.max(1e-300) + 1e-15, "k={k}");
        }
        assert!(lower_tail(1000, 500) > 0.5 && lower_tail(1000, 500) < 0.52);
    }
}
