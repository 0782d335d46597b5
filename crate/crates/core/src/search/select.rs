use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("empty list")]
    EmptyList,
    #[error("empty population")]
    EmptyPopulation,
    #[error("archive has no members")]
    EmptyArchive,
}

/// s = C·(1+J).
pub fn gated_score(compile_ok: bool, semantic_ok: bool) -> u8 {
    u8::from(compile_ok) * (1 + u8::from(semantic_ok))
}

pub fn median(values: &[f64]) -> Result<f64, SelectError> {
    if values.is_empty() {
        return Err(SelectError::EmptyList);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Median and median absolute deviation.
pub fn median_and_mad(values: &[f64]) -> Result<(f64, f64), SelectError> {
    let m = median(values)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    Ok((m, median(&dev)?))
}

/// Logistic function evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Parent-selection probabilities: robust z-scores through a sigmoid, damped by
/// 1/(1+(1+β)n) for parents already used n times.
pub fn parent_weights(scores: &[f64], usages: &[u32], lambda: f64, beta: f64, eps: f64) -> Result<Vec<f64>, SelectError> {
    parent_weights_with(scores, usages, lambda, beta, eps, true)
}

/// As [`parent_weights`]; with `usage_penalty` false every usage factor is 1.
pub fn parent_weights_with(
    scores: &[f64],
    usages: &[u32],
    lambda: f64,
    beta: f64,
    eps: f64,
    usage_penalty: bool,
) -> Result<Vec<f64>, SelectError> {
    if scores.is_empty() || scores.len() != usages.len() {
        return Err(SelectError::EmptyPopulation);
    }
    let (a0, mad) = median_and_mad(scores)?;
    let d = mad.max(eps);
    let w: Vec<f64> = scores
        .iter()
        .zip(usages)
        .map(|(&a, &n)| {
            let u = if usage_penalty { 1.0 / (1.0 + (1.0 + beta) * n as f64) } else { 1.0 };
            sigmoid(lambda * ((a - a0) / d)) * u
        })
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Index drawn from a discrete distribution (weights need not be normalized).
pub fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len().saturating_sub(1))
}

/// Uniform over islands that have at least one member.
pub fn sample_island<R: Rng>(island_sizes: &[usize], rng: &mut R) -> Result<usize, SelectError> {
    let nonempty: Vec<usize> = (0..island_sizes.len()).filter(|&i| island_sizes[i] > 0).collect();
    if nonempty.is_empty() {
        return Err(SelectError::EmptyArchive);
    }
    Ok(nonempty[rng.gen_range(0..nonempty.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn score_table() {
        assert_eq!(gated_score(false, false), 0);
        assert_eq!(gated_score(false, true), 0);
        assert_eq!(gated_score(true, false), 1);
        assert_eq!(gated_score(true, true), 2);
    }

    #[test]
    fn median_mad_examples() {
        assert_eq!(median_and_mad(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 1.0));
        assert_eq!(median_and_mad(&[2.0, 2.0, 2.0]).unwrap(), (2.0, 0.0));
        assert_eq!(median_and_mad(&[0.0, 1.0, 2.0, 10.0]).unwrap(), (1.5, 1.0));
        assert_eq!(median_and_mad(&[]), Err(SelectError::EmptyList));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1e10), 0.0);
        assert_eq!(sigmoid(1e10), 1.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn island_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(sample_island(&[0, 0], &mut rng), Err(SelectError::EmptyArchive));
        for _ in 0..100 {
            assert_eq!(sample_island(&[3, 0], &mut rng).unwrap(), 0);
            assert_eq!(sample_island(&[3], &mut rng).unwrap(), 0);
        }
        let n = 10_000;
        let ones = (0..n).filter(|_| sample_island(&[2, 5], &mut rng).unwrap() == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.02);
    }
}
