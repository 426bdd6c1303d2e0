//! Log-space arithmetic and exact categorical draws from unnormalized log weights.

use rand::Rng;

/// `ln Σ exp(w_i)` with the max-shift; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(weights: &[f64]) -> f64 {
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = weights.iter().map(|w| (w - max).exp()).sum();
    max + sum.ln()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Draws an index with probability proportional to `exp(w_i)` by inverse CDF.
///
/// Returns `None` when every weight is `-inf` (or the slice is empty). The
/// scan order is the slice order, so a fixed RNG stream gives a fixed index.
pub fn sample_log_weights<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    // Small slices keep their shifted exponentials on the stack.
    let mut buf = [0.0; 64];
    let mut heap = Vec::new();
    let shifted: &mut [f64] = if weights.len() <= buf.len() {
        &mut buf[..weights.len()]
    } else {
        heap.resize(weights.len(), 0.0);
        &mut heap
    };
    for (s, w) in shifted.iter_mut().zip(weights) {
        *s = (w - max).exp();
    }
    let total: f64 = shifted.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &p) in shifted.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    // Rounding left `target` at or above the accumulated total.
    last_positive
}

/// Normalized probabilities from log weights (all-`-inf` gives all zeros).
pub fn normalize_log_weights(weights: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(weights);
    if !lse.is_finite() {
        return vec![0.0; weights.len()];
    }
    weights.iter().map(|w| (w - lse).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lse_matches_direct_sum() {
        let w = [0.1f64.ln(), 0.2f64.ln(), 0.7f64.ln()];
        assert!((log_sum_exp(&w) - 0.0).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        // large magnitudes do not overflow
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn log_add_exp_is_symmetric() {
        let a = 0.3f64.ln();
        let b = 0.6f64.ln();
        assert!((log_add_exp(a, b) - 0.9f64.ln()).abs() < 1e-14);
        assert!((log_add_exp(b, a) - 0.9f64.ln()).abs() < 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, a), a);
    }

    #[test]
    fn categorical_skips_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = [f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY];
        for _ in 0..100 {
            assert_eq!(sample_log_weights(&mut rng, &w), Some(1));
        }
        assert_eq!(sample_log_weights(&mut rng, &[f64::NEG_INFINITY]), None);
    }

    #[test]
    fn categorical_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let probs = [0.2, 0.5, 0.3];
        let w: Vec<f64> = probs.iter().map(|p: &f64| p.ln() + 500.0).collect();
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_log_weights(&mut rng, &w).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(probs) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.005);
        }
    }
}
