use statrs::function::gamma::ln_gamma;

use crate::distributions::{effective_scale, TentParams};
use crate::error::Result;

/// Sufficient statistics of one leaf: a histogram of the responses that enter
/// the tent likelihood, plus the counts needed by the zero-inflation factor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LeafStats {
    hist: Vec<(i64, u32)>,
    n: usize,
    n1: usize,
}

impl LeafStats {
    /// `z[i] = true` marks a structural zero, excluded from the tent terms.
    pub fn from_obs(obs: &[usize], y: &[i64], z: Option<&[bool]>) -> Self {
        let mut values: Vec<i64> = Vec::with_capacity(obs.len());
        let mut n1 = 0;
        for &i in obs {
            if z.is_some_and(|z| z[i]) {
                n1 += 1;
            } else {
                values.push(y[i]);
            }
        }
        Self::from_active(values, obs.len(), n1)
    }

    /// Statistics for a plain response vector (no zero inflation).
    pub fn from_values(y: &[i64]) -> Self {
        Self::from_active(y.to_vec(), y.len(), 0)
    }

    fn from_active(mut values: Vec<i64>, n: usize, n1: usize) -> Self {
        let (lo, hi) = values
            .iter()
            .fold((i64::MAX, i64::MIN), |(lo, hi), &y| (lo.min(y), hi.max(y)));
        let mut hist: Vec<(i64, u32)> = Vec::new();
        if values.is_empty() {
            return Self { hist, n, n1 };
        }
        let span = hi.abs_diff(lo) as usize;
        if span <= 2 * values.len() + 64 {
            // Counting beats sorting for the narrow ranges counts usually have.
            let mut counts = vec![0u32; span + 1];
            for &y in &values {
                counts[(y - lo) as usize] += 1;
            }
            hist.extend(
                counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (lo + i as i64, c)),
            );
        } else {
            values.sort_unstable();
            for y in values {
                match hist.last_mut() {
                    Some((v, c)) if *v == y => *c += 1,
                    _ => hist.push((y, 1)),
                }
            }
        }
        Self { hist, n, n1 }
    }

    /// Observations routed to the leaf.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Structural zeros among them.
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn hist(&self) -> &[(i64, u32)] {
        &self.hist
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn log_lik_tent(&self, tent: &TentParams) -> f64 {
        self.hist
            .iter()
            .map(|&(y, c)| c as f64 * tent.log_pmf(y))
            .sum()
    }

    /// `Σ ln P_t(y; λ, ⌊e^k⌋)` over the active responses.
    pub fn log_lik(&self, lambda: i64, k: i64, t: f64) -> f64 {
        if self.hist.is_empty() {
            return 0.0;
        }
        let tent = TentParams::new(lambda, effective_scale(k), t).expect("validated tail mass");
        self.log_lik_tent(&tent)
    }
}

/// Leaf log-likelihood of responses under the tent with raw scale `k`.
pub fn leaf_log_lik(y: &[i64], lambda: i64, k: i64, t: f64) -> Result<f64> {
    let tent = TentParams::new(lambda, effective_scale(k), t)?;
    Ok(LeafStats::from_values(y).log_lik_tent(&tent))
}

/// `ln [Γ(h1+h2)Γ(h1+n1)Γ(h2+n−n1) / (Γ(h1)Γ(h2)Γ(h1+h2+n))]`.
pub fn zi_rho_log_factor(n: usize, n1: usize, h1: f64, h2: f64) -> f64 {
    let (n, n1) = (n as f64, n1 as f64);
    ln_gamma(h1 + h2) + ln_gamma(h1 + n1) + ln_gamma(h2 + n - n1)
        - ln_gamma(h1)
        - ln_gamma(h2)
        - ln_gamma(h1 + h2 + n)
}

/// Leaf likelihood with the zero-inflation probability integrated out
/// against its Beta prior.
pub fn zi_rho_marginal_leaf_lik(
    stats: &LeafStats,
    lambda: i64,
    k: i64,
    h1: f64,
    h2: f64,
    t: f64,
) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    zi_rho_log_factor(stats.n(), stats.n1(), h1, h2) + stats.log_lik(lambda, k, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_degenerate_leaves() {
        assert_eq!(leaf_log_lik(&[], 0, 0, 0.025).unwrap(), 0.0);
        // k = 0 gives k_eff = 1; k = -1 gives k_eff = 0.
        assert_eq!(leaf_log_lik(&[4], 4, -1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn two_observation_sum() {
        let expected = (0.95f64 * 3.0 / 9.0).ln() + 0.02475f64.ln();
        // k = 1 gives k_eff = ⌊e⌋ = 2
        let got = leaf_log_lik(&[0, 3], 0, 1, 0.025).unwrap();
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn histogram_matches_direct_sum() {
        let y = [3, 5, 3, 9, 12, 5, 5, 0];
        let stats = LeafStats::from_values(&y);
        assert_eq!(stats.hist(), &[(0, 1), (3, 2), (5, 3), (9, 1), (12, 1)]);
        let wide = LeafStats::from_values(&[1_000_000, -5, 1_000_000]);
        assert_eq!(wide.hist(), &[(-5, 1), (1_000_000, 2)]);
        let tent = TentParams::new(5, 7, 0.025).unwrap();
        let direct: f64 = y.iter().map(|&v| tent.log_pmf(v)).sum();
        assert!((stats.log_lik_tent(&tent) - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_inflated_counts() {
        let y = [0, 0, 3, 0];
        let z = [true, false, false, true];
        let stats = LeafStats::from_obs(&[0, 1, 2, 3], &y, Some(&z));
        assert_eq!((stats.n(), stats.n1()), (4, 2));
        assert_eq!(stats.hist(), &[(0, 1), (3, 1)]);
    }

    #[test]
    fn rho_factor_closed_form() {
        assert!((zi_rho_log_factor(2, 1, 1.0, 1.0) - (1.0f64 / 6.0).ln()).abs() < 1e-14);
        assert_eq!(zi_rho_log_factor(0, 0, 2.0, 3.0), 0.0);
        let y = [0, 5];
        let z = [true, false];
        let stats = LeafStats::from_obs(&[0, 1], &y, Some(&z));
        let q = TentParams::new(5, 2, 0.025).unwrap().log_pmf(5);
        let got = zi_rho_marginal_leaf_lik(&stats, 5, 1, 1.0, 1.0, 0.025);
        assert!((got - ((1.0f64 / 6.0).ln() + q)).abs() < 1e-13);
        assert_eq!(
            zi_rho_marginal_leaf_lik(&LeafStats::default(), 5, 1, 1.0, 1.0, 0.025),
            0.0
        );
    }
}
