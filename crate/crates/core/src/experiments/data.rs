//! Synthetic two-covariate data on the quadrant partition at `x = 5`.

use crate::distributions::{effective_scale, TentParams};
use crate::error::{Error, Result};
use crate::tree::Dataset;
use rand::Rng;

/// Covariate range of both dimensions.
pub const X_MAX: f64 = 10.0;
/// Split point of both true rules.
pub const X_SPLIT: f64 = 5.0;

/// Quadrant index: 0 = (low, low), 1 = (low, high), 2 = (high, low),
/// 3 = (high, high). "Low" includes the split point.
pub fn quadrant(x1: f64, x2: f64) -> usize {
    2 * usize::from(x1 > X_SPLIT) + usize::from(x2 > X_SPLIT)
}

/// True locations of the count model, one per quadrant.
pub const TREE_MEANS: [i64; 4] = [10, 20, 30, 40];
/// Raw scale of every quadrant; effective scale `⌊e²⌋ = 7`.
pub const TREE_K: i64 = 2;

/// `(λ, k, ρ)` per quadrant of the zero-inflated model.
pub const ZI_PARAMS: [(i64, i64, f64); 4] = [(2, 1, 0.3), (3, 1, 0.0), (1, 0, 0.0), (7, 2, 0.2)];

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub data: Dataset,
    /// True location at each observation.
    pub g_true: Vec<i64>,
    /// Structural-zero indicators (all false without zero inflation).
    pub z: Vec<bool>,
}

impl SyntheticData {
    pub fn g_true_f64(&self) -> Vec<f64> {
        self.g_true.iter().map(|&g| g as f64).collect()
    }

    pub fn zero_fraction(&self) -> f64 {
        let y = self.data.y();
        y.iter().filter(|&&v| v == 0).count() as f64 / y.len() as f64
    }
}

fn covariates<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for _ in 0..n {
        x1.push(rng.random_range(0.0..X_MAX));
        x2.push(rng.random_range(0.0..X_MAX));
    }
    (x1, x2)
}

/// `Y ~ P_0(g(x), 7)` with `g` the quadrant step function.
pub fn generate_tree_data<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SyntheticData> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let (x1, x2) = covariates(rng, n);
    let mut y = Vec::with_capacity(n);
    let mut g_true = Vec::with_capacity(n);
    for i in 0..n {
        let g = TREE_MEANS[quadrant(x1[i], x2[i])];
        y.push(TentParams::new(g, effective_scale(TREE_K), 0.0)?.sample(rng));
        g_true.push(g);
    }
    Ok(SyntheticData {
        data: Dataset::new(vec![x1, x2], y)?,
        g_true,
        z: vec![false; n],
    })
}

/// `Z ~ Bern(ρ(x))`; `Y = 0` when `Z = 1`, else `Y ~ P_t(λ(x), ⌊e^k(x)⌋)`.
/// Negative tent draws are impossible here because `t = 0` and `λ ≥ ⌊e^k⌋`.
pub fn generate_zi_data<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SyntheticData> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let (x1, x2) = covariates(rng, n);
    let mut y = Vec::with_capacity(n);
    let mut g_true = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let (lambda, k, rho) = ZI_PARAMS[quadrant(x1[i], x2[i])];
        let zi = rho > 0.0 && rng.random_bool(rho);
        let tent = TentParams::new(lambda, effective_scale(k), 0.0)?;
        let draw = tent.sample(rng);
        y.push(if zi { 0 } else { draw });
        g_true.push(lambda);
        z.push(zi);
    }
    Ok(SyntheticData {
        data: Dataset::new(vec![x1, x2], y)?,
        g_true,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadrant_means() {
        assert_eq!(TREE_MEANS[quadrant(3.0, 3.0)], 10);
        assert_eq!(TREE_MEANS[quadrant(6.0, 6.0)], 40);
        assert_eq!(ZI_PARAMS[quadrant(3.0, 6.0)], (3, 1, 0.0));
        assert_eq!(quadrant(5.0, 5.0), 0);
    }

    #[test]
    fn tree_responses_stay_in_the_tent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = generate_tree_data(&mut rng, 2000).unwrap();
        for (y, g) in d.data.y().iter().zip(&d.g_true) {
            assert!((y - g).abs() <= 7);
        }
        assert!(generate_tree_data(&mut rng, 0).is_err());
    }

    #[test]
    fn zi_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = generate_zi_data(&mut rng, 400_000).unwrap();
        for i in 0..d.data.n() {
            let q = quadrant(d.data.x(i, 0), d.data.x(i, 1));
            if ZI_PARAMS[q].2 == 0.0 {
                assert!(!d.z[i]);
            }
            assert!(d.data.y()[i] >= 0);
        }
        // Tent masses at zero: 1/9 for (2, ⌊e⌋), 1/4 for (1, 1), 1/64 for (7, 7).
        let expected = 0.25 * (0.3 + 0.7 / 9.0 + 0.25 + 0.2 + 0.8 / 64.0);
        assert!(
            (d.zero_fraction() - expected).abs() < 0.003,
            "{}",
            d.zero_fraction()
        );
    }
}
