//! Log-probability evaluation and sampling for the tent pmf, the location and
//! scale priors, and the odd-heavy Poisson mixture used as a multimodal target.
//!
//! The tent `P_t(λ, k)` places mass `(1−2t)(k+1−|y−λ|)/(k+1)²` on the
//! `2k+1` points within `k` of `λ` and splits the remaining `2t` between two
//! geometric tails with success probability `p* = min{0.99, (1−2t)/(t(k+1)²)}`.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest effective scale; `⌊e^k⌋` saturates here so `(k+1)²` stays finite
/// and exactly representable.
pub const MAX_EFFECTIVE_SCALE: u64 = 1 << 26;

/// Cap on the geometric tail success probability.
pub const P_STAR_CAP: f64 = 0.99;

/// Location, effective scale and tail mass of a tent pmf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentParams {
    lambda: i64,
    k_eff: u64,
    t: f64,
    p_star: f64,
    log_body: f64,
    log_tail_edge: f64,
    log_tail_decay: f64,
}

impl TentParams {
    pub fn new(lambda: i64, k_eff: u64, t: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&t) {
            return Err(Error::Domain(format!("tail mass t={t} outside [0, 0.5)")));
        }
        if k_eff > MAX_EFFECTIVE_SCALE {
            return Err(Error::Domain(format!(
                "effective scale {k_eff} exceeds {MAX_EFFECTIVE_SCALE}"
            )));
        }
        let width = (k_eff + 1) as f64;
        let log_body = (1.0 - 2.0 * t).ln() - 2.0 * width.ln();
        let (p_star, log_tail_edge, log_tail_decay) = if t > 0.0 {
            let p = P_STAR_CAP.min((1.0 - 2.0 * t) / (t * width * width));
            (p, t.ln() + p.ln(), (1.0 - p).ln())
        } else {
            (f64::NAN, f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        Ok(Self {
            lambda,
            k_eff,
            t,
            p_star,
            log_body,
            log_tail_edge,
            log_tail_decay,
        })
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn k_eff(&self) -> u64 {
        self.k_eff
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Tail success probability; `None` when `t = 0` (no tails).
    pub fn p_star(&self) -> Option<f64> {
        (self.t > 0.0).then_some(self.p_star)
    }

    /// Whether `p*` hit the 0.99 cap.
    pub fn p_star_capped(&self) -> bool {
        self.t > 0.0 && self.p_star == P_STAR_CAP
    }

    pub fn log_pmf(&self, y: i64) -> f64 {
        let d = y.abs_diff(self.lambda);
        if d <= self.k_eff {
            ((self.k_eff + 1 - d) as f64).ln() + self.log_body
        } else if self.t == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_tail_edge + (d - self.k_eff - 1) as f64 * self.log_tail_decay
        }
    }

    pub fn pmf(&self, y: i64) -> f64 {
        self.log_pmf(y).exp()
    }

    /// Same tent shifted to a new location (scale and tail constants reused).
    pub fn with_lambda(mut self, lambda: i64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        if self.t > 0.0 && u < 2.0 * self.t {
            // Failures before the first success, counted from the tent edge.
            let g = Geometric::new(self.p_star)
                .expect("p* lies in (0, 0.99]")
                .sample(rng) as i64;
            let offset = self.k_eff as i64 + 1 + g;
            if u < self.t {
                self.lambda - offset
            } else {
                self.lambda + offset
            }
        } else {
            // The sum of two uniforms on {0..k} has the triangular law on {0..2k}.
            let k = self.k_eff as i64;
            let a = rng.random_range(0..=k);
            let b = rng.random_range(0..=k);
            self.lambda + a + b - k
        }
    }
}

/// `ln P_t(y; λ, k_eff)`.
pub fn tent_log_pmf(y: i64, p: &TentParams) -> f64 {
    p.log_pmf(y)
}

pub fn tent_sample<R: Rng + ?Sized>(rng: &mut R, p: &TentParams) -> i64 {
    p.sample(rng)
}

/// `⌊e^k⌋`, zero for negative `k`, saturating at [`MAX_EFFECTIVE_SCALE`].
pub fn effective_scale(k: i64) -> u64 {
    if k < 0 {
        return 0;
    }
    if k >= 40 {
        return MAX_EFFECTIVE_SCALE;
    }
    ((k as f64).exp().floor() as u64).min(MAX_EFFECTIVE_SCALE)
}

/// `0` for `λ ≤ 1`, `ln λ` otherwise.
pub fn tilde_log(lambda: i64) -> Result<f64> {
    if lambda < 0 {
        return Err(Error::Domain(format!("tilde_log of negative {lambda}")));
    }
    Ok(tilde_log_clamped(lambda))
}

// Total over all integers: values at or below 1 map to 0.
fn tilde_log_clamped(lambda: i64) -> f64 {
    if lambda <= 1 {
        0.0
    } else {
        (lambda as f64).ln()
    }
}

/// Depth-dependent tent prior on the raw scale `k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalePrior {
    pub kappa: u64,
    pub beta_k: f64,
    pub t_k: f64,
}

impl ScalePrior {
    pub fn new(kappa: u64, beta_k: f64, t_k: f64) -> Result<Self> {
        if !(beta_k >= 0.0 && beta_k.is_finite()) {
            return Err(Error::Domain(format!(
                "beta_k={beta_k} must be finite and >= 0"
            )));
        }
        if !(0.0..0.5).contains(&t_k) {
            return Err(Error::Domain(format!("t_k={t_k} outside [0, 0.5)")));
        }
        Ok(Self { kappa, beta_k, t_k })
    }

    /// `⌊κ / 2^depth⌋`.
    pub fn location(&self, depth: u32) -> i64 {
        if depth >= 64 {
            0
        } else {
            (self.kappa >> depth) as i64
        }
    }

    /// `⌊log̃(λ) / (1+depth)^{β_k}⌋`.
    pub fn scale(&self, lambda: i64, depth: u32) -> u64 {
        let s = tilde_log_clamped(lambda) / (1.0 + depth as f64).powf(self.beta_k);
        s.floor() as u64
    }

    /// Tent over `k` given the leaf location and depth.
    pub fn tent(&self, lambda: i64, depth: u32) -> TentParams {
        TentParams::new(self.location(depth), self.scale(lambda, depth), self.t_k)
            .expect("validated at construction")
    }

    pub fn log_pmf(&self, k: i64, lambda: i64, depth: u32) -> f64 {
        self.tent(lambda, depth).log_pmf(k)
    }
}

/// `ln π(k_b | λ_b)` at a node of the given depth.
pub fn scale_prior_log_pmf(k: i64, lambda: i64, depth: u32, sp: &ScalePrior) -> f64 {
    sp.log_pmf(k, lambda, depth)
}

/// Discrete uniform prior on `{d1, …, d2}` for the leaf location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LocationPrior {
    pub d1: i64,
    pub d2: i64,
}

impl LocationPrior {
    pub fn new(d1: i64, d2: i64) -> Result<Self> {
        if d1 < 0 || d2 < d1 {
            return Err(Error::Domain(format!(
                "location prior bounds [{d1}, {d2}] invalid"
            )));
        }
        Ok(Self { d1, d2 })
    }

    /// Bounds from the observed range of the responses.
    pub fn from_data(y: &[i64]) -> Result<Self> {
        let d1 = y
            .iter()
            .copied()
            .min()
            .ok_or_else(|| Error::Domain("empty response".into()))?;
        let d2 = y.iter().copied().max().unwrap_or(d1);
        Self::new(d1, d2)
    }

    pub fn contains(&self, lambda: i64) -> bool {
        (self.d1..=self.d2).contains(&lambda)
    }

    pub fn size(&self) -> usize {
        (self.d2 - self.d1 + 1) as usize
    }

    pub fn log_pmf(&self, lambda: i64) -> f64 {
        if self.contains(lambda) {
            -(self.size() as f64).ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

pub fn location_prior_log_pmf(lambda: i64, lp: &LocationPrior) -> f64 {
    lp.log_pmf(lambda)
}

/// `ln Pois(y; rate)` via log-gamma.
pub fn poisson_log_pmf(y: i64, rate: f64) -> f64 {
    if y < 0 {
        return f64::NEG_INFINITY;
    }
    let y = y as f64;
    y * rate.ln() - rate - ln_gamma(y + 1.0)
}

/// Poisson reweighted so even states carry weight `w` and odd states `1−w`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MultimodalTarget {
    pub w: f64,
    pub rate: f64,
}

impl Default for MultimodalTarget {
    fn default() -> Self {
        Self {
            w: 0.0005,
            rate: 10.0,
        }
    }
}

impl MultimodalTarget {
    pub fn new(w: f64, rate: f64) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain(format!("even weight w={w} outside (0, 1)")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("rate={rate} must be positive")));
        }
        Ok(Self { w, rate })
    }

    pub fn log_unnorm(&self, lambda: i64) -> f64 {
        if lambda < 0 {
            return f64::NEG_INFINITY;
        }
        let weight = if lambda % 2 == 0 {
            self.w
        } else {
            1.0 - self.w
        };
        weight.ln() + poisson_log_pmf(lambda, self.rate)
    }

    /// Normalizing constant over `ℤ≥0`, in closed form:
    /// `Σ_even Pois = (1+e^{−2r})/2`.
    pub fn normalizer(&self) -> f64 {
        let even = 0.5 * (1.0 + (-2.0 * self.rate).exp());
        self.w * even + (1.0 - self.w) * (1.0 - even)
    }

    pub fn log_pmf(&self, lambda: i64) -> f64 {
        self.log_unnorm(lambda) - self.normalizer().ln()
    }

    /// Normalized probabilities on `{0, …, max}`.
    pub fn pmf_table(&self, max: i64) -> Vec<f64> {
        (0..=max).map(|l| self.log_pmf(l).exp()).collect()
    }
}

pub fn multimodal_log_unnorm(lambda: i64, tgt: &MultimodalTarget) -> f64 {
    tgt.log_unnorm(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tent(l: i64, k: u64, t: f64) -> TentParams {
        TentParams::new(l, k, t).unwrap()
    }

    #[test]
    fn tent_body_and_tail_values() {
        let p = tent(0, 2, 0.025);
        assert!((tent_log_pmf(0, &p) - (0.95f64 * 3.0 / 9.0).ln()).abs() < 1e-14);
        assert!((tent_log_pmf(3, &p) - 0.02475f64.ln()).abs() < 1e-14);
        assert!(p.p_star_capped());
        assert_eq!(tent_log_pmf(5, &tent(0, 2, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn tent_rejects_bad_params() {
        assert!(TentParams::new(0, 1, 0.5).is_err());
        assert!(TentParams::new(0, 1, -0.1).is_err());
        assert!(TentParams::new(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn tent_uncapped_tail_continues_the_edge() {
        let p = tent(3, 7, 0.2);
        assert!(!p.p_star_capped());
        let edge = 0.6 / 64.0;
        assert!((p.pmf(3 + 8) - edge).abs() < 1e-15);
        assert!((p.pmf(3 + 7) - edge).abs() < 1e-15);
    }

    #[test]
    fn tent_normalizes() {
        for &(k, t) in &[(0u64, 0.01), (2, 0.025), (7, 0.05), (20, 0.3), (5, 0.0)] {
            let p = tent(0, k, t);
            let total: f64 = (-(k as i64) - 20_000..=(k as i64) + 20_000)
                .map(|y| p.pmf(y))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "k={k} t={t} total={total}");
        }
    }

    #[test]
    fn tent_sampling_is_degenerate_at_zero_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(tent_sample(&mut rng, &tent(0, 0, 0.0)), 0);
            assert_eq!(tent_sample(&mut rng, &tent(7, 0, 0.0)), 7);
        }
    }

    #[test]
    fn tent_sampling_matches_pmf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = tent(0, 2, 0.025);
        let n = 1_000_000;
        let mut counts = std::collections::BTreeMap::<i64, usize>::new();
        for _ in 0..n {
            *counts.entry(p.sample(&mut rng)).or_default() += 1;
        }
        let lo = *counts.keys().next().unwrap();
        let hi = *counts.keys().last().unwrap();
        let mut tv = 0.0;
        for y in lo.min(-40)..=hi.max(40) {
            let emp = *counts.get(&y).unwrap_or(&0) as f64 / n as f64;
            tv += (emp - p.pmf(y)).abs();
        }
        assert!(0.5 * tv < 0.005, "tv={}", 0.5 * tv);
    }

    #[test]
    fn effective_scale_values() {
        assert_eq!(effective_scale(2), 7);
        assert_eq!(effective_scale(0), 1);
        assert_eq!(effective_scale(-3), 0);
        assert_eq!(effective_scale(1), 2);
        assert_eq!(effective_scale(4), 54);
        assert_eq!(effective_scale(100), MAX_EFFECTIVE_SCALE);
    }

    #[test]
    fn tilde_log_values() {
        assert_eq!(tilde_log(1).unwrap(), 0.0);
        assert_eq!(tilde_log(0).unwrap(), 0.0);
        assert!((tilde_log(10).unwrap() - std::f64::consts::LN_10).abs() < 1e-15);
        assert!(tilde_log(-1).is_err());
    }

    #[test]
    fn scale_prior_floors() {
        let sp = ScalePrior::new(4, 1.0, 0.025).unwrap();
        assert_eq!((sp.location(1), sp.scale(1, 1)), (2, 0));
        assert_eq!((sp.location(0), sp.scale(10, 0)), (4, 2));
        let sp0 = ScalePrior::new(0, 1.0, 0.025).unwrap();
        assert_eq!((sp0.location(0), sp0.scale(0, 0)), (0, 0));
        let expected = tent(4, 2, 0.025).log_pmf(5);
        assert_eq!(scale_prior_log_pmf(5, 10, 0, &sp), expected);
    }

    #[test]
    fn location_prior_values() {
        let lp = LocationPrior::new(0, 9).unwrap();
        assert!((location_prior_log_pmf(5, &lp) - 0.1f64.ln()).abs() < 1e-15);
        assert_eq!(location_prior_log_pmf(10, &lp), f64::NEG_INFINITY);
        assert_eq!(LocationPrior::new(0, 0).unwrap().log_pmf(0), 0.0);
        assert!(LocationPrior::new(3, 2).is_err());
    }

    #[test]
    fn multimodal_values() {
        let tgt = MultimodalTarget::default();
        assert!((multimodal_log_unnorm(0, &tgt) - (0.0005f64.ln() - 10.0)).abs() < 1e-12);
        assert_eq!(multimodal_log_unnorm(-1, &tgt), f64::NEG_INFINITY);
        let p21 = tgt.log_pmf(21).exp();
        assert!((p21 - 1.776e-3).abs() < 1e-6, "p21={p21}");
    }

    #[test]
    fn multimodal_even_mass_by_brute_force() {
        let tgt = MultimodalTarget::default();
        let mut even = 0.0;
        let mut total = 0.0;
        for l in 0..400 {
            let p = tgt.log_unnorm(l).exp();
            total += p;
            if l % 2 == 0 {
                even += p;
            }
        }
        assert!((total - tgt.normalizer()).abs() < 1e-14);
        // About 0.05%, not 0.1%.
        assert!(
            (even / total - 0.0005).abs() < 1e-6,
            "even={}",
            even / total
        );
    }
}
