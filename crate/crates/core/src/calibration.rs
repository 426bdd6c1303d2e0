//! Data-driven starting values for the scale-prior location `κ` and the tent
//! tail mass `t`, given training responses and an expected leaf depth `d̂`.
//!
//! At the grand-mean level the model suggests
//! `ŷ₁₋ₜ − m ≤ e^⌊κ/2^d̂⌋ < ŷ₁₋ₜ − m + 1`, with `m` the sample median and
//! `ŷ₁₋ₜ` the sample `(1−t)`-quantile. [`estimate_kappa`] picks `κ` from that
//! relation, [`estimate_t`] picks `t` by Hellinger distance to tent pmfs, and
//! [`estimate_kappa_t`] alternates the two.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{effective_scale, TentParams};
use crate::error::{Error, Result};
use crate::metrics::EmpiricalPmf;
use crate::tree::TreePrior;

/// Depth at which prior tree draws stop splitting.
pub const MAX_PRIOR_DEPTH: u32 = 50;
pub const DEFAULT_GRID_INCREMENT: f64 = 0.005;
/// Largest candidate tail mass.
pub const MAX_T: f64 = 0.49;

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n−1)q`).
pub fn quantile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Validation("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(sorted: &[f64]) -> Result<f64> {
    quantile(sorted, 0.5)
}

/// Mean terminal-node depth under the tree prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_leaves: u64,
}

/// Pools the depths of every terminal node over `n_draws` prior trees. A node
/// at depth `d` splits with probability `α(1+d)^−β`.
pub fn estimate_depth<R: Rng + ?Sized>(
    rng: &mut R,
    prior: &TreePrior,
    n_draws: usize,
) -> Result<DepthEstimate> {
    if n_draws == 0 {
        return Err(Error::Config("at least one prior draw is required".into()));
    }
    let (mut count, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
    let mut stack = Vec::new();
    for _ in 0..n_draws {
        stack.push(0u32);
        while let Some(d) = stack.pop() {
            if d < MAX_PRIOR_DEPTH && rng.random::<f64>() < prior.split_prob(d) {
                stack.push(d + 1);
                stack.push(d + 1);
            } else {
                count += 1;
                sum += d as f64;
                sum_sq += (d as f64).powi(2);
            }
        }
    }
    let n = count as f64;
    let mean = sum / n;
    let var = if count > 1 {
        (sum_sq - n * mean * mean).max(0.0) / (n - 1.0)
    } else {
        0.0
    };
    Ok(DepthEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_leaves: count,
    })
}

/// Training responses summarized for calibration.
#[derive(Debug, Clone)]
pub struct CalibInputs {
    pub pmf: EmpiricalPmf,
    sorted: Vec<f64>,
    /// Sample median.
    pub m: f64,
    pub d_hat: f64,
    pub eps_kappa: f64,
    pub eps_t: f64,
    pub max_iter: usize,
    pub grid_increment: f64,
}

impl CalibInputs {
    pub fn new(y: &[i64], d_hat: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Validation("no responses to calibrate on".into()));
        }
        if !(d_hat >= 0.0 && d_hat.is_finite()) {
            return Err(Error::Domain(format!(
                "depth estimate {d_hat} must be finite and ≥ 0"
            )));
        }
        let mut sorted: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let m = median(&sorted)?;
        Ok(Self {
            pmf: EmpiricalPmf::from_samples(y.iter().copied()),
            sorted,
            m,
            d_hat,
            eps_kappa: 0.5,
            eps_t: 1e-9,
            max_iter: 50,
            grid_increment: DEFAULT_GRID_INCREMENT,
        })
    }

    /// Sample `(1−t)`-quantile.
    pub fn upper_quantile(&self, t: f64) -> Result<f64> {
        quantile(&self.sorted, 1.0 - t)
    }

    /// Integer tent location used for theoretical pmfs: `m` rounded half up.
    pub fn location(&self) -> i64 {
        (self.m + 0.5).floor() as i64
    }

    /// Candidate tail masses `0, inc, 2·inc, …` up to [`MAX_T`].
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        t_grid(self.grid_increment)
    }
}

pub fn t_grid(increment: f64) -> Result<Vec<f64>> {
    if !(increment > 0.0 && increment.is_finite()) {
        return Err(Error::Config(format!(
            "grid increment {increment} must be positive"
        )));
    }
    let n = (MAX_T / increment + 1e-9).floor() as usize;
    Ok((0..=n).map(|j| j as f64 * increment).collect())
}

/// Which rule produced the `κ` candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBranch {
    /// `ŷ₁₋ₜ − m ≤ 1`: a fair coin on `{0, 1}`.
    Bernoulli,
    /// Some `κ` satisfies the bracketing inequality.
    Bracket,
    /// No `κ` does; the nearest exponent below and above are both candidates.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa: u64,
    pub branch: KappaBranch,
    /// Set `κ` was drawn from, ascending.
    pub candidates: Vec<u64>,
    /// `ŷ₁₋ₜ − m`.
    pub gap: f64,
}

/// `⌊κ / 2^d̂⌋`.
pub fn kappa_exponent(kappa: u64, d_hat: f64) -> i64 {
    (kappa as f64 / d_hat.exp2()).floor() as i64
}

/// Scan bound for the boundary branch: `2^(d̂+1)·(⌈ln max(gap, 1)⌉ + 2)`.
pub fn kappa_scan_max(gap: f64, d_hat: f64) -> u64 {
    ((d_hat + 1.0).exp2() * (gap.max(1.0).ln().ceil() + 2.0)).ceil() as u64
}

/// Candidate set for `κ` given the quantile gap; see [`KappaBranch`].
pub fn kappa_candidates(gap: f64, d_hat: f64) -> (KappaBranch, Vec<u64>) {
    if gap <= 1.0 {
        return (KappaBranch::Bernoulli, vec![0, 1]);
    }
    let scan: Vec<(u64, i64)> = (0..=kappa_scan_max(gap, d_hat))
        .map(|x| (x, kappa_exponent(x, d_hat)))
        .collect();
    let e = |j: i64| (j as f64).exp();
    let bracket: Vec<u64> = scan
        .iter()
        .filter(|(_, j)| gap <= e(*j) && e(*j) < gap + 1.0)
        .map(|(x, _)| *x)
        .collect();
    if !bracket.is_empty() {
        return (KappaBranch::Bracket, bracket);
    }
    // Exponent 0 gives e⁰ = 1 < gap + 1, so the lower set is never empty;
    // the scan bound guarantees the upper one is not either.
    let j_lo = scan
        .iter()
        .map(|(_, j)| *j)
        .filter(|j| e(*j) < gap + 1.0)
        .max()
        .expect("j = 0 qualifies");
    let j_hi = scan
        .iter()
        .map(|(_, j)| *j)
        .filter(|j| e(*j) >= gap + 1.0)
        .min()
        .expect("scan bound");
    let set = scan
        .iter()
        .filter(|(_, j)| *j == j_lo || *j == j_hi)
        .map(|(x, _)| *x)
        .collect();
    (KappaBranch::Boundary, set)
}

/// Draws `κ̂` uniformly from the candidate set for tail mass `t`.
pub fn estimate_kappa<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: &CalibInputs,
    t: f64,
) -> Result<KappaEstimate> {
    if !(0.0..0.5).contains(&t) {
        return Err(Error::Domain(format!("tail mass {t} outside [0, 0.5)")));
    }
    let gap = inputs.upper_quantile(t)? - inputs.m;
    let (branch, candidates) = kappa_candidates(gap, inputs.d_hat);
    let kappa = *candidates.choose(rng).expect("candidate sets are nonempty");
    Ok(KappaEstimate {
        kappa,
        branch,
        candidates,
        gap,
    })
}

/// Exact Hellinger distance between an empirical pmf and a tent: the tent
/// mass off the empirical support enters as a single remainder.
pub fn hellinger_to_tent(pmf: &EmpiricalPmf, tent: &TentParams) -> f64 {
    let n = pmf.total() as f64;
    let (mut sq, mut covered) = (0.0, 0.0);
    for (x, c) in pmf.iter() {
        let q = tent.pmf(x);
        covered += q;
        sq += ((c as f64 / n).sqrt() - q.sqrt()).powi(2);
    }
    (0.5 * (sq + (1.0 - covered).max(0.0)))
        .sqrt()
        .clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TEstimate {
    pub t: f64,
    pub hellinger: f64,
    /// `⌊κ̂ / 2^d̂⌋`.
    pub k_hat: i64,
    /// `(t, distance)` over the full grid.
    pub profile: Vec<(f64, f64)>,
}

/// Grid value of `t` whose tent `P_t(m, ⌊e^k̂⌋)` is closest in Hellinger
/// distance to the data; ties go to the smaller `t`.
pub fn estimate_t(inputs: &CalibInputs, kappa: u64) -> Result<TEstimate> {
    let k_hat = kappa_exponent(kappa, inputs.d_hat);
    let mut est = estimate_t_for_scale(inputs, effective_scale(k_hat))?;
    est.k_hat = k_hat;
    Ok(est)
}

/// [`estimate_t`] for a given effective scale; `k_hat` is left at the
/// smallest raw scale with that effective scale.
pub fn estimate_t_for_scale(inputs: &CalibInputs, k_eff: u64) -> Result<TEstimate> {
    let grid = inputs.t_grid()?;
    let k_hat = if k_eff == 0 {
        -1
    } else {
        (k_eff as f64).ln().ceil() as i64
    };
    let lambda = inputs.location();
    let mut profile = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for t in grid {
        let h = hellinger_to_tent(&inputs.pmf, &TentParams::new(lambda, k_eff, t)?);
        profile.push((t, h));
        if best.is_none_or(|(_, bh)| h < bh) {
            best = Some((t, h));
        }
    }
    let (t, hellinger) = best.ok_or_else(|| Error::Config("empty t grid".into()))?;
    Ok(TEstimate {
        t,
        hellinger,
        k_hat,
        profile,
    })
}

/// Maximum-likelihood `(t, k)` of a tent at the rounded median, by grid
/// search over the `t` grid and `k = 0..` until `⌊e^k⌋` spans the data.
pub fn mle_init(inputs: &CalibInputs) -> Result<(f64, i64)> {
    let lambda = inputs.location();
    let spread = inputs
        .pmf
        .iter()
        .map(|(x, _)| (x - lambda).unsigned_abs())
        .max()
        .unwrap_or(0);
    let k_max = ((spread.max(1) as f64).ln().ceil() as i64 + 1).max(1);
    let mut best = (f64::NEG_INFINITY, 0.0, 0);
    for t in inputs.t_grid()? {
        for k in 0..=k_max {
            let tent = TentParams::new(lambda, effective_scale(k), t)?;
            let ll: f64 = inputs
                .pmf
                .iter()
                .map(|(x, c)| c as f64 * tent.log_pmf(x))
                .sum();
            if ll > best.0 {
                best = (ll, t, k);
            }
        }
    }
    Ok((best.1, best.2))
}

/// Smallest `κ` with `⌊κ / 2^d̂⌋ = k`.
pub fn kappa_from_k(k: i64, d_hat: f64) -> u64 {
    let s = d_hat.exp2();
    let mut kappa = (k.max(0) as f64 * s).ceil() as u64;
    while kappa > 0 && kappa_exponent(kappa - 1, d_hat) >= k {
        kappa -= 1;
    }
    while kappa_exponent(kappa, d_hat) < k {
        kappa += 1;
    }
    kappa
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub kappa: u64,
    pub t: f64,
    pub d_hat: f64,
    pub m: f64,
    pub iterations: usize,
    pub converged: bool,
    pub init_t: f64,
    pub init_k: i64,
    /// Last `κ` step, including its candidate set.
    pub last_kappa: KappaEstimate,
    pub last_t: TEstimate,
    /// `(t, κ)` after each iteration.
    pub history: Vec<(f64, u64)>,
}

/// Alternates [`estimate_t`] and [`estimate_kappa`] from the MLE start until
/// both changes fall below their tolerances or `max_iter` is reached.
pub fn estimate_kappa_t<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: &CalibInputs,
) -> Result<CalibrationResult> {
    if inputs.max_iter == 0 {
        return Err(Error::Config(
            "at least one calibration iteration is required".into(),
        ));
    }
    let (init_t, init_k) = mle_init(inputs)?;
    let (mut t_prev, mut kappa_prev) = (init_t, kappa_from_k(init_k, inputs.d_hat));
    let mut history = Vec::new();
    for i in 1..=inputs.max_iter {
        let te = estimate_t(inputs, kappa_prev)?;
        let ke = estimate_kappa(rng, inputs, te.t)?;
        history.push((te.t, ke.kappa));
        let converged = (te.t - t_prev).abs() < inputs.eps_t
            && (ke.kappa as f64 - kappa_prev as f64).abs() < inputs.eps_kappa;
        if converged || i == inputs.max_iter {
            return Ok(CalibrationResult {
                kappa: ke.kappa,
                t: te.t,
                d_hat: inputs.d_hat,
                m: inputs.m,
                iterations: i,
                converged,
                init_t,
                init_k,
                last_kappa: ke,
                last_t: te,
                history,
            });
        }
        t_prev = te.t;
        kappa_prev = ke.kappa;
    }
    unreachable!("loop returns at the final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inputs_with_gap(gap: f64, d_hat: f64) -> CalibInputs {
        // Median 0, top value `gap`; with t = 0 the upper quantile is the max.
        let mut y = vec![0i64; 5];
        y.push(gap as i64);
        let mut inp = CalibInputs::new(&y, d_hat).unwrap();
        inp.sorted.iter_mut().last().map(|v| *v = gap);
        inp
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&s).unwrap(), 2.5);
        assert_eq!(quantile(&s, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&s, 0.0).unwrap(), 1.0);
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn depth_of_a_stump_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prior = TreePrior::new(1e-12, 1.0).unwrap();
        assert_eq!(estimate_depth(&mut rng, &prior, 100).unwrap().mean, 0.0);
        let prior = TreePrior::new(0.95, 200.0).unwrap();
        let d = estimate_depth(&mut rng, &prior, 10_000).unwrap().mean;
        assert!((0.0..=1.0).contains(&d));
        assert!(estimate_depth(&mut rng, &prior, 0).is_err());
    }

    #[test]
    fn small_gap_flips_a_coin() {
        let (branch, cands) = kappa_candidates(0.5, 0.0);
        assert_eq!(branch, KappaBranch::Bernoulli);
        assert_eq!(cands, vec![0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inp = inputs_with_gap(0.5, 0.0);
        let ones = (0..4000)
            .filter(|_| estimate_kappa(&mut rng, &inp, 0.0).unwrap().kappa == 1)
            .count();
        assert!((ones as f64 / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn bracket_by_brute_force() {
        // m = 10, ŷ = 30, d̂ = 1: need e^⌊κ/2⌋ ∈ [20, 21).
        let (branch, cands) = kappa_candidates(20.0, 1.0);
        assert_eq!(branch, KappaBranch::Bracket);
        let brute: Vec<u64> = (0..=40u64)
            .filter(|&x| {
                let e = ((x / 2) as f64).exp();
                (20.0..21.0).contains(&e)
            })
            .collect();
        assert_eq!(cands, brute);
        assert_eq!(cands, vec![6, 7]);
    }

    #[test]
    fn exact_exponential_gap() {
        let (branch, cands) = kappa_candidates(5f64.exp(), 0.0);
        assert_eq!(branch, KappaBranch::Bracket);
        assert_eq!(cands, vec![5]);
    }

    #[test]
    fn boundary_when_no_bracket() {
        // [8, 9) holds no power of e: e² ≈ 7.39 below, e³ ≈ 20.1 above.
        let (branch, cands) = kappa_candidates(8.0, 0.0);
        assert_eq!(branch, KappaBranch::Boundary);
        assert_eq!(cands, vec![2, 3]);
        let (_, cands) = kappa_candidates(8.0, 1.0);
        assert_eq!(cands, vec![4, 5, 6, 7]);
    }

    #[test]
    fn t_from_exact_tent() {
        let tent = TentParams::new(10, effective_scale(2), 0.05).unwrap();
        // An "empirical" pmf proportional to the tent on a wide window.
        let mut pmf = EmpiricalPmf::new();
        for y in -200..=220 {
            pmf.add_count(y, (tent.pmf(y) * 1e12).round() as u64);
        }
        let mut inp = CalibInputs::new(&[10], 0.0).unwrap();
        inp.pmf = pmf;
        let est = estimate_t(&inp, 2).unwrap();
        assert!((est.t - 0.05).abs() < 1e-12, "{}", est.t);
        assert!(est.profile.iter().all(|(_, h)| *h >= est.hellinger));
    }

    #[test]
    fn point_mass_gives_zero_tail() {
        let inp = CalibInputs::new(&[4; 50], 0.0).unwrap();
        let est = estimate_t_for_scale(&inp, 0).unwrap();
        assert_eq!(est.t, 0.0);
        assert_eq!(est.hellinger, 0.0);
    }

    #[test]
    fn kappa_from_k_inverts_the_floor() {
        for &d in &[0.0, 0.7, 1.0, 2.3] {
            for k in 0..6 {
                let kappa = kappa_from_k(k, d);
                assert_eq!(kappa_exponent(kappa, d), k);
                assert!(kappa == 0 || kappa_exponent(kappa - 1, d) < k);
            }
        }
    }

    #[test]
    fn constant_data_calibrates_to_degenerate_tent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inp = CalibInputs::new(&[7; 100], 0.0).unwrap();
        let r = estimate_kappa_t(&mut rng, &inp).unwrap();
        assert!(r.kappa <= 1);
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn converged_start_stops_after_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // Gap 1 → κ ∈ {0,1}, both with k_eff ≤ 1; symmetric three-point data.
        let inp = CalibInputs::new(&[6, 7, 7, 7, 8], 0.0).unwrap();
        let (t0, k0) = mle_init(&inp).unwrap();
        let r = estimate_kappa_t(&mut rng, &inp).unwrap();
        if r.history[0] == (t0, kappa_from_k(k0, 0.0)) {
            assert_eq!(r.iterations, 1);
        }
        assert!(r.iterations <= inp.max_iter);
    }
}
