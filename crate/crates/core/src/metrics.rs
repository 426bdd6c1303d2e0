//! Distances between integer pmfs and in-sample fit metrics.
//!
//! Distances are computed over the union of both supports. A truth pmf built
//! by [`Pmf::truncated`] carries a single overflow state above its last
//! listed state; states of the other pmf beyond that point are folded into it,
//! so both sides stay normalized.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σp − 1|` accepted by the distances.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Truth states at or below this mass are not listed individually.
pub const MIN_LISTED_MASS: f64 = 1e-15;
/// Truncation point of an infinite truth: remaining tail mass below this.
pub const TAIL_TOL: f64 = 1e-12;

/// Visit counts of an integer-valued chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalPmf {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl EmpiricalPmf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples<I: IntoIterator<Item = i64>>(samples: I) -> Self {
        let mut e = Self::new();
        for x in samples {
            e.add(x);
        }
        e
    }

    pub fn add(&mut self, x: i64) {
        self.add_count(x, 1);
    }

    pub fn add_count(&mut self, x: i64, count: u64) {
        if count > 0 {
            *self.counts.entry(x).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, x: i64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn freq(&self, x: i64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(x) as f64 / self.total as f64
        }
    }

    pub fn max_state(&self) -> Option<i64> {
        self.counts.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    /// Relative frequencies; an empty record has no pmf.
    pub fn to_pmf(&self) -> Result<Pmf> {
        if self.total == 0 {
            return Err(Error::Validation("empirical pmf from zero samples".into()));
        }
        let n = self.total as f64;
        Ok(Pmf {
            mass: self
                .counts
                .iter()
                .map(|(&x, &c)| (x, c as f64 / n))
                .collect(),
            overflow: None,
        })
    }
}

/// A pmf with finite listed support and, optionally, an overflow state that
/// absorbs all mass strictly above `above`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    mass: BTreeMap<i64, f64>,
    overflow: Option<Overflow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overflow {
    pub above: i64,
    pub mass: f64,
}

impl Pmf {
    pub fn from_pairs<I: IntoIterator<Item = (i64, f64)>>(pairs: I) -> Self {
        let mut mass = BTreeMap::new();
        for (x, p) in pairs {
            if p > 0.0 {
                *mass.entry(x).or_insert(0.0) += p;
            }
        }
        Self {
            mass,
            overflow: None,
        }
    }

    /// Dense pmf on `{offset, offset+1, …}`.
    pub fn from_dense(offset: i64, probs: &[f64]) -> Self {
        Self::from_pairs(
            probs
                .iter()
                .enumerate()
                .map(|(i, &p)| (offset + i as i64, p)),
        )
    }

    /// Truth on `{lo, lo+1, …}` from a normalized log pmf, cut where the
    /// remaining tail is below [`TAIL_TOL`]. Everything not listed goes to
    /// the overflow state.
    pub fn truncated<F: Fn(i64) -> f64>(lo: i64, log_pmf: F) -> Result<Self> {
        const MAX_STATES: i64 = 10_000_000;
        let mut mass = BTreeMap::new();
        let mut cum = 0.0;
        let mut listed = 0.0;
        let mut x = lo;
        while 1.0 - cum >= TAIL_TOL {
            if x - lo > MAX_STATES {
                return Err(Error::Validation("truth tail did not vanish".into()));
            }
            let p = log_pmf(x).exp();
            cum += p;
            if p > MIN_LISTED_MASS {
                mass.insert(x, p);
                listed += p;
            }
            x += 1;
        }
        let overflow = Overflow {
            above: x - 1,
            mass: (1.0 - listed).max(0.0),
        };
        Ok(Self {
            mass,
            overflow: Some(overflow),
        })
    }

    pub fn prob(&self, x: i64) -> f64 {
        match self.overflow {
            Some(o) if x > o.above => 0.0,
            _ => self.mass.get(&x).copied().unwrap_or(0.0),
        }
    }

    pub fn overflow(&self) -> Option<Overflow> {
        self.overflow
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum::<f64>() + self.overflow.map_or(0.0, |o| o.mass)
    }

    pub fn states(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.mass.iter().map(|(&x, &p)| (x, p))
    }

    fn check(&self) -> Result<()> {
        let s = self.total();
        if (s - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!("pmf sums to {s}, not 1")));
        }
        Ok(())
    }

    /// Renormalized restriction to one parity class (overflow excluded).
    pub fn conditional(&self, parity: Parity) -> Result<Self> {
        let kept: BTreeMap<i64, f64> = self
            .mass
            .iter()
            .filter(|(x, _)| parity.matches(**x))
            .map(|(&x, &p)| (x, p))
            .collect();
        let z: f64 = kept.values().sum();
        if z <= 0.0 {
            return Err(Error::UndefinedDistance(format!(
                "no mass on {parity:?} states"
            )));
        }
        Ok(Self {
            mass: kept.into_iter().map(|(x, p)| (x, p / z)).collect(),
            overflow: None,
        })
    }
}

/// Paired probabilities on the common support, overflow included as one
/// extra pair.
fn paired(p: &Pmf, q: &Pmf) -> Vec<(f64, f64)> {
    let cut = match (p.overflow, q.overflow) {
        (Some(a), Some(b)) => Some(a.above.min(b.above)),
        (a, b) => a.or(b).map(|o| o.above),
    };
    let mut states: BTreeSet<i64> = p.mass.keys().copied().collect();
    states.extend(q.mass.keys().copied());
    let mut out = Vec::with_capacity(states.len() + 1);
    let (mut op, mut oq) = (
        p.overflow.map_or(0.0, |o| o.mass),
        q.overflow.map_or(0.0, |o| o.mass),
    );
    for x in states {
        let (a, b) = (
            p.mass.get(&x).copied().unwrap_or(0.0),
            q.mass.get(&x).copied().unwrap_or(0.0),
        );
        match cut {
            Some(c) if x > c => {
                op += a;
                oq += b;
            }
            _ => out.push((a, b)),
        }
    }
    if cut.is_some() {
        out.push((op, oq));
    }
    out
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.check()?;
    q.check()?;
    let d: f64 = paired(p, q).iter().map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}

/// `sqrt(½ Σ (√p − √q)²)`.
pub fn hellinger_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.check()?;
    q.check()?;
    let d: f64 = paired(p, q)
        .iter()
        .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    Ok((0.5 * d).sqrt().clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn matches(self, x: i64) -> bool {
        (x.rem_euclid(2) == 0) == (self == Parity::Even)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    TotalVariation,
    Hellinger,
}

pub fn distance(p: &Pmf, q: &Pmf, kind: Distance) -> Result<f64> {
    match kind {
        Distance::TotalVariation => tv_distance(p, q),
        Distance::Hellinger => hellinger_distance(p, q),
    }
}

/// Distance between both pmfs after conditioning on a parity class.
pub fn conditional_distance(p: &Pmf, q: &Pmf, parity: Parity, kind: Distance) -> Result<f64> {
    p.check()?;
    q.check()?;
    distance(&p.conditional(parity)?, &q.conditional(parity)?, kind)
}

fn check_draws(draws: &[Vec<f64>], n: usize) -> Result<()> {
    if draws.is_empty() {
        return Err(Error::Validation(
            "at least one posterior draw is required".into(),
        ));
    }
    if let Some(d) = draws.iter().find(|d| d.len() != n) {
        return Err(Error::Validation(format!(
            "draw of length {} against {n} observations",
            d.len()
        )));
    }
    Ok(())
}

/// Mean over draws `s` and observations `i` of `|ĝ⁽ˢ⁾(xᵢ) − yᵢ|`.
pub fn mae(draws: &[Vec<f64>], y: &[f64]) -> Result<f64> {
    check_draws(draws, y.len())?;
    if y.is_empty() {
        return Err(Error::Validation("no observations".into()));
    }
    let total: f64 = draws
        .iter()
        .map(|g| g.iter().zip(y).map(|(g, y)| (g - y).abs()).sum::<f64>() / y.len() as f64)
        .sum();
    Ok(total / draws.len() as f64)
}

/// How draws are reduced before taking the L2 norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Mode {
    /// Mean over draws of `‖ĝ⁽ˢ⁾ − g‖₂`.
    #[default]
    DrawAverage,
    /// `‖mean_s ĝ⁽ˢ⁾ − g‖₂`.
    PosteriorMean,
}

pub fn l2_norm(draws: &[Vec<f64>], g_true: &[f64], mode: L2Mode) -> Result<f64> {
    check_draws(draws, g_true.len())?;
    let norm = |g: &[f64]| {
        g.iter()
            .zip(g_true)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    Ok(match mode {
        L2Mode::DrawAverage => draws.iter().map(|g| norm(g)).sum::<f64>() / draws.len() as f64,
        L2Mode::PosteriorMean => {
            let s = draws.len() as f64;
            let mean: Vec<f64> = (0..g_true.len())
                .map(|i| draws.iter().map(|g| g[i]).sum::<f64>() / s)
                .collect();
            norm(&mean)
        }
    })
}
