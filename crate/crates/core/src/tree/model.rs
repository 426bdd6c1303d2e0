use serde::{Deserialize, Serialize};

use super::{CutpointGrid, Dataset, Leaf, LeafStats, MemoData, MoveProbs, Tree, TreePrior};
use crate::distributions::{LocationPrior, ScalePrior};
use crate::error::{Error, Result};

/// Sampler used for leaf parameters and tree birth/death moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerKind {
    /// Taxicab slices of radii `(m_lambda, m_k)`; dimension-matched moves.
    Taxicab { m_lambda: u32, m_k: u32 },
    /// Random-walk proposals of radii `(r_lambda, r_k)`; birth/death with
    /// numerically marginalized leaf likelihoods.
    NaiveMh { r_lambda: u32, r_k: u32 },
}

/// `Beta(h1, h2)` prior on each leaf's structural-zero probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub h1: f64,
    pub h2: f64,
}

/// Everything that defines the posterior and the sampler, apart from data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Tail mass of the tent likelihood.
    pub t: f64,
    pub location: LocationPrior,
    pub scale: ScalePrior,
    pub tree_prior: TreePrior,
    pub moves: MoveProbs,
    /// Largest cut-index shift of a perturb proposal.
    pub perturb_radius: usize,
    /// Zero inflation when present.
    pub zi: Option<BetaPrior>,
    pub sampler: SamplerKind,
    /// Prior mass of `k` allowed outside the marginalization window of the
    /// naive sampler.
    pub k_window_tol: f64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.t) {
            return Err(Error::Config(format!(
                "tail mass t={} outside [0, 0.5)",
                self.t
            )));
        }
        LocationPrior::new(self.location.d1, self.location.d2)?;
        ScalePrior::new(self.scale.kappa, self.scale.beta_k, self.scale.t_k)?;
        TreePrior::new(self.tree_prior.alpha, self.tree_prior.beta)?;
        MoveProbs::new(self.moves.birth, self.moves.death, self.moves.perturb)?;
        if self.moves.perturb > 0.0 && self.perturb_radius == 0 {
            return Err(Error::Config(
                "perturb moves need a radius of at least 1".into(),
            ));
        }
        if let Some(b) = self.zi {
            if !(b.h1 > 0.0 && b.h2 > 0.0 && b.h1.is_finite() && b.h2.is_finite()) {
                return Err(Error::Config(
                    "zero-inflation prior needs h1, h2 > 0".into(),
                ));
            }
        }
        match self.sampler {
            SamplerKind::Taxicab { m_lambda, m_k } if m_lambda == 0 || m_k == 0 => {
                return Err(Error::Config("taxicab radii must be at least 1".into()))
            }
            SamplerKind::NaiveMh { r_lambda, r_k } if r_lambda == 0 || r_k == 0 => {
                return Err(Error::Config("MH proposal radii must be at least 1".into()))
            }
            _ => {}
        }
        if !(self.k_window_tol > 0.0 && self.k_window_tol < 1.0) {
            return Err(Error::Config(
                "k window tolerance must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Deepest level with a precomputed `k` window; deeper nodes reuse it.
const WINDOW_DEPTHS: usize = 64;

/// Data, cutpoints and configuration bound together for posterior evaluation.
#[derive(Debug, Clone)]
pub struct Model<'a> {
    pub data: &'a Dataset,
    pub cuts: &'a CutpointGrid,
    pub cfg: ModelConfig,
    windows: Vec<(i64, i64)>,
}

impl<'a> Model<'a> {
    pub fn new(data: &'a Dataset, cuts: &'a CutpointGrid, cfg: ModelConfig) -> Result<Self> {
        cfg.validate()?;
        if cuts.p() != data.p() {
            return Err(Error::Config(format!(
                "{} cutpoint grids for {} covariates",
                cuts.p(),
                data.p()
            )));
        }
        let windows = (0..=WINDOW_DEPTHS as u32)
            .map(|d| k_window(&cfg, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            data,
            cuts,
            cfg,
            windows,
        })
    }

    pub fn is_zi(&self) -> bool {
        self.cfg.zi.is_some()
    }

    pub fn stats(&self, obs: &[usize], z: &[bool]) -> LeafStats {
        let z = self.is_zi().then_some(z);
        LeafStats::from_obs(obs, self.data.y(), z)
    }

    pub fn log_lik(&self, stats: &LeafStats, lambda: i64, k: i64) -> f64 {
        stats.log_lik(lambda, k, self.cfg.t)
    }

    /// Leaf likelihood plus the location and scale priors.
    pub fn leaf_mass(&self, stats: &LeafStats, lambda: i64, k: i64, depth: u32) -> f64 {
        let lp = self.cfg.location.log_pmf(lambda);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        let sp = self.cfg.scale.log_pmf(k, lambda, depth);
        if sp == f64::NEG_INFINITY {
            return sp;
        }
        lp + sp + self.log_lik(stats, lambda, k)
    }

    /// Parameter-free leaf factor: the integrated zero-inflation term.
    pub fn leaf_extra(&self, stats: &LeafStats) -> f64 {
        match self.cfg.zi {
            Some(b) => super::zi_rho_log_factor(stats.n(), stats.n1(), b.h1, b.h2),
            None => 0.0,
        }
    }

    /// Memoized mass function of a leaf at the given depth.
    pub fn leaf_memo<'l>(&self, leaf: &'l Leaf, z: &[bool], depth: u32) -> &'l MemoData {
        leaf.memo().get(self, leaf.obs(), z, depth)
    }

    /// Inclusive `k` range used to marginalize the scale at a given depth.
    pub fn k_window(&self, depth: u32) -> (i64, i64) {
        self.windows[(depth as usize).min(WINDOW_DEPTHS)]
    }

    /// Log joint of tree, leaf parameters and data (zero-inflation
    /// probabilities integrated out), up to a constant.
    pub fn log_posterior(&self, tree: &Tree, z: &[bool]) -> f64 {
        let mut total = self.cfg.tree_prior.log_prior(tree, self.cuts);
        for id in tree.leaves() {
            let leaf = tree.leaf(id).expect("leaf");
            let stats = self.stats(leaf.obs(), z);
            total += self.leaf_mass(&stats, leaf.params.lambda, leaf.params.k, tree.depth(id))
                + self.leaf_extra(&stats);
        }
        total
    }
}

/// Smallest symmetric window around the scale-prior location whose excluded
/// prior mass is below the tolerance for every location in the support.
fn k_window(cfg: &ModelConfig, depth: u32) -> Result<(i64, i64)> {
    let loc = cfg.scale.location(depth);
    let mut scales: Vec<u64> = (cfg.location.d1..=cfg.location.d2)
        .map(|l| cfg.scale.scale(l, depth))
        .collect();
    scales.sort_unstable();
    scales.dedup();
    let tents: Vec<_> = scales
        .iter()
        .map(|&s| crate::distributions::TentParams::new(loc, s, cfg.scale.t_k))
        .collect::<Result<_>>()?;
    let mut inside = vec![0.0; tents.len()];
    for w in 0..100_000i64 {
        let mut worst: f64 = 0.0;
        for (tent, mass) in tents.iter().zip(inside.iter_mut()) {
            *mass += if w == 0 {
                tent.pmf(loc)
            } else {
                tent.pmf(loc - w) + tent.pmf(loc + w)
            };
            worst = worst.max(1.0 - *mass);
        }
        if worst < cfg.k_window_tol {
            return Ok((loc - w, loc + w));
        }
    }
    Err(Error::Config(
        "k marginalization window did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn config(sampler: SamplerKind) -> ModelConfig {
        ModelConfig {
            t: 0.025,
            location: LocationPrior::new(0, 47).unwrap(),
            scale: ScalePrior::new(4, 1.0, 0.025).unwrap(),
            tree_prior: TreePrior::new(0.95, 4.0).unwrap(),
            moves: MoveProbs::default(),
            perturb_radius: 25,
            zi: None,
            sampler,
            k_window_tol: 1e-6,
        }
    }

    #[test]
    fn window_excludes_little_prior_mass() {
        let cfg = config(SamplerKind::NaiveMh {
            r_lambda: 4,
            r_k: 2,
        });
        // Depth 0: location 4, scales up to ⌊ln 47⌋ = 3, p* capped at 0.99.
        assert_eq!(k_window(&cfg, 0).unwrap(), (-2, 10));
        let (lo, hi) = k_window(&cfg, 1).unwrap();
        assert_eq!((lo + hi) / 2, 2);
        for depth in 0..4 {
            let (lo, hi) = k_window(&cfg, depth).unwrap();
            for lambda in 0..=47 {
                let mass: f64 = (lo..=hi)
                    .map(|k| cfg.scale.log_pmf(k, lambda, depth).exp())
                    .sum();
                assert!(1.0 - mass < 1e-6);
            }
        }
    }

    #[test]
    fn validation_catches_bad_radii() {
        let mut cfg = config(SamplerKind::Taxicab {
            m_lambda: 0,
            m_k: 1,
        });
        assert!(cfg.validate().is_err());
        cfg.sampler = SamplerKind::Taxicab {
            m_lambda: 4,
            m_k: 2,
        };
        cfg.validate().unwrap();
        cfg.zi = Some(BetaPrior { h1: 0.0, h2: 1.0 });
        assert!(cfg.validate().is_err());
    }
}
