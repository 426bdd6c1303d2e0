//! Experiment configuration.
//!
//! A config file is TOML. Only `kind` is required; every other key falls back
//! to the defaults of that kind, so a file lists just what it changes:
//!
//! ```toml
//! kind = "tree"            # univariate | tree | zi_tree | calibrate
//! sampler = "tc"           # tc | mh
//! base_seed = 7
//! out_dir = "out/tree"
//!
//! [radii]                  # (m_λ, m_k) for tc, (r_λ, r_k) for mh
//! lambda = 4
//! k = 2
//!
//! [hyper]
//! kappa = 4
//! beta_k = 1.0
//! t_k = 0.025
//! alpha = 0.95
//! beta = 4.0
//! t = 0.025
//! zeta = 50
//! perturb_radius = 25      # c
//! # d1, d2 default to the response range; h1, h2 are used by zi_tree only
//!
//! [chains]
//! n_chains = 20
//! n_iters = 3000
//! burn_in = 500
//!
//! [data]
//! n = 1000
//! seed = 11
//! ```
//!
//! The `TAXICAB_SEED` environment variable, when set, replaces `base_seed`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{LocationPrior, MultimodalTarget, ScalePrior};
use crate::error::{Error, Result};
use crate::tree::{
    BetaPrior, CutpointGrid, Dataset, FitConfig, ModelConfig, MoveProbs, SamplerKind, TreePrior,
};

/// Environment variable overriding the base seed.
pub const SEED_ENV: &str = "TAXICAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Univariate,
    Tree,
    #[serde(alias = "zi-tree")]
    ZiTree,
    Calibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    #[default]
    Tc,
    Mh,
}

impl std::fmt::Display for SamplerChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Tc => "tc",
            Self::Mh => "mh",
        })
    }
}

/// Ball radii for TC, proposal radii for MH.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radii {
    pub lambda: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    pub kappa: u64,
    pub beta_k: f64,
    pub t_k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<i64>,
    pub h1: f64,
    pub h2: f64,
    /// Cutpoints per covariate.
    pub zeta: usize,
    /// Largest cut-index shift of a perturb proposal.
    pub perturb_radius: usize,
    pub moves: MoveProbs,
    /// Excluded `k` prior mass allowed by the MH marginalization window.
    pub k_window_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainPlan {
    pub n_chains: usize,
    pub n_iters: u64,
    pub burn_in: u64,
    /// Posterior-stream interval; 0 writes no stream.
    pub thin: u64,
    pub n_eval_draws: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub n: usize,
    /// Seed of the synthetic data generator.
    pub seed: u64,
}

/// The multimodal univariate benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnivariateSpec {
    pub w: f64,
    pub rate: f64,
    /// Starting states are uniform on `{0..start_max}`.
    pub start_max: i64,
    /// TC ball radius and MH proposal radius.
    pub radius: u32,
    /// Iterations at which distances are recorded; values above `n_iters`
    /// are dropped.
    pub checkpoints: Vec<u64>,
}

/// Scale-prior calibration on draws from a known tent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSpec {
    pub n_draws: usize,
    pub lambda: i64,
    /// Raw scale exponent; the tent uses `⌊e^k⌋`.
    pub k: i64,
    pub t: f64,
    /// Mean leaf depth; estimated from the tree prior when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_hat: Option<f64>,
    pub depth_draws: usize,
    pub grid_increment: f64,
    pub eps_kappa: f64,
    pub eps_t: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub sampler: SamplerChoice,
    pub radii: Radii,
    pub hyper: Hyperparameters,
    pub chains: ChainPlan,
    pub data: DataSpec,
    pub univariate: UnivariateSpec,
    pub calibrate: CalibrateSpec,
    pub out_dir: PathBuf,
    pub base_seed: u64,
}

impl ExperimentConfig {
    /// Defaults for a kind: the runtime-comparison settings for `tree`, the
    /// zero-inflated settings for `zi_tree`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            sampler: SamplerChoice::Tc,
            radii: Radii { lambda: 4, k: 2 },
            hyper: Hyperparameters {
                kappa: 4,
                beta_k: 1.0,
                t_k: 0.025,
                alpha: 0.95,
                beta: 4.0,
                t: 0.025,
                d1: None,
                d2: None,
                h1: 1.0,
                h2: 1.0,
                zeta: 50,
                perturb_radius: 25,
                moves: MoveProbs::default(),
                k_window_tol: 1e-6,
            },
            chains: ChainPlan {
                n_chains: 20,
                n_iters: 3000,
                burn_in: 500,
                thin: 10,
                n_eval_draws: 1000,
                workers: 1,
            },
            data: DataSpec { n: 1000, seed: 11 },
            univariate: UnivariateSpec {
                w: MultimodalTarget::default().w,
                rate: MultimodalTarget::default().rate,
                start_max: 20,
                radius: 1,
                checkpoints: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            },
            calibrate: CalibrateSpec {
                n_draws: 100_000,
                lambda: 10,
                k: 2,
                t: 0.025,
                d_hat: None,
                depth_draws: 10_000,
                grid_increment: crate::calibration::DEFAULT_GRID_INCREMENT,
                eps_kappa: 0.5,
                eps_t: 1e-9,
                max_iter: 50,
            },
            out_dir: PathBuf::from("out"),
            base_seed: 1,
        };
        match kind {
            ExperimentKind::ZiTree => {
                cfg.hyper.kappa = 2;
                cfg.hyper.beta_k = 0.0;
                cfg.hyper.beta = 2.0;
                cfg.chains.n_iters = 5000;
                cfg.chains.burn_in = 100;
            }
            ExperimentKind::Univariate => {
                cfg.chains.n_chains = 20;
                cfg.chains.n_iters = 100_000;
                cfg.chains.burn_in = 0;
                cfg.chains.thin = 0;
            }
            ExperimentKind::Calibrate => {
                cfg.calibrate.d_hat = Some(0.0);
            }
            ExperimentKind::Tree => {}
        }
        cfg
    }

    /// Parses TOML over the defaults of its `kind` and validates the result.
    pub fn from_toml(text: &str) -> Result<Self> {
        let user: toml::Table = toml::from_str(text)?;
        let kind = match user.get("kind") {
            Some(v) => v.clone().try_into::<ExperimentKind>()?,
            None => return Err(Error::Config("config needs a `kind`".into())),
        };
        let mut merged = toml::Table::try_from(Self::defaults(kind))
            .map_err(|e| Error::Config(format!("serializing defaults: {e}")))?;
        merge(&mut merged, user);
        let cfg: Self = toml::Value::Table(merged).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the seed override.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    /// Replaces `base_seed` from [`SEED_ENV`] when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.base_seed = v.trim().parse().map_err(|_| {
                Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            })?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        if self.radii.lambda == 0 || self.radii.k == 0 {
            return Err(Error::Config("radii must be at least 1".into()));
        }
        if self.data.n == 0 {
            return Err(Error::Config("data size n must be at least 1".into()));
        }
        if h.zeta == 0 {
            return Err(Error::Config("zeta must be at least 1".into()));
        }
        if let (Some(d1), Some(d2)) = (h.d1, h.d2) {
            LocationPrior::new(d1, d2)?;
        }
        ScalePrior::new(h.kappa, h.beta_k, h.t_k)?;
        TreePrior::new(h.alpha, h.beta)?;
        if !(0.0..0.5).contains(&h.t) {
            return Err(Error::Config(format!(
                "tail mass t={} outside [0, 0.5)",
                h.t
            )));
        }
        if !(h.h1 > 0.0 && h.h2 > 0.0) {
            return Err(Error::Config("beta prior needs h1, h2 > 0".into()));
        }
        self.fit_config().validate()?;
        let u = &self.univariate;
        MultimodalTarget::new(u.w, u.rate)?;
        if u.radius == 0 || u.start_max < 0 {
            return Err(Error::Config(
                "univariate radius must be positive and start_max nonnegative".into(),
            ));
        }
        let c = &self.calibrate;
        if c.n_draws == 0 || c.max_iter == 0 {
            return Err(Error::Config(
                "calibration needs draws and iterations".into(),
            ));
        }
        if !(0.0..0.5).contains(&c.t) || !(c.grid_increment > 0.0) {
            return Err(Error::Config(
                "calibration t or grid increment out of range".into(),
            ));
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            n_chains: self.chains.n_chains,
            n_iters: self.chains.n_iters,
            burn_in: self.chains.burn_in,
            thin: self.chains.thin,
            n_eval_draws: self.chains.n_eval_draws,
            base_seed: self.base_seed,
            workers: self.chains.workers,
            record_fitted: false,
        }
    }

    pub fn sampler_kind(&self) -> SamplerKind {
        let (l, k) = (self.radii.lambda, self.radii.k);
        match self.sampler {
            SamplerChoice::Tc => SamplerKind::Taxicab {
                m_lambda: l,
                m_k: k,
            },
            SamplerChoice::Mh => SamplerKind::NaiveMh {
                r_lambda: l,
                r_k: k,
            },
        }
    }

    /// Model settings for a dataset; `d1, d2` default to its response range.
    pub fn model_config(&self, data: &Dataset, zero_inflated: bool) -> Result<ModelConfig> {
        let h = &self.hyper;
        let location = match (h.d1, h.d2) {
            (Some(d1), Some(d2)) => LocationPrior::new(d1, d2)?,
            (d1, d2) => {
                let range = LocationPrior::from_data(data.y())?;
                LocationPrior::new(d1.unwrap_or(range.d1), d2.unwrap_or(range.d2))?
            }
        };
        let cfg = ModelConfig {
            t: h.t,
            location,
            scale: ScalePrior::new(h.kappa, h.beta_k, h.t_k)?,
            tree_prior: TreePrior::new(h.alpha, h.beta)?,
            moves: h.moves,
            perturb_radius: h.perturb_radius,
            zi: zero_inflated.then_some(BetaPrior { h1: h.h1, h2: h.h2 }),
            sampler: self.sampler_kind(),
            k_window_tol: h.k_window_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cutpoints(&self, data: &Dataset) -> Result<CutpointGrid> {
        CutpointGrid::from_data(data, self.hyper.zeta)
    }
}

/// Recursively overlays `user` onto `base`.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_kind_defaults() {
        let cfg = ExperimentConfig::from_toml("kind = \"zi_tree\"").unwrap();
        assert_eq!(
            (cfg.hyper.kappa, cfg.hyper.beta_k, cfg.hyper.beta),
            (2, 0.0, 2.0)
        );
        assert_eq!((cfg.chains.n_iters, cfg.chains.burn_in), (5000, 100));
        let tree = ExperimentConfig::from_toml("kind = \"tree\"").unwrap();
        assert_eq!(
            (tree.hyper.kappa, tree.hyper.zeta, tree.hyper.perturb_radius),
            (4, 50, 25)
        );
        assert_eq!(
            (
                tree.chains.n_chains,
                tree.chains.n_iters,
                tree.chains.burn_in
            ),
            (20, 3000, 500)
        );
    }

    #[test]
    fn nested_overrides_keep_sibling_defaults() {
        let cfg =
            ExperimentConfig::from_toml("kind = \"tree\"\nsampler = \"mh\"\n[radii]\nlambda = 6\n")
                .unwrap();
        assert_eq!(cfg.radii, Radii { lambda: 6, k: 2 });
        assert_eq!(
            cfg.sampler_kind(),
            SamplerKind::NaiveMh {
                r_lambda: 6,
                r_k: 2
            }
        );
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("sampler = \"tc\"").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"tree\"\n[data]\nn = 0\n").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"tree\"\n[hyper]\nt = 0.7\n").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"tree\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"forest\"").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::defaults(ExperimentKind::Calibrate);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
