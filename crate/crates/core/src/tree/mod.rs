//! Single-tree Bayesian count regression with tent likelihood leaves, optional
//! zero inflation, and taxicab or naive Metropolis-Hastings samplers.
//!
//! Observations route left at an internal node when `x[var] < cut`. Each leaf
//! carries a location `λ`, a raw scale `k` (effective scale `⌊e^k⌋`) and,
//! under zero inflation, a structural-zero probability `ρ`.

mod birth_death;
mod chain;
mod cutpoints;
mod data;
mod dimension;
mod fit;
mod leaf;
mod memo;
mod model;
mod naive;
mod params;
mod perturb;
mod prior;
mod structure;
mod zi;

pub use birth_death::{
    accept_birth, accept_death, propose_birth_tc, propose_death_tc, Abort, BirthProposal,
    DeathProposal,
};
pub use chain::{Chain, ChainDiagnostics, MoveCounts, StepInfo};
pub use cutpoints::CutpointGrid;
pub use data::Dataset;
pub use dimension::{delta_inv, delta_map};
pub use fit::{fit, mean_sd, ChainResult, FitConfig, FitResult, PosteriorRecord, StructureCount};
pub use leaf::{leaf_log_lik, zi_rho_log_factor, zi_rho_marginal_leaf_lik, LeafStats};
pub use memo::{MassMemo, MemoData};
pub use model::{BetaPrior, Model, ModelConfig, SamplerKind};
pub use naive::{leaf_log_marginal, mh_birth_death_marginalized, MarginalTable};
pub use params::{mh_update_leaf_params, tc_update_leaf_params};
pub use perturb::{perturb_cutpoint, PerturbOutcome};
pub use prior::{MoveProbs, TreeMove, TreePrior};
pub use structure::{EncodedNode, Leaf, LeafParams, Node, NodeId, NodeKind, SplitRule, Tree};
pub use zi::{zero_posterior, zi_update_rho, zi_update_z};
