use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::birth_death::{accept_birth, accept_death, propose_birth_tc, propose_death_tc, Abort};
use super::naive::mh_birth_death_marginalized;
use super::perturb::{perturb_cutpoint, PerturbOutcome};
use super::{
    mh_update_leaf_params, tc_update_leaf_params, zi_update_rho, zi_update_z, LeafParams, Model,
    SamplerKind, Tree, TreeMove,
};
use crate::error::Result;

/// Proposal and acceptance counts per tree move.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MoveCounts {
    pub proposed: u64,
    pub accepted: u64,
    /// Rejected before the MH coin flip (empty child, off-grid cut, zero
    /// reverse density).
    pub invalid: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChainDiagnostics {
    pub birth: MoveCounts,
    pub death: MoveCounts,
    pub perturb: MoveCounts,
    pub param_accepts: u64,
}

/// What happened in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    pub tree_move: TreeMove,
    pub accepted: bool,
}

/// One MCMC chain: tree, latent indicators, RNG and iteration counter.
#[derive(Debug, Clone)]
pub struct Chain<'m, 'd> {
    model: &'m Model<'d>,
    tree: Tree,
    z: Vec<bool>,
    rng: ChaCha8Rng,
    iteration: u64,
    diagnostics: ChainDiagnostics,
}

/// Lower median of the responses, clipped to the location support.
fn initial_lambda(model: &Model) -> i64 {
    let mut y = model.data.y().to_vec();
    y.sort_unstable();
    let med = y[(y.len() - 1) / 2];
    med.clamp(model.cfg.location.d1, model.cfg.location.d2)
}

impl<'m, 'd> Chain<'m, 'd> {
    /// A chain started from the single-node tree.
    pub fn new(model: &'m Model<'d>, seed: u64) -> Self {
        let mut params = LeafParams::new(initial_lambda(model), model.cfg.scale.location(0));
        if let Some(b) = model.cfg.zi {
            params.rho = b.h1 / (b.h1 + b.h2);
        }
        let n = model.data.n();
        Self {
            model,
            tree: Tree::new(params, (0..n).collect()),
            z: vec![false; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
            iteration: 0,
            diagnostics: ChainDiagnostics::default(),
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn diagnostics(&self) -> &ChainDiagnostics {
        &self.diagnostics
    }

    pub fn log_posterior(&self) -> f64 {
        self.model.log_posterior(&self.tree, &self.z)
    }

    /// One full sweep: indicators, tree move, leaf parameters, ρ.
    pub fn step(&mut self) -> Result<StepInfo> {
        let model = self.model;
        if model.is_zi() {
            zi_update_z(
                &mut self.rng,
                &mut self.tree,
                &mut self.z,
                model.data,
                model.cfg.t,
            );
        }
        let info = self.tree_move();
        match model.cfg.sampler {
            SamplerKind::Taxicab { m_lambda, m_k } => tc_update_leaf_params(
                &mut self.rng,
                model,
                &mut self.tree,
                &self.z,
                (m_lambda, m_k),
            )?,
            SamplerKind::NaiveMh { r_lambda, r_k } => {
                self.diagnostics.param_accepts += mh_update_leaf_params(
                    &mut self.rng,
                    model,
                    &mut self.tree,
                    &self.z,
                    (r_lambda, r_k),
                ) as u64;
            }
        }
        if let Some(prior) = model.cfg.zi {
            zi_update_rho(&mut self.rng, &mut self.tree, &self.z, prior);
        }
        self.iteration += 1;
        Ok(info)
    }

    fn choose_move(&mut self) -> TreeMove {
        let [pb, pd, _] = self.model.cfg.moves.for_tree(self.tree.n_internal());
        let u: f64 = self.rng.random();
        if u < pb {
            TreeMove::Birth
        } else if u < pb + pd {
            TreeMove::Death
        } else {
            TreeMove::Perturb
        }
    }

    fn tree_move(&mut self) -> StepInfo {
        let model = self.model;
        let kind = self.choose_move();
        let outcome: std::result::Result<bool, Abort> = match (kind, model.cfg.sampler) {
            (TreeMove::Perturb, _) => {
                match perturb_cutpoint(
                    &mut self.rng,
                    model,
                    &mut self.tree,
                    &self.z,
                    model.cfg.perturb_radius,
                ) {
                    PerturbOutcome::Accepted => Ok(true),
                    PerturbOutcome::Rejected => Ok(false),
                    PerturbOutcome::Invalid => Err(Abort::Ineligible),
                }
            }
            (TreeMove::Birth, SamplerKind::Taxicab { m_lambda, m_k }) => {
                propose_birth_tc(&mut self.rng, model, &self.tree, &self.z, (m_lambda, m_k))
                    .map(|p| accept_birth(&mut self.rng, p, &mut self.tree))
            }
            (TreeMove::Death, SamplerKind::Taxicab { m_lambda, m_k }) => {
                propose_death_tc(&mut self.rng, model, &self.tree, &self.z, (m_lambda, m_k))
                    .map(|p| accept_death(&mut self.rng, p, &mut self.tree))
            }
            (_, SamplerKind::NaiveMh { .. }) => {
                mh_birth_death_marginalized(&mut self.rng, model, &mut self.tree, &self.z, kind)
            }
        };
        let counts = match kind {
            TreeMove::Birth => &mut self.diagnostics.birth,
            TreeMove::Death => &mut self.diagnostics.death,
            TreeMove::Perturb => &mut self.diagnostics.perturb,
        };
        counts.proposed += 1;
        let accepted = match outcome {
            Ok(a) => a,
            Err(_) => {
                counts.invalid += 1;
                false
            }
        };
        counts.accepted += accepted as u64;
        StepInfo {
            tree_move: kind,
            accepted,
        }
    }
}
