//! Birth and death moves with leaf parameters integrated out numerically, as
//! used by the naive Metropolis-Hastings baseline.

use rand::Rng;

use super::birth_death::{log_grow_select, log_prune_select, mh_accept, nog_after_split, Abort};
use super::{Leaf, LeafParams, LeafStats, MassMemo, MemoData, Model, SplitRule, Tree, TreeMove};
use crate::logspace::{log_sum_exp, sample_log_weights};

/// Joint leaf masses over `{d1..d2} × window` and their log-sum.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    d1: i64,
    k_lo: i64,
    width_k: usize,
    weights: Vec<f64>,
    pub log_marginal: f64,
}

impl MarginalTable {
    pub fn new(model: &Model, memo: &MemoData) -> Self {
        let loc = model.cfg.location;
        let (k_lo, k_hi) = model.k_window(memo.depth());
        let width_k = (k_hi - k_lo + 1) as usize;
        let mut weights = Vec::with_capacity(loc.size() * width_k);
        for lambda in loc.d1..=loc.d2 {
            for k in k_lo..=k_hi {
                weights.push(memo.mass(model, lambda, k));
            }
        }
        let log_marginal = log_sum_exp(&weights);
        Self {
            d1: loc.d1,
            k_lo,
            width_k,
            weights,
            log_marginal,
        }
    }

    /// Exact draw of `(λ, k)` from the leaf's windowed joint conditional.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(i64, i64)> {
        let idx = sample_log_weights(rng, &self.weights)?;
        Some((
            self.d1 + (idx / self.width_k) as i64,
            self.k_lo + (idx % self.width_k) as i64,
        ))
    }
}

/// `ln Σ_λ Σ_k L(λ, k) π(λ) π(k | λ)` over the location support and
/// the depth's `k` window.
pub fn leaf_log_marginal(model: &Model, stats: &LeafStats, depth: u32) -> f64 {
    MarginalTable::new(model, &MemoData::new(model, stats.clone(), depth)).log_marginal
}

/// A birth (`TreeMove::Birth`) or death (`TreeMove::Death`) move accepted on
/// marginal likelihoods; changed leaves get fresh draws from their
/// conditionals. Returns whether the move was accepted.
pub fn mh_birth_death_marginalized<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
    kind: TreeMove,
) -> Result<bool, Abort> {
    match kind {
        TreeMove::Birth => birth(rng, model, tree, z),
        TreeMove::Death => death(rng, model, tree, z),
        TreeMove::Perturb => Err(Abort::Ineligible),
    }
}

fn birth<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
) -> Result<bool, Abort> {
    let leaves = tree.leaves();
    let leaf = leaves[rng.random_range(0..leaves.len())];
    let var = rng.random_range(0..model.cuts.p());
    let rule = SplitRule {
        var,
        cut: rng.random_range(0..model.cuts.zeta(var)),
    };
    let current = tree.leaf(leaf).expect("leaf");
    let (obs_l, obs_r) = rule.partition(current.obs(), model.data, model.cuts);
    if obs_l.is_empty() || obs_r.is_empty() {
        return Err(Abort::EmptyChild);
    }
    let depth = tree.depth(leaf);
    let data_b = model.leaf_memo(current, z, depth);
    let memo_l = MassMemo::from_data(MemoData::new(model, model.stats(&obs_l, z), depth + 1));
    let memo_r = MassMemo::from_data(MemoData::new(model, model.stats(&obs_r, z), depth + 1));
    let data_l = memo_l.get(model, &obs_l, z, depth + 1);
    let data_r = memo_r.get(model, &obs_r, z, depth + 1);
    let table_b = MarginalTable::new(model, data_b);
    let table_l = MarginalTable::new(model, data_l);
    let table_r = MarginalTable::new(model, data_r);
    let n_internal = tree.n_internal();
    let log_ratio = model.cfg.tree_prior.log_birth_ratio(depth, var, model.cuts)
        + table_l.log_marginal
        + table_r.log_marginal
        + data_l.extra()
        + data_r.extra()
        - table_b.log_marginal
        - data_b.extra()
        + log_prune_select(model, n_internal + 1, nog_after_split(tree, leaf))
        - log_grow_select(model, n_internal, leaves.len(), var);
    if !mh_accept(rng, log_ratio) {
        return Ok(false);
    }
    let (ll, kl) = table_l.draw(rng).ok_or(Abort::EmptySlice)?;
    let (lr, kr) = table_r.draw(rng).ok_or(Abort::EmptySlice)?;
    let rho = current.params.rho;
    tree.split(
        leaf,
        rule,
        Leaf::with_memo(
            LeafParams {
                lambda: ll,
                k: kl,
                rho,
            },
            obs_l,
            memo_l,
        ),
        Leaf::with_memo(
            LeafParams {
                lambda: lr,
                k: kr,
                rho,
            },
            obs_r,
            memo_r,
        ),
    );
    Ok(true)
}

fn death<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
) -> Result<bool, Abort> {
    let nogs = tree.nog_nodes();
    if nogs.is_empty() {
        return Err(Abort::Ineligible);
    }
    let node = nogs[rng.random_range(0..nogs.len())];
    let rule = tree.rule(node).expect("internal");
    let (l, r) = tree.children(node).expect("internal");
    let (left, right) = (tree.leaf(l).expect("leaf"), tree.leaf(r).expect("leaf"));
    let mut obs: Vec<usize> = left.obs().iter().chain(right.obs()).copied().collect();
    obs.sort_unstable();
    let depth = tree.depth(node);
    let memo = MassMemo::from_data(MemoData::new(model, model.stats(&obs, z), depth));
    let data_b = memo.get(model, &obs, z, depth);
    let data_l = model.leaf_memo(left, z, depth + 1);
    let data_r = model.leaf_memo(right, z, depth + 1);
    let table_b = MarginalTable::new(model, data_b);
    let ml_l = MarginalTable::new(model, data_l).log_marginal;
    let ml_r = MarginalTable::new(model, data_r).log_marginal;
    let n_internal = tree.n_internal();
    let log_ratio = -model
        .cfg
        .tree_prior
        .log_birth_ratio(depth, rule.var, model.cuts)
        + table_b.log_marginal
        + data_b.extra()
        - ml_l
        - ml_r
        - data_l.extra()
        - data_r.extra()
        + log_grow_select(model, n_internal - 1, tree.n_leaves() - 1, rule.var)
        - log_prune_select(model, n_internal, nogs.len());
    if !mh_accept(rng, log_ratio) {
        return Ok(false);
    }
    let (lambda, k) = table_b.draw(rng).ok_or(Abort::EmptySlice)?;
    let rho = left.params.rho;
    tree.collapse(
        node,
        Leaf::with_memo(LeafParams { lambda, k, rho }, obs, memo),
    );
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{LocationPrior, ScalePrior, TentParams};
    use crate::tree::{CutpointGrid, Dataset, ModelConfig, MoveProbs, SamplerKind, TreePrior};

    #[test]
    fn two_term_marginal_by_hand() {
        let data = Dataset::new(vec![vec![0.0, 1.0]], vec![1, 1]).unwrap();
        let cuts = CutpointGrid::from_data(&data, 1).unwrap();
        let cfg = ModelConfig {
            t: 0.025,
            location: LocationPrior::new(0, 1).unwrap(),
            // t_k = 0 with location 0 and scale 0 puts all k mass on 0.
            scale: ScalePrior::new(0, 1.0, 0.0).unwrap(),
            tree_prior: TreePrior::new(0.5, 1.0).unwrap(),
            moves: MoveProbs::default(),
            perturb_radius: 1,
            zi: None,
            sampler: SamplerKind::NaiveMh {
                r_lambda: 1,
                r_k: 1,
            },
            k_window_tol: 1e-6,
        };
        let model = Model::new(&data, &cuts, cfg).unwrap();
        assert_eq!(model.k_window(0), (0, 0));
        let stats = model.stats(&[0], &[]);
        // k = 0 gives k_eff = 1.
        let l0 = TentParams::new(0, 1, 0.025).unwrap().pmf(1);
        let l1 = TentParams::new(1, 1, 0.025).unwrap().pmf(1);
        let expected = (0.5 * (l0 + l1)).ln();
        assert!((leaf_log_marginal(&model, &stats, 0) - expected).abs() < 1e-14);
        let empty = model.stats(&[], &[]);
        assert!(leaf_log_marginal(&model, &empty, 0).abs() < 1e-14);
    }
}
