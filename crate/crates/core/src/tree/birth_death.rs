//! Dimension-matched birth and death moves for the taxicab sampler.
//!
//! A birth at leaf `b` draws offsets `a_λ ∈ {−2m_λ..2m_λ}` and
//! `a_k ∈ {−2m_k..2m_k}`, maps `(λ_b, a_λ)` and `(k_b, a_k)` through
//! [`delta_map`] to the two children's auxiliaries, and draws each child's
//! `(λ, k)` from its joint slice. A death maps the children back through
//! [`delta_inv`] and draws the merged leaf from the slice at the result.
//!
//! The acceptance ratio uses the birth proposal density summed over every
//! offset pair that could have produced the children, so the move pair is an
//! exact Metropolis-Hastings kernel on `(T, λ, k)`.

use std::cell::Cell;

use rand::Rng;

use super::{
    delta_inv, delta_map, Leaf, LeafParams, MassMemo, MemoData, Model, NodeId, SplitRule, Tree,
};
use crate::logspace::{log_sum_exp, sample_log_weights};

/// Why a dimension-changing proposal was rejected before the MH coin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abort {
    /// The rule would leave a child without observations.
    EmptyChild,
    /// Every candidate in a slice has zero posterior mass.
    EmptySlice,
    /// The reverse move cannot produce the current state.
    ZeroReverseDensity,
    /// No eligible node exists for this move.
    Ineligible,
}

/// Joint-slice masses of one child on the `(4m_λ+1) × (4m_k+1)` grid around
/// the parent's parameters. Masses come from the child's memo; box
/// normalizers are built on first use from cached `k`-window row sums, so only
/// boxes that can contain the child are ever evaluated.
#[derive(Debug)]
pub(crate) struct ChildGrid<'a, 'm> {
    model: &'a Model<'m>,
    memo: &'a MemoData,
    lambda0: i64,
    k0: i64,
    ml: i64,
    mk: i64,
    /// `ln Σ_{|k−r|≤m_k} mass(λ, k)` per grid row `λ` and box centre `r`.
    rows: Vec<Cell<f64>>,
    box_norm: Vec<Cell<f64>>,
}

impl<'a, 'm> ChildGrid<'a, 'm> {
    pub(crate) fn new(
        model: &'a Model<'m>,
        memo: &'a MemoData,
        params: (i64, i64),
        radii: (u32, u32),
    ) -> Self {
        let (ml, mk) = (radii.0 as i64, radii.1 as i64);
        let n = ((2 * ml + 1) * (2 * mk + 1)) as usize;
        Self {
            model,
            memo,
            lambda0: params.0,
            k0: params.1,
            ml,
            mk,
            rows: vec![Cell::new(f64::NAN); ((4 * ml + 1) * (2 * mk + 1)) as usize],
            box_norm: vec![Cell::new(f64::NAN); n],
        }
    }

    fn row(&self, lambda: i64, r: i64) -> f64 {
        let i = lambda - (self.lambda0 - 2 * self.ml);
        let j = r - (self.k0 - self.mk);
        let cell = &self.rows[(i * (2 * self.mk + 1) + j) as usize];
        if cell.get().is_nan() {
            let w: Vec<f64> = (r - self.mk..=r + self.mk)
                .map(|k| self.memo.mass(self.model, lambda, k))
                .collect();
            cell.set(log_sum_exp(&w));
        }
        cell.get()
    }

    fn norm_at(&self, u: i64, r: i64) -> f64 {
        let i = u - (self.lambda0 - self.ml);
        let j = r - (self.k0 - self.mk);
        debug_assert!((0..=2 * self.ml).contains(&i) && (0..=2 * self.mk).contains(&j));
        let cell = &self.box_norm[(i * (2 * self.mk + 1) + j) as usize];
        if cell.get().is_nan() {
            let rows: Vec<f64> = (u - self.ml..=u + self.ml)
                .map(|l| self.row(l, r))
                .collect();
            cell.set(log_sum_exp(&rows));
        }
        cell.get()
    }

    fn box_masses(&self, u: i64, r: i64) -> Vec<f64> {
        let mut w = Vec::with_capacity(((2 * self.ml + 1) * (2 * self.mk + 1)) as usize);
        for lambda in u - self.ml..=u + self.ml {
            for k in r - self.mk..=r + self.mk {
                w.push(self.memo.mass(self.model, lambda, k));
            }
        }
        w
    }

    /// `ln q(λ, k | U=u, R=r)`; `-inf` outside the box.
    fn log_q(&self, lambda: i64, k: i64, u: i64, r: i64) -> f64 {
        if (lambda - u).abs() > self.ml || (k - r).abs() > self.mk {
            return f64::NEG_INFINITY;
        }
        let norm = self.norm_at(u, r);
        if norm == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.memo.mass(self.model, lambda, k) - norm
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, u: i64, r: i64) -> Option<(i64, i64)> {
        let idx = sample_log_weights(rng, &self.box_masses(u, r))? as i64;
        let side = 2 * self.mk + 1;
        Some((u - self.ml + idx / side, r - self.mk + idx % side))
    }
}

/// Whether some offset `a ∈ {−2m..2m}` puts both children within `m` of the
/// auxiliaries `δ(θ, a)`.
fn reachable(theta: i64, children: (i64, i64), m: i64) -> bool {
    (-2 * m..=2 * m).any(|a| {
        let (ul, ur) = delta_map(theta, a);
        (children.0 - ul).abs() <= m && (children.1 - ur).abs() <= m
    })
}

/// Log density of a birth producing the given children from `parent`,
/// summed over all offset pairs.
pub(crate) fn log_birth_density(
    grids: (&ChildGrid, &ChildGrid),
    parent: (i64, i64),
    children: ((i64, i64), (i64, i64)),
    radii: (u32, u32),
) -> f64 {
    let (ml, mk) = (radii.0 as i64, radii.1 as i64);
    let log_pa = -((4 * ml + 1) as f64).ln() - ((4 * mk + 1) as f64).ln();
    let ((ll, kl), (lr, kr)) = children;
    let mut terms = Vec::with_capacity(((4 * ml + 1) * (4 * mk + 1)) as usize);
    for a_l in -2 * ml..=2 * ml {
        let (ul, ur) = delta_map(parent.0, a_l);
        for a_k in -2 * mk..=2 * mk {
            let (rl, rr) = delta_map(parent.1, a_k);
            let q_l = grids.0.log_q(ll, kl, ul, rl);
            if q_l == f64::NEG_INFINITY {
                continue;
            }
            let t = q_l + grids.1.log_q(lr, kr, ur, rr);
            if t > f64::NEG_INFINITY {
                terms.push(log_pa + t);
            }
        }
    }
    log_sum_exp(&terms)
}

/// Slice of the merged leaf around `(u, r)`: log weights in row-major order.
fn parent_box(model: &Model, memo: &MemoData, u: i64, r: i64, radii: (u32, u32)) -> Vec<f64> {
    let (ml, mk) = (radii.0 as i64, radii.1 as i64);
    let mut w = Vec::with_capacity(((2 * ml + 1) * (2 * mk + 1)) as usize);
    for lambda in u - ml..=u + ml {
        for k in r - mk..=r + mk {
            w.push(memo.mass(model, lambda, k));
        }
    }
    w
}

fn log_death_density(box_w: &[f64], u: i64, r: i64, params: (i64, i64), radii: (u32, u32)) -> f64 {
    let (ml, mk) = (radii.0 as i64, radii.1 as i64);
    let (i, j) = (params.0 - (u - ml), params.1 - (r - mk));
    if !(0..=2 * ml).contains(&i) || !(0..=2 * mk).contains(&j) {
        return f64::NEG_INFINITY;
    }
    box_w[(i * (2 * mk + 1) + j) as usize] - log_sum_exp(box_w)
}

/// Log tree-move proposal probability of growing one specific leaf by one
/// specific rule, and of pruning one specific node.
pub(crate) fn log_grow_select(
    model: &Model,
    n_internal: usize,
    n_leaves: usize,
    var: usize,
) -> f64 {
    model.cfg.moves.log_birth(n_internal) - (n_leaves as f64).ln() + model.cuts.rule_log_prob(var)
}

pub(crate) fn log_prune_select(model: &Model, n_internal: usize, n_nog: usize) -> f64 {
    model.cfg.moves.log_death(n_internal) - (n_nog as f64).ln()
}

/// Number of nog nodes after splitting `leaf`.
pub(crate) fn nog_after_split(tree: &Tree, leaf: NodeId) -> usize {
    let mut n = tree.nog_nodes().len() + 1;
    if let Some(p) = tree.parent(leaf) {
        let (l, r) = tree.children(p).expect("internal parent");
        let sibling = if l == leaf { r } else { l };
        if tree.is_leaf(sibling) {
            n -= 1;
        }
    }
    n
}

/// A fully evaluated birth proposal.
#[derive(Debug, Clone)]
pub struct BirthProposal {
    pub leaf: NodeId,
    pub rule: SplitRule,
    pub lambda: (i64, i64),
    pub k: (i64, i64),
    pub u: (i64, i64),
    pub r: (i64, i64),
    pub a_lambda: i64,
    pub a_k: i64,
    /// Birth proposal density of the children, summed over offsets.
    pub log_q_forward: f64,
    /// Death proposal density of the parent's current parameters.
    pub log_q_reverse: f64,
    pub log_ratio: f64,
    obs: (Vec<usize>, Vec<usize>),
    memos: (MassMemo, MassMemo),
}

/// Draws a leaf, a rule and child parameters and evaluates the log
/// acceptance ratio.
pub fn propose_birth_tc<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &Tree,
    z: &[bool],
    radii: (u32, u32),
) -> Result<BirthProposal, Abort> {
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
    let (ml, mk) = (radii.0 as i64, radii.1 as i64);
    let a_lambda = rng.random_range(-2 * ml..=2 * ml);
    let a_k = rng.random_range(-2 * mk..=2 * mk);
    let parent = (current.params.lambda, current.params.k);
    let (ul, ur) = delta_map(parent.0, a_lambda);
    let (rl, rr) = delta_map(parent.1, a_k);

    let depth = tree.depth(leaf);
    let memo_l = MassMemo::from_data(MemoData::new(model, model.stats(&obs_l, z), depth + 1));
    let memo_r = MassMemo::from_data(MemoData::new(model, model.stats(&obs_r, z), depth + 1));
    let data_l = memo_l.get(model, &obs_l, z, depth + 1);
    let data_r = memo_r.get(model, &obs_r, z, depth + 1);
    let grid_l = ChildGrid::new(model, data_l, parent, radii);
    let grid_r = ChildGrid::new(model, data_r, parent, radii);
    let (ll, kl) = grid_l.draw(rng, ul, rl).ok_or(Abort::EmptySlice)?;
    let (lr, kr) = grid_r.draw(rng, ur, rr).ok_or(Abort::EmptySlice)?;

    let log_q_forward = log_birth_density((&grid_l, &grid_r), parent, ((ll, kl), (lr, kr)), radii);
    let (ub, _) = delta_inv(ll, lr);
    let (rb, _) = delta_inv(kl, kr);
    let data_b = model.leaf_memo(current, z, depth);
    let box_b = parent_box(model, data_b, ub, rb, radii);
    let log_q_reverse = log_death_density(&box_b, ub, rb, parent, radii);

    let mass_children =
        data_l.mass(model, ll, kl) + data_r.mass(model, lr, kr) + data_l.extra() + data_r.extra();
    let mass_parent = data_b.mass(model, parent.0, parent.1) + data_b.extra();
    let n_internal = tree.n_internal();
    let log_ratio = model.cfg.tree_prior.log_birth_ratio(depth, var, model.cuts) + mass_children
        - mass_parent
        + log_prune_select(model, n_internal + 1, nog_after_split(tree, leaf))
        - log_grow_select(model, n_internal, leaves.len(), var)
        + log_q_reverse
        - log_q_forward;

    Ok(BirthProposal {
        leaf,
        rule,
        lambda: (ll, lr),
        k: (kl, kr),
        u: (ul, ur),
        r: (rl, rr),
        a_lambda,
        a_k,
        log_q_forward,
        log_q_reverse,
        log_ratio,
        obs: (obs_l, obs_r),
        memos: (memo_l, memo_r),
    })
}

pub(crate) fn mh_accept<R: Rng + ?Sized>(rng: &mut R, log_ratio: f64) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

/// Flips the MH coin for a birth and installs the children on acceptance.
pub fn accept_birth<R: Rng + ?Sized>(
    rng: &mut R,
    proposal: BirthProposal,
    tree: &mut Tree,
) -> bool {
    if !mh_accept(rng, proposal.log_ratio) {
        return false;
    }
    let rho = tree.leaf(proposal.leaf).expect("leaf").params.rho;
    let (obs_l, obs_r) = proposal.obs;
    let (memo_l, memo_r) = proposal.memos;
    let mut left = Leaf::with_memo(
        LeafParams {
            lambda: proposal.lambda.0,
            k: proposal.k.0,
            rho,
        },
        obs_l,
        memo_l,
    );
    (left.u, left.r) = (proposal.u.0, proposal.r.0);
    let mut right = Leaf::with_memo(
        LeafParams {
            lambda: proposal.lambda.1,
            k: proposal.k.1,
            rho,
        },
        obs_r,
        memo_r,
    );
    (right.u, right.r) = (proposal.u.1, proposal.r.1);
    tree.split(proposal.leaf, proposal.rule, left, right);
    true
}

/// A fully evaluated death proposal.
#[derive(Debug, Clone)]
pub struct DeathProposal {
    pub node: NodeId,
    pub lambda: i64,
    pub k: i64,
    pub u: i64,
    pub r: i64,
    /// Offsets implied by the children, `δ⁻¹` second components.
    pub a_lambda: i64,
    pub a_k: i64,
    pub log_q_forward: f64,
    pub log_q_reverse: f64,
    pub log_ratio: f64,
    obs: Vec<usize>,
    memo: MassMemo,
}

/// Picks a nog node, draws merged parameters and evaluates the log
/// acceptance ratio.
pub fn propose_death_tc<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &Tree,
    z: &[bool],
    radii: (u32, u32),
) -> Result<DeathProposal, Abort> {
    let nogs = tree.nog_nodes();
    if nogs.is_empty() {
        return Err(Abort::Ineligible);
    }
    let node = nogs[rng.random_range(0..nogs.len())];
    let rule = tree.rule(node).expect("internal");
    let (l, r) = tree.children(node).expect("internal");
    let (left, right) = (tree.leaf(l).expect("leaf"), tree.leaf(r).expect("leaf"));
    let (ub, a_lambda) = delta_inv(left.params.lambda, right.params.lambda);
    let (rb, a_k) = delta_inv(left.params.k, right.params.k);
    let (ml, mk) = (radii.0 as i64, radii.1 as i64);
    // A merged value outside these sets gives the reverse birth zero density;
    // if the whole slice is outside, every draw would be rejected.
    let lambda_ok = |l: i64| reachable(l, (left.params.lambda, right.params.lambda), ml);
    let k_ok = |k: i64| reachable(k, (left.params.k, right.params.k), mk);
    if !(ub - ml..=ub + ml).any(lambda_ok) || !(rb - mk..=rb + mk).any(k_ok) {
        return Err(Abort::ZeroReverseDensity);
    }

    let depth = tree.depth(node);
    let mut obs: Vec<usize> = left.obs().iter().chain(right.obs()).copied().collect();
    obs.sort_unstable();
    let memo = MassMemo::from_data(MemoData::new(model, model.stats(&obs, z), depth));
    let data_b = memo.get(model, &obs, z, depth);
    let box_b = parent_box(model, data_b, ub, rb, radii);
    let idx = sample_log_weights(rng, &box_b).ok_or(Abort::EmptySlice)? as i64;
    let side = 2 * mk + 1;
    let lambda = ub - ml + idx / side;
    let k = rb - mk + idx % side;
    let log_q_forward = log_death_density(&box_b, ub, rb, (lambda, k), radii);

    let data_l = model.leaf_memo(left, z, depth + 1);
    let data_r = model.leaf_memo(right, z, depth + 1);
    let grid_l = ChildGrid::new(model, data_l, (lambda, k), radii);
    let grid_r = ChildGrid::new(model, data_r, (lambda, k), radii);
    let children = (
        (left.params.lambda, left.params.k),
        (right.params.lambda, right.params.k),
    );
    let log_q_reverse = log_birth_density((&grid_l, &grid_r), (lambda, k), children, radii);
    if log_q_reverse == f64::NEG_INFINITY {
        return Err(Abort::ZeroReverseDensity);
    }

    let mass_children = data_l.mass(model, children.0 .0, children.0 .1)
        + data_r.mass(model, children.1 .0, children.1 .1)
        + data_l.extra()
        + data_r.extra();
    let mass_parent = data_b.mass(model, lambda, k) + data_b.extra();
    let n_internal = tree.n_internal();
    let log_ratio = -model
        .cfg
        .tree_prior
        .log_birth_ratio(depth, rule.var, model.cuts)
        + mass_parent
        - mass_children
        + log_grow_select(model, n_internal - 1, tree.n_leaves() - 1, rule.var)
        - log_prune_select(model, n_internal, nogs.len())
        + log_q_reverse
        - log_q_forward;

    Ok(DeathProposal {
        node,
        lambda,
        k,
        u: ub,
        r: rb,
        a_lambda,
        a_k,
        log_q_forward,
        log_q_reverse,
        log_ratio,
        obs,
        memo,
    })
}

/// Flips the MH coin for a death and collapses the node on acceptance.
pub fn accept_death<R: Rng + ?Sized>(
    rng: &mut R,
    proposal: DeathProposal,
    tree: &mut Tree,
) -> bool {
    if !mh_accept(rng, proposal.log_ratio) {
        return false;
    }
    let (l, _) = tree.children(proposal.node).expect("internal");
    let rho = tree.leaf(l).expect("leaf").params.rho;
    let mut leaf = Leaf::with_memo(
        LeafParams {
            lambda: proposal.lambda,
            k: proposal.k,
            rho,
        },
        proposal.obs,
        proposal.memo,
    );
    (leaf.u, leaf.r) = (proposal.u, proposal.r);
    tree.collapse(proposal.node, leaf);
    true
}
