use rand::Rng;

use super::birth_death::mh_accept;
use super::{MassMemo, MemoData, Model, NodeId, SplitRule, Tree};

/// Outcome of a cutpoint perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbOutcome {
    Accepted,
    Rejected,
    /// The shifted index left the grid or emptied a leaf.
    Invalid,
}

/// Shifts one internal node's cut index by a uniform nonzero offset of at
/// most `radius` and accepts on the likelihood ratio of the affected leaves.
pub fn perturb_cutpoint<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
    radius: usize,
) -> PerturbOutcome {
    let internal = tree.internal_nodes();
    if internal.is_empty() || radius == 0 {
        return PerturbOutcome::Invalid;
    }
    let node = internal[rng.random_range(0..internal.len())];
    let old = tree.rule(node).expect("internal");
    let r = radius as i64;
    let mut offset = rng.random_range(-r..r);
    if offset >= 0 {
        offset += 1;
    }
    let cut = old.cut as i64 + offset;
    if cut < 0 || cut >= model.cuts.zeta(old.var) as i64 {
        return PerturbOutcome::Invalid;
    }
    let new = SplitRule {
        var: old.var,
        cut: cut as usize,
    };
    perturb_to(rng, model, tree, z, node, new)
}

/// MH step from the current rule at `node` to `new`, parameters held fixed.
pub(crate) fn perturb_to<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
    node: NodeId,
    new: SplitRule,
) -> PerturbOutcome {
    let old = tree.rule(node).expect("internal");
    let obs = tree.obs_under(node);
    tree.set_rule(node, new);
    let routed = tree.route_subtree(node, &obs, model.data, model.cuts);
    if routed.iter().any(|(_, o)| o.is_empty()) {
        tree.set_rule(node, old);
        return PerturbOutcome::Invalid;
    }
    let mut log_ratio = 0.0;
    let mut memos = Vec::with_capacity(routed.len());
    for (id, new_obs) in &routed {
        let leaf = tree.leaf(*id).expect("leaf");
        if leaf.obs() == new_obs.as_slice() {
            memos.push(None);
            continue;
        }
        let depth = tree.depth(*id);
        let (lambda, k) = (leaf.params.lambda, leaf.params.k);
        let before = model.leaf_memo(leaf, z, depth);
        let after = MemoData::new(model, model.stats(new_obs, z), depth);
        // Priors on (λ, k) cancel; the leaf masses differ only in likelihood.
        log_ratio += after.mass(model, lambda, k) + after.extra()
            - before.mass(model, lambda, k)
            - before.extra();
        memos.push(Some(MassMemo::from_data(after)));
    }
    if mh_accept(rng, log_ratio) {
        for ((id, new_obs), memo) in routed.into_iter().zip(memos) {
            if let Some(memo) = memo {
                tree.leaf_mut(id)
                    .expect("leaf")
                    .set_obs(new_obs, Some(memo));
            }
        }
        PerturbOutcome::Accepted
    } else {
        tree.set_rule(node, old);
        PerturbOutcome::Rejected
    }
}
