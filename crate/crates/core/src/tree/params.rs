use rand::Rng;

use super::Model;
use super::Tree;
use crate::error::Result;
use crate::sampler::{mh_rw_step, tc_step_1d};

/// One taxicab step for `λ_b` then for `k_b` (at the new `λ_b`) in every leaf.
pub fn tc_update_leaf_params<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
    radii: (u32, u32),
) -> Result<()> {
    for id in tree.leaves() {
        let depth = tree.depth(id);
        let leaf = tree.leaf_mut(id).expect("leaf");
        let memo = model.leaf_memo(leaf, z, depth);
        let k = leaf.params.k;
        let (lambda, u) = tc_step_1d(rng, leaf.params.lambda, radii.0, |l| memo.mass(model, l, k))?;
        let (k, r) = tc_step_1d(rng, k, radii.1, |k| memo.mass(model, lambda, k))?;
        (leaf.params.lambda, leaf.u) = (lambda, u);
        (leaf.params.k, leaf.r) = (k, r);
    }
    Ok(())
}

/// Random-walk MH steps for `λ_b` then `k_b` in every leaf; returns the number
/// of accepted proposals.
pub fn mh_update_leaf_params<R: Rng + ?Sized>(
    rng: &mut R,
    model: &Model,
    tree: &mut Tree,
    z: &[bool],
    radii: (u32, u32),
) -> usize {
    let mut accepted = 0;
    for id in tree.leaves() {
        let depth = tree.depth(id);
        let leaf = tree.leaf_mut(id).expect("leaf");
        let memo = model.leaf_memo(leaf, z, depth);
        let k = leaf.params.k;
        let lam_target = |x: &[i64]| memo.mass(model, x[0], k);
        let lam = mh_rw_step(rng, &[leaf.params.lambda], radii.0, &lam_target);
        let lambda = lam.state[0];
        let k_target = |x: &[i64]| memo.mass(model, lambda, x[0]);
        let scale = mh_rw_step(rng, &[k], radii.1, &k_target);

        accepted += lam.accepted as usize + scale.accepted as usize;
        leaf.params.lambda = lambda;
        leaf.params.k = scale.state[0];
    }
    accepted
}
