use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::{BetaPrior, Dataset, Tree};
use crate::distributions::{effective_scale, TentParams};

/// `P(Z_i = 1 | y_i = 0) = ρ / (ρ + (1−ρ) p_t(0))`.
pub fn zero_posterior(rho: f64, p_zero: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    rho / (rho + (1.0 - rho) * p_zero)
}

/// Gibbs update of the structural-zero indicators. Leaves whose indicators
/// change drop their memoized masses.
pub fn zi_update_z<R: Rng + ?Sized>(
    rng: &mut R,
    tree: &mut Tree,
    z: &mut [bool],
    data: &Dataset,
    t: f64,
) {
    for id in tree.leaves() {
        let leaf = tree.leaf_mut(id).expect("leaf");
        let tent = TentParams::new(leaf.params.lambda, effective_scale(leaf.params.k), t)
            .expect("validated tail mass");
        let p1 = zero_posterior(leaf.params.rho, tent.pmf(0));
        let mut changed = false;
        for &i in leaf.obs() {
            // Only zeros are ever drawn; positive responses skip the RNG.
            let zi = data.y()[i] == 0 && rng.random::<f64>() < p1;
            changed |= z[i] != zi;
            z[i] = zi;
        }
        if changed {
            leaf.clear_memo();
        }
    }
}

/// Conjugate `Beta(h1 + n1, h2 + n − n1)` draw of each leaf's ρ.
pub fn zi_update_rho<R: Rng + ?Sized>(rng: &mut R, tree: &mut Tree, z: &[bool], prior: BetaPrior) {
    for id in tree.leaves() {
        let leaf = tree.leaf_mut(id).expect("leaf");
        let n1 = leaf.obs().iter().filter(|&&i| z[i]).count() as f64;
        let n = leaf.obs().len() as f64;
        let beta = Beta::new(prior.h1 + n1, prior.h2 + n - n1).expect("positive shape parameters");
        leaf.params.rho = beta.sample(rng);
    }
}
