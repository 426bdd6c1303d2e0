use serde::{Deserialize, Serialize};

use super::{CutpointGrid, Tree};
use crate::error::{Error, Result};

/// Depth-penalized split prior: a node at depth `d` is internal with
/// probability `α(1+d)^{−β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePrior {
    pub alpha: f64,
    pub beta: f64,
}

impl TreePrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha={alpha} outside (0, 1)")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta={beta} must be finite and >= 0"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn split_prob(&self, depth: u32) -> f64 {
        self.alpha * (1.0 + depth as f64).powf(-self.beta)
    }

    /// Log prior of the tree shape and rules.
    pub fn log_prior(&self, tree: &Tree, cuts: &CutpointGrid) -> f64 {
        let mut total = 0.0;
        for id in tree.preorder() {
            let depth = tree.depth(id);
            match tree.rule(id) {
                Some(rule) => total += self.split_prob(depth).ln() + cuts.rule_log_prob(rule.var),
                None => total += (-self.split_prob(depth)).ln_1p(),
            }
        }
        total
    }

    /// Change in log prior when a leaf at `depth` grows two leaf children
    /// under a rule on covariate `var`.
    pub fn log_birth_ratio(&self, depth: u32, var: usize, cuts: &CutpointGrid) -> f64 {
        let split = self.split_prob(depth);
        let child = self.split_prob(depth + 1);
        split.ln() - (-split).ln_1p() + 2.0 * (-child).ln_1p() + cuts.rule_log_prob(var)
    }
}

/// Tree-move probabilities; illegal moves have their share redistributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveProbs {
    pub birth: f64,
    pub death: f64,
    pub perturb: f64,
}

impl Default for MoveProbs {
    fn default() -> Self {
        Self {
            birth: 0.25,
            death: 0.25,
            perturb: 0.5,
        }
    }
}

/// A tree move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMove {
    Birth,
    Death,
    Perturb,
}

impl MoveProbs {
    pub fn new(birth: f64, death: f64, perturb: f64) -> Result<Self> {
        let all = [birth, death, perturb];
        if all.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || birth <= 0.0 || death <= 0.0 {
            return Err(Error::Config(
                "move probabilities must be nonnegative with birth and death positive".into(),
            ));
        }
        Ok(Self {
            birth,
            death,
            perturb,
        })
    }

    /// Probabilities of (birth, death, perturb) for a tree with the given
    /// number of internal nodes. Only birth is legal at the root-only tree.
    pub fn for_tree(&self, n_internal: usize) -> [f64; 3] {
        if n_internal == 0 {
            return [1.0, 0.0, 0.0];
        }
        let total = self.birth + self.death + self.perturb;
        [self.birth / total, self.death / total, self.perturb / total]
    }

    pub fn log_birth(&self, n_internal: usize) -> f64 {
        self.for_tree(n_internal)[0].ln()
    }

    pub fn log_death(&self, n_internal: usize) -> f64 {
        self.for_tree(n_internal)[1].ln()
    }
}
