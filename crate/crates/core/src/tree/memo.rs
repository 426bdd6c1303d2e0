//! Per-leaf memo of joint leaf masses `ln π(λ) + ln π(k | λ) + ln L(λ, k)`.
//!
//! A leaf's observations, depth and (under zero inflation) active responses
//! fix its mass function, so values computed once are reused until the leaf
//! is rebuilt or its indicators change.

use std::cell::{Cell, OnceCell};

use super::{LeafStats, Model};

/// Grids larger than this are not memoized.
const MAX_CELLS: usize = 1 << 20;
/// `k` values memoized beyond each side of the marginalization window.
const K_MARGIN: i64 = 12;

/// Lazily filled mass table of one leaf.
#[derive(Debug, Clone, Default)]
pub struct MassMemo(OnceCell<MemoData>);

#[derive(Debug, Clone)]
pub struct MemoData {
    stats: LeafStats,
    depth: u32,
    extra: f64,
    lambda_lo: i64,
    lambda_hi: i64,
    k_lo: i64,
    k_hi: i64,
    cells: OnceCell<Vec<Cell<f64>>>,
}

impl MemoData {
    pub fn new(model: &Model, stats: LeafStats, depth: u32) -> Self {
        let (w_lo, w_hi) = model.k_window(depth);
        let extra = model.leaf_extra(&stats);
        Self {
            stats,
            depth,
            extra,
            lambda_lo: model.cfg.location.d1,
            lambda_hi: model.cfg.location.d2,
            k_lo: w_lo - K_MARGIN,
            k_hi: w_hi + K_MARGIN,
            cells: OnceCell::new(),
        }
    }

    pub fn stats(&self) -> &LeafStats {
        &self.stats
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Parameter-free factor ([`Model::leaf_extra`]).
    pub fn extra(&self) -> f64 {
        self.extra
    }

    fn width_k(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }

    /// [`Model::leaf_mass`] at `(λ, k)`.
    pub fn mass(&self, model: &Model, lambda: i64, k: i64) -> f64 {
        if lambda < self.lambda_lo || lambda > self.lambda_hi {
            return f64::NEG_INFINITY;
        }
        if k < self.k_lo || k > self.k_hi {
            return model.leaf_mass(&self.stats, lambda, k, self.depth);
        }
        let n = (self.lambda_hi - self.lambda_lo + 1) as usize * self.width_k();
        if n > MAX_CELLS {
            return model.leaf_mass(&self.stats, lambda, k, self.depth);
        }
        let cells = self.cells.get_or_init(|| vec![Cell::new(f64::NAN); n]);
        let cell =
            &cells[(lambda - self.lambda_lo) as usize * self.width_k() + (k - self.k_lo) as usize];
        let v = cell.get();
        if !v.is_nan() {
            return v;
        }
        let v = model.leaf_mass(&self.stats, lambda, k, self.depth);
        cell.set(v);
        v
    }
}

impl MassMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_data(data: MemoData) -> Self {
        Self(OnceCell::from(data))
    }

    /// Memo contents, built from `obs` on first use.
    pub fn get(&self, model: &Model, obs: &[usize], z: &[bool], depth: u32) -> &MemoData {
        let data = self
            .0
            .get_or_init(|| MemoData::new(model, model.stats(obs, z), depth));
        debug_assert_eq!(data.depth, depth, "memo reused at another depth");
        data
    }

    pub fn is_filled(&self) -> bool {
        self.0.get().is_some()
    }

    pub fn clear(&mut self) {
        self.0.take();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{LocationPrior, ScalePrior};
    use crate::tree::{CutpointGrid, Dataset, ModelConfig, MoveProbs, SamplerKind, TreePrior};

    #[test]
    fn memo_agrees_with_direct_evaluation() {
        let data = Dataset::new(vec![vec![0.0, 1.0, 2.0, 3.0]], vec![4, 6, 5, 9]).unwrap();
        let cuts = CutpointGrid::from_data(&data, 3).unwrap();
        let cfg = ModelConfig {
            t: 0.025,
            location: LocationPrior::new(0, 12).unwrap(),
            scale: ScalePrior::new(2, 1.0, 0.025).unwrap(),
            tree_prior: TreePrior::new(0.95, 1.0).unwrap(),
            moves: MoveProbs::default(),
            perturb_radius: 1,
            zi: None,
            sampler: SamplerKind::Taxicab {
                m_lambda: 2,
                m_k: 1,
            },
            k_window_tol: 1e-6,
        };
        let model = Model::new(&data, &cuts, cfg).unwrap();
        let obs = [0, 1, 3];
        let memo = MassMemo::new();
        let stats = model.stats(&obs, &[]);
        for _ in 0..2 {
            for lambda in -3..=15 {
                for k in -40..=40 {
                    let m = memo.get(&model, &obs, &[], 1).mass(&model, lambda, k);
                    assert_eq!(m, model.leaf_mass(&stats, lambda, k, 1));
                }
            }
        }
    }
}
