use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Chain, ChainDiagnostics, EncodedNode, Model};
use crate::error::{Error, Result};

/// Restart plan and recording options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_chains: usize,
    pub n_iters: u64,
    pub burn_in: u64,
    /// Interval between posterior-stream records after burn-in; 0 disables
    /// the stream.
    pub thin: u64,
    /// Evenly spaced post-burn-in draws per chain used for fit metrics and
    /// the modal tree.
    pub n_eval_draws: usize,
    /// Chain `c` is seeded with `base_seed + c`.
    pub base_seed: u64,
    /// Worker threads for independent chains; 1 runs them in order.
    pub workers: usize,
    /// Include fitted locations in posterior-stream records.
    pub record_fitted: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_chains: 20,
            n_iters: 3000,
            burn_in: 500,
            thin: 10,
            n_eval_draws: 1000,
            base_seed: 1,
            workers: 1,
            record_fitted: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 {
            return Err(Error::Config("at least one chain is required".into()));
        }
        if self.burn_in > self.n_iters {
            return Err(Error::Config("burn-in exceeds the chain length".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("at least one worker is required".into()));
        }
        Ok(())
    }

    /// Iteration numbers (1-based, after the step) used for evaluation.
    pub fn eval_iterations(&self) -> Vec<u64> {
        let span = self.n_iters - self.burn_in;
        let s = (self.n_eval_draws as u64).min(span);
        (0..s)
            .map(|j| self.burn_in + ((j + 1) * span).div_ceil(s))
            .collect()
    }
}

/// One thinned posterior state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRecord {
    pub chain: usize,
    pub iteration: u64,
    pub log_posterior: f64,
    pub n_leaves: usize,
    pub tree: Vec<EncodedNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted: Option<Vec<i64>>,
}

/// Per-chain fit summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResult {
    pub chain: usize,
    pub seed: u64,
    pub runtime_sec: f64,
    pub n_eval: usize,
    /// Mean over evaluation draws and observations of `|ĝ − y|`.
    pub mae: Option<f64>,
    /// Mean over evaluation draws of `‖ĝ − g‖₂`.
    pub l2: Option<f64>,
    /// `‖mean(ĝ) − g‖₂`.
    pub l2_posterior_mean: Option<f64>,
    pub final_n_leaves: usize,
    pub diagnostics: ChainDiagnostics,
}

/// Frequency of one tree structure among evaluation draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCount {
    pub key: String,
    pub count: usize,
    pub n_leaves: usize,
    pub split_vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub chains: Vec<ChainResult>,
    /// Wall-clock time spent inside sampler steps, summed over chains.
    pub runtime_sec: f64,
    pub records: Vec<PosteriorRecord>,
    /// Most frequent first; ties keep first occurrence.
    pub structures: Vec<StructureCount>,
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl FitResult {
    /// `(mean MAE, SE)` over chains.
    pub fn mae(&self) -> Option<(f64, f64)> {
        let v: Option<Vec<f64>> = self.chains.iter().map(|c| c.mae).collect();
        v.filter(|v| !v.is_empty()).map(|v| {
            let (m, sd) = mean_sd(&v);
            (m, sd / (v.len() as f64).sqrt())
        })
    }

    /// `(mean L2, SD)` over chains.
    pub fn l2(&self) -> Option<(f64, f64)> {
        let v: Option<Vec<f64>> = self.chains.iter().map(|c| c.l2).collect();
        v.filter(|v| !v.is_empty()).map(|v| mean_sd(&v))
    }

    pub fn l2_posterior_mean(&self) -> Option<(f64, f64)> {
        let v: Option<Vec<f64>> = self.chains.iter().map(|c| c.l2_posterior_mean).collect();
        v.filter(|v| !v.is_empty()).map(|v| mean_sd(&v))
    }

    pub fn modal_structure(&self) -> Option<&StructureCount> {
        self.structures.first()
    }
}

struct ChainRun {
    result: ChainResult,
    records: Vec<PosteriorRecord>,
    structures: Vec<(String, usize, Vec<usize>)>,
}

fn run_chain(model: &Model, cfg: &FitConfig, g_true: Option<&[f64]>, c: usize) -> Result<ChainRun> {
    let seed = cfg.base_seed.wrapping_add(c as u64);
    let mut chain = Chain::new(model, seed);
    let n = model.data.n();
    let y = model.data.y();
    let eval = cfg.eval_iterations();
    let mut next_eval = 0;
    let mut elapsed = Duration::ZERO;
    let (mut abs_sum, mut l2_sum) = (0.0, 0.0);
    let mut g_sum = vec![0.0; n];
    let mut records = Vec::new();
    let mut structures = Vec::new();

    for _ in 0..cfg.n_iters {
        let start = Instant::now();
        chain.step()?;
        elapsed += start.elapsed();
        let it = chain.iteration();
        let tree = chain.tree();
        let is_eval = eval.get(next_eval) == Some(&it);
        let is_record = cfg.thin > 0 && it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0;
        if !is_eval && !is_record {
            continue;
        }
        let fitted = tree.fitted_lambda(n);
        if is_eval {
            next_eval += 1;
            abs_sum += fitted
                .iter()
                .zip(y)
                .map(|(g, y)| (g - y).abs() as f64)
                .sum::<f64>()
                / n as f64;
            if let Some(truth) = g_true {
                l2_sum += fitted
                    .iter()
                    .zip(truth)
                    .map(|(g, t)| (*g as f64 - t).powi(2))
                    .sum::<f64>()
                    .sqrt();
            }
            for (s, g) in g_sum.iter_mut().zip(&fitted) {
                *s += *g as f64;
            }
            structures.push((tree.structure_key(), tree.n_leaves(), tree.split_vars()));
        }
        if is_record {
            records.push(PosteriorRecord {
                chain: c,
                iteration: it,
                log_posterior: chain.log_posterior(),
                n_leaves: tree.n_leaves(),
                tree: tree.encode(model.cuts, model.is_zi()),
                fitted: cfg.record_fitted.then_some(fitted),
            });
        }
    }

    let n_eval = next_eval;
    let draws = n_eval as f64;
    let result = ChainResult {
        chain: c,
        seed,
        runtime_sec: elapsed.as_secs_f64(),
        n_eval,
        mae: (n_eval > 0).then(|| abs_sum / draws),
        l2: g_true.filter(|_| n_eval > 0).map(|_| l2_sum / draws),
        l2_posterior_mean: g_true.filter(|_| n_eval > 0).map(|truth| {
            g_sum
                .iter()
                .zip(truth)
                .map(|(s, t)| (s / draws - t).powi(2))
                .sum::<f64>()
                .sqrt()
        }),
        final_n_leaves: chain.tree().n_leaves(),
        diagnostics: *chain.diagnostics(),
    };
    Ok(ChainRun {
        result,
        records,
        structures,
    })
}

/// Runs independent restarts from the single-node tree and summarizes them.
///
/// `g_true` (true location per observation) enables the L2 metrics.
pub fn fit(model: &Model, cfg: &FitConfig, g_true: Option<&[f64]>) -> Result<FitResult> {
    cfg.validate()?;
    if let Some(g) = g_true {
        if g.len() != model.data.n() {
            return Err(Error::Validation(
                "true means and data differ in length".into(),
            ));
        }
    }
    let runs: Vec<ChainRun> = if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| {
            (0..cfg.n_chains)
                .into_par_iter()
                .map(|c| run_chain(model, cfg, g_true, c))
                .collect::<Result<_>>()
        })?
    } else {
        (0..cfg.n_chains)
            .map(|c| run_chain(model, cfg, g_true, c))
            .collect::<Result<_>>()?
    };

    let mut order: Vec<String> = Vec::new();
    let mut counts: HashMap<String, StructureCount> = HashMap::new();
    let mut chains = Vec::with_capacity(runs.len());
    let mut records = Vec::new();
    for run in runs {
        for (key, n_leaves, split_vars) in run.structures {
            counts
                .entry(key.clone())
                .or_insert_with(|| {
                    order.push(key.clone());
                    StructureCount {
                        key,
                        count: 0,
                        n_leaves,
                        split_vars,
                    }
                })
                .count += 1;
        }
        chains.push(run.result);
        records.extend(run.records);
    }
    let mut structures: Vec<StructureCount> = order
        .iter()
        .map(|k| counts.remove(k).expect("counted"))
        .collect();
    // Stable sort keeps first occurrence ahead among ties.
    structures.sort_by(|a, b| b.count.cmp(&a.count));
    let runtime_sec = chains.iter().map(|c| c.runtime_sec).sum();
    Ok(FitResult {
        chains,
        runtime_sec,
        records,
        structures,
    })
}
