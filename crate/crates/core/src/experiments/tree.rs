//! Tree and zero-inflated tree fits on synthetic quadrant data.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, SamplerChoice};
use super::data::{generate_tree_data, generate_zi_data, SyntheticData};
use super::output::{prepare_dir, write_csv, write_ndjson};
use crate::error::{Error, Result};
use crate::tree::{fit, FitResult, Model};

/// One row of the method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummaryRow {
    pub method: SamplerChoice,
    pub zero_inflated: bool,
    pub n: usize,
    /// `(radius_λ, radius_k, c)`.
    pub radii: String,
    pub n_chains: usize,
    pub n_iters: u64,
    pub burn_in: u64,
    /// Time inside sampler steps, summed over chains.
    pub runtime_sec: f64,
    pub mae: f64,
    pub mae_se: f64,
    pub l2: f64,
    pub l2_sd: f64,
    pub l2_posterior_mean: f64,
    pub l2_posterior_mean_sd: f64,
    pub modal_n_leaves: usize,
    /// Split variables of the modal tree, `;`-separated.
    pub modal_split_vars: String,
    /// Share of evaluation draws with the modal structure.
    pub modal_share: f64,
    pub zero_fraction: f64,
    /// Scale range marginalized by the MH birth/death move at the root.
    pub k_window_lo: i64,
    pub k_window_hi: i64,
}

pub const SUMMARY_HEADER: [&str; 20] = [
    "method",
    "zero_inflated",
    "n",
    "radii",
    "n_chains",
    "n_iters",
    "burn_in",
    "runtime_sec",
    "mae",
    "mae_se",
    "l2",
    "l2_sd",
    "l2_posterior_mean",
    "l2_posterior_mean_sd",
    "modal_n_leaves",
    "modal_split_vars",
    "modal_share",
    "zero_fraction",
    "k_window_lo",
    "k_window_hi",
];

/// Per-chain results with flattened move counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTraceRow {
    pub chain: usize,
    pub seed: u64,
    pub runtime_sec: f64,
    pub n_eval: usize,
    pub mae: Option<f64>,
    pub l2: Option<f64>,
    pub l2_posterior_mean: Option<f64>,
    pub final_n_leaves: usize,
    pub birth_proposed: u64,
    pub birth_accepted: u64,
    pub death_proposed: u64,
    pub death_accepted: u64,
    pub perturb_proposed: u64,
    pub perturb_accepted: u64,
}

pub const TRACE_HEADER: [&str; 14] = [
    "chain",
    "seed",
    "runtime_sec",
    "n_eval",
    "mae",
    "l2",
    "l2_posterior_mean",
    "final_n_leaves",
    "birth_proposed",
    "birth_accepted",
    "death_proposed",
    "death_accepted",
    "perturb_proposed",
    "perturb_accepted",
];

#[derive(Debug, Clone)]
pub struct TreeRun {
    pub summary: TreeSummaryRow,
    pub fit: FitResult,
    pub synthetic: SyntheticData,
}

impl TreeRun {
    pub fn trace_rows(&self) -> Vec<TreeTraceRow> {
        self.fit
            .chains
            .iter()
            .map(|c| TreeTraceRow {
                chain: c.chain,
                seed: c.seed,
                runtime_sec: c.runtime_sec,
                n_eval: c.n_eval,
                mae: c.mae,
                l2: c.l2,
                l2_posterior_mean: c.l2_posterior_mean,
                final_n_leaves: c.final_n_leaves,
                birth_proposed: c.diagnostics.birth.proposed,
                birth_accepted: c.diagnostics.birth.accepted,
                death_proposed: c.diagnostics.death.proposed,
                death_accepted: c.diagnostics.death.accepted,
                perturb_proposed: c.diagnostics.perturb.proposed,
                perturb_accepted: c.diagnostics.perturb.accepted,
            })
            .collect()
    }

    /// Writes the comparison row, per-chain trace and thinned posterior trees.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let [summary, trace, posterior] = prepare_dir(dir)?;
        write_csv(
            &summary,
            &SUMMARY_HEADER,
            std::slice::from_ref(&self.summary),
        )?;
        write_csv(&trace, &TRACE_HEADER, &self.trace_rows())?;
        write_ndjson(&posterior, &self.fit.records)?;
        Ok(vec![summary, trace, posterior])
    }
}

/// Generates data from `data.seed`, fits with the configured sampler and
/// summarizes. `kind` must be `tree` or `zi_tree`.
pub fn run_tree_experiment(cfg: &ExperimentConfig) -> Result<TreeRun> {
    cfg.validate()?;
    let zero_inflated = match cfg.kind {
        ExperimentKind::Tree => false,
        ExperimentKind::ZiTree => true,
        k => return Err(Error::Config(format!("{k:?} is not a tree experiment"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.data.seed);
    let synthetic = if zero_inflated {
        generate_zi_data(&mut rng, cfg.data.n)?
    } else {
        generate_tree_data(&mut rng, cfg.data.n)?
    };
    let cuts = cfg.cutpoints(&synthetic.data)?;
    let model = Model::new(
        &synthetic.data,
        &cuts,
        cfg.model_config(&synthetic.data, zero_inflated)?,
    )?;
    let g_true = synthetic.g_true_f64();
    let result = fit(&model, &cfg.fit_config(), Some(&g_true))?;

    let missing = || Error::Invariant("no evaluation draws after burn-in".into());
    let (mae, mae_se) = result.mae().ok_or_else(missing)?;
    let (l2, l2_sd) = result.l2().ok_or_else(missing)?;
    let (l2_pm, l2_pm_sd) = result.l2_posterior_mean().ok_or_else(missing)?;
    let modal = result.modal_structure().ok_or_else(missing)?;
    let n_draws: usize = result.structures.iter().map(|s| s.count).sum();
    let (k_lo, k_hi) = model.k_window(0);
    let summary = TreeSummaryRow {
        method: cfg.sampler,
        zero_inflated,
        n: cfg.data.n,
        radii: format!(
            "({},{},{})",
            cfg.radii.lambda, cfg.radii.k, cfg.hyper.perturb_radius
        ),
        n_chains: cfg.chains.n_chains,
        n_iters: cfg.chains.n_iters,
        burn_in: cfg.chains.burn_in,
        runtime_sec: result.runtime_sec,
        mae,
        mae_se,
        l2,
        l2_sd,
        l2_posterior_mean: l2_pm,
        l2_posterior_mean_sd: l2_pm_sd,
        modal_n_leaves: modal.n_leaves,
        modal_split_vars: modal
            .split_vars
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";"),
        modal_share: modal.count as f64 / n_draws as f64,
        zero_fraction: synthetic.zero_fraction(),
        k_window_lo: k_lo,
        k_window_hi: k_hi,
    };
    Ok(TreeRun {
        summary,
        fit: result,
        synthetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::output::derived_header;

    fn small(kind: ExperimentKind, sampler: SamplerChoice) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.sampler = sampler;
        cfg.data.n = 120;
        cfg.chains.n_chains = 2;
        cfg.chains.n_iters = 60;
        cfg.chains.burn_in = 20;
        cfg.chains.n_eval_draws = 10;
        cfg
    }

    #[test]
    fn small_runs_produce_consistent_outputs() {
        for (kind, sampler) in [
            (ExperimentKind::Tree, SamplerChoice::Tc),
            (ExperimentKind::Tree, SamplerChoice::Mh),
            (ExperimentKind::ZiTree, SamplerChoice::Tc),
        ] {
            let run = run_tree_experiment(&small(kind, sampler)).unwrap();
            assert_eq!(derived_header(&run.summary), SUMMARY_HEADER);
            assert_eq!(derived_header(&run.trace_rows()[0]), TRACE_HEADER);
            assert_eq!(run.summary.zero_inflated, kind == ExperimentKind::ZiTree);
            assert_eq!(run.trace_rows().len(), 2);
            let dir = tempfile::tempdir().unwrap();
            let files = run.write_outputs(dir.path()).unwrap();
            let lines = std::fs::read_to_string(&files[2]).unwrap().lines().count();
            assert_eq!(lines, run.fit.records.len());
        }
    }

    #[test]
    fn rejects_other_kinds_and_empty_data() {
        assert!(
            run_tree_experiment(&ExperimentConfig::defaults(ExperimentKind::Calibrate)).is_err()
        );
        let mut cfg = small(ExperimentKind::Tree, SamplerChoice::Tc);
        cfg.data.n = 0;
        assert!(matches!(run_tree_experiment(&cfg), Err(Error::Config(_))));
    }
}
