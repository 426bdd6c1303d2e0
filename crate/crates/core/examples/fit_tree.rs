//! Single-tree count regression on the four-quadrant step function.
//!
//! ```text
//! cargo run --release --example fit_tree [n_chains]
//! ```

use taxicab::experiments::{run_tree_experiment, ExperimentConfig, ExperimentKind, SamplerChoice};

fn main() -> taxicab::Result<()> {
    let chains = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    for sampler in [SamplerChoice::Tc, SamplerChoice::Mh] {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Tree);
        cfg.sampler = sampler;
        cfg.chains.n_chains = chains;
        let run = run_tree_experiment(&cfg)?;
        let s = &run.summary;
        println!(
            "{sampler}: {:.2}s  MAE {:.3} ({:.3})  L2 {:.2} ({:.2})  modal tree {} leaves on vars {} ({:.0}% of draws)",
            s.runtime_sec,
            s.mae,
            s.mae_se,
            s.l2,
            s.l2_sd,
            s.modal_n_leaves,
            s.modal_split_vars,
            100.0 * s.modal_share
        );
    }
    Ok(())
}
