//! Zero-inflated tree on quadrant data with structural zeros.
//!
//! ```text
//! cargo run --release --example fit_zi_tree
//! ```

use taxicab::experiments::{run_tree_experiment, ExperimentConfig, ExperimentKind};
use taxicab::tree::EncodedNode;

fn main() -> taxicab::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::ZiTree);
    cfg.chains.n_chains = 4;
    cfg.chains.n_iters = 2000;
    let run = run_tree_experiment(&cfg)?;
    let s = &run.summary;
    println!("zero fraction {:.3}", s.zero_fraction);
    println!(
        "MAE {:.3}  L2 {:.2}  modal leaves {}",
        s.mae, s.l2, s.modal_n_leaves
    );

    if let Some(last) = run.fit.records.last() {
        println!("last recorded tree of chain {} (preorder):", last.chain);
        for node in &last.tree {
            match node {
                EncodedNode::Internal { var, value, .. } => {
                    println!("  x{} <= {value:.2}?", var + 1)
                }
                EncodedNode::Leaf { lambda, k, rho } => {
                    println!("  leaf λ={lambda} k={k} ρ={:.2}", rho.unwrap_or(0.0))
                }
            }
        }
    }
    Ok(())
}
