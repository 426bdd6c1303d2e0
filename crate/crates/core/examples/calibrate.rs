//! Choosing the scale-prior location and tail mass from draws of a tent.
//!
//! ```text
//! cargo run --release --example calibrate
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taxicab::calibration::{estimate_depth, kappa_candidates};
use taxicab::experiments::{run_calibration, ExperimentConfig, ExperimentKind};
use taxicab::tree::TreePrior;

fn main() -> taxicab::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Calibrate);
    cfg.data.seed = 1;
    let run = run_calibration(&cfg)?;
    let s = &run.summary;
    println!(
        "{} draws of P_{}({}, ⌊e^{}⌋): t̂={} κ̂={} via {:?} after {} iterations",
        s.n_draws, s.t, s.lambda, s.k, s.t_hat, s.kappa_hat, s.branch, s.iterations
    );

    // Deeper leaves need a larger κ for the same leaf scale.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let depth = estimate_depth(&mut rng, &TreePrior::new(0.95, 2.0)?, 20_000)?;
    let (branch, set) = kappa_candidates(7.0, depth.mean);
    println!(
        "mean leaf depth {:.2}: quantile gap 7 gives {branch:?} {set:?}",
        depth.mean
    );
    Ok(())
}
