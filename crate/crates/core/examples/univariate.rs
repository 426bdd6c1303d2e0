//! Taxicab versus random-walk MH on the two-parity multimodal target.
//!
//! ```text
//! cargo run --release --example univariate [iterations]
//! ```

use taxicab::experiments::{run_univariate, ExperimentConfig, ExperimentKind, SamplerChoice};

fn main() -> taxicab::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Univariate);
    cfg.chains.n_iters = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    cfg.chains.n_chains = 10;
    let res = run_univariate(&cfg)?;

    println!("sampler  iteration      TV      HE  TV(odd)");
    for s in &res.summary {
        println!(
            "{:>7} {:>10} {:>7.4} {:>7.4} {:>8}",
            s.sampler,
            s.iteration,
            s.tv_mean,
            s.hellinger_mean,
            s.tv_odd_mean.map_or("-".into(), |v| format!("{v:.4}"))
        );
    }
    let wins = res
        .final_pairs()
        .iter()
        .filter(|(tc, mh)| {
            matches!((tc.tv_odd, mh.tv_odd), (Some(a), Some(b)) if a < b) || mh.tv_odd.is_none()
        })
        .count();
    println!(
        "TC closer on odd states in {wins}/{} pairs",
        res.final_pairs().len()
    );
    println!(
        "mean largest-state gap (tc - mh): {:.2}",
        res.mean_max_state_gap()
    );
    let tc = res.final_summary(SamplerChoice::Tc).expect("ran");
    println!("TC never rejects; final mean HE {:.4}", tc.hellinger_mean);
    Ok(())
}
