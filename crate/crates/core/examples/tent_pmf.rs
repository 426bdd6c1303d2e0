//! Tent pmfs: mass layout, tail rate and sampling.
//!
//! ```text
//! cargo run --example tent_pmf
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taxicab::distributions::{effective_scale, TentParams};
use taxicab::experiments::plot::REFERENCE_TENTS;

fn main() -> taxicab::Result<()> {
    for (lambda, k_eff, t) in REFERENCE_TENTS {
        let tent = TentParams::new(lambda, k_eff, t)?;
        let body: f64 = (lambda - k_eff as i64..=lambda + k_eff as i64)
            .map(|y| tent.pmf(y))
            .sum();
        println!(
            "P_{t}({lambda},{k_eff}): p(λ)={:.4} tent mass={body:.4} tail rate={:?}",
            tent.pmf(lambda),
            tent.p_star()
        );
        let row: Vec<String> = (-10..=10).map(|y| format!("{:.3}", tent.pmf(y))).collect();
        println!("  y=-10..10: {}", row.join(" "));
    }

    // The likelihood uses the raw scale k through ⌊e^k⌋.
    let tent = TentParams::new(20, effective_scale(2), 0.025)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<i64> = (0..20).map(|_| tent.sample(&mut rng)).collect();
    println!("20 draws from P_0.025(20, ⌊e²⌋ = 7): {draws:?}");
    Ok(())
}
