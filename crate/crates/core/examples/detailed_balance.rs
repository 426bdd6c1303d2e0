//! Exact one-step kernel of the taxicab chain and its balance errors.
//!
//! ```text
//! cargo run --example detailed_balance
//! ```

use taxicab::distributions::MultimodalTarget;
use taxicab::sampler::marginal_kernel_matrix;

fn main() -> taxicab::Result<()> {
    let target = MultimodalTarget::default();
    let states: Vec<i64> = (0..=30).collect();
    for m in 1..=3 {
        let k = marginal_kernel_matrix(&states, |x| target.log_unnorm(x), m)?;
        println!(
            "m={m}: detailed balance {:.2e}, stationarity {:.2e}, row sums {:.2e}",
            k.detailed_balance_error(),
            k.stationarity_error(),
            k.row_sum_error()
        );
    }
    let k = marginal_kernel_matrix(&states, |x| target.log_unnorm(x), 1)?;
    // From 10 the chain reaches 9..=11 and, through the auxiliary, 8 and 12.
    let row: Vec<String> = (7..=13).map(|j| format!("{j}:{:.4}", k.q[10][j])).collect();
    println!("q(10, ·) = {}", row.join(" "));
    Ok(())
}
