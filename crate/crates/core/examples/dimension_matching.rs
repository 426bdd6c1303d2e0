//! The integer map between a parent value plus offset and two child values.
//!
//! ```text
//! cargo run --example dimension_matching
//! ```

use taxicab::tree::{delta_inv, delta_map};

fn main() {
    let theta = 12;
    println!("θ = {theta}");
    for a in -4..=4 {
        let (l, r) = delta_map(theta, a);
        let back = delta_inv(l, r);
        println!("  a={a:>2} -> children ({l}, {r}) -> back {back:?}");
        assert_eq!(back, (theta, a));
    }

    // With radius m, offsets |a| ≤ 2m keep both children inside the ball.
    let m = 2;
    let inside = (-2 * m..=2 * m).all(|a| {
        let (l, r) = delta_map(theta, a);
        (l - theta).abs() <= m && (r - theta).abs() <= m
    });
    println!("all children within {m} of θ for |a| ≤ {}: {inside}", 2 * m);
}
