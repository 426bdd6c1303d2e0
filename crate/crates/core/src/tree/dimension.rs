//! Integer dimension-matching maps between one parent value plus an offset and
//! a pair of child values.

/// `(θ − ⌊a/2⌋, θ + ⌈a/2⌉)`.
pub fn delta_map(theta: i64, a: i64) -> (i64, i64) {
    (theta - a.div_euclid(2), theta + (a + 1).div_euclid(2))
}

/// `(⌊(x+y)/2⌋, y − x)`.
pub fn delta_inv(x: i64, y: i64) -> (i64, i64) {
    ((x + y).div_euclid(2), y - x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(delta_map(0, 0), (0, 0));
        assert_eq!(delta_map(5, 3), (4, 7));
        assert_eq!(delta_map(5, -3), (7, 4));
        assert_eq!(delta_inv(4, 7), (5, 3));
        assert_eq!(delta_inv(0, 0), (0, 0));
        assert_eq!(delta_inv(7, 4), (5, -3));
    }

    #[test]
    fn round_trip_and_ball_membership() {
        for theta in -50..=50 {
            for a in -50..=50 {
                let (x, y) = delta_map(theta, a);
                assert_eq!(delta_inv(x, y), (theta, a));
            }
        }
        for m in 1..=5i64 {
            for theta in -10..=10 {
                for a in -2 * m..=2 * m {
                    let (x, y) = delta_map(theta, a);
                    assert!((x - theta).abs() <= m && (y - theta).abs() <= m);
                }
            }
        }
    }
}
