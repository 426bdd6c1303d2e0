use proptest::prelude::*;
use taxicab::tree::{delta_inv, delta_map};

#[test]
fn inverse_is_exact_on_the_grid() {
    for theta in -50..=50 {
        for a in -50..=50 {
            assert_eq!(
                delta_inv(delta_map(theta, a).0, delta_map(theta, a).1),
                (theta, a)
            );
        }
    }
}

#[test]
fn children_stay_in_the_parent_ball() {
    for m in 1..=5i64 {
        for theta in -20..=20 {
            for a in -2 * m..=2 * m {
                let (l, r) = delta_map(theta, a);
                assert!(
                    (l - theta).abs() <= m && (r - theta).abs() <= m,
                    "m={m} θ={theta} a={a}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn map_is_a_bijection(x in -10_000i64..10_000, y in -10_000i64..10_000) {
        let (theta, a) = delta_inv(x, y);
        prop_assert_eq!(delta_map(theta, a), (x, y));
    }
}
