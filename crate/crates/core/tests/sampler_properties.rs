use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taxicab::sampler::{marginal_kernel_matrix, mh_rw_step, tc_step, tc_step_1d, TcState};

proptest! {
    #[test]
    fn kernel_balances_any_target(w in prop::collection::vec(-6.0f64..0.0, 3..12), m in 1u32..4) {
        let states: Vec<i64> = (0..w.len() as i64).collect();
        let k = marginal_kernel_matrix(&states, |x| w[x as usize], m).unwrap();
        prop_assert!(k.detailed_balance_error() < 1e-12);
        prop_assert!(k.stationarity_error() < 1e-12);
        prop_assert!(k.row_sum_error() < 1e-12);
    }

    #[test]
    fn taxicab_moves_at_most_two_radii(seed in 0u64..1000, start in -20i64..20, m in 1u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (next, u) = tc_step_1d(&mut rng, start, m, |x| -(x as f64).abs() / 3.0).unwrap();
        prop_assert!((u - start).abs() <= m as i64);
        prop_assert!((next - u).abs() <= m as i64);
    }

    #[test]
    fn scalar_and_vector_steps_agree(seed in 0u64..1000, start in -10i64..10, m in 1u32..4) {
        let target = |x: i64| -0.2 * (x as f64 - 3.0).powi(2);
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        let (x, u) = tc_step_1d(&mut a, start, m, target).unwrap();
        let s = tc_step(&mut b, &TcState::new(vec![start]), m, &|v: &[i64]| target(v[0])).unwrap();
        prop_assert_eq!((vec![x], vec![u]), (s.lambda, s.u));
    }

    #[test]
    fn mh_stays_in_radius_and_support(seed in 0u64..1000, start in 0i64..10, r in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = |v: &[i64]| if v[0] >= 0 { -(v[0] as f64) } else { f64::NEG_INFINITY };
        let out = mh_rw_step(&mut rng, &[start], r, &target);
        prop_assert!((out.state[0] - start).abs() <= r as i64);
        prop_assert!(out.state[0] >= 0);
        prop_assert_eq!(out.accepted, out.state[0] != start);
    }
}
