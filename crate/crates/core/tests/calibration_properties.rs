use proptest::prelude::*;
use taxicab::calibration::{
    hellinger_to_tent, kappa_candidates, kappa_exponent, kappa_from_k, quantile, KappaBranch,
};
use taxicab::distributions::TentParams;
use taxicab::metrics::EmpiricalPmf;

proptest! {
    #[test]
    fn candidates_follow_their_branch(gap in -5.0f64..400.0, d_hat in 0.0f64..4.0) {
        let (branch, set) = kappa_candidates(gap, d_hat);
        prop_assert!(!set.is_empty());
        prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
        let e = |k: u64| (kappa_exponent(k, d_hat) as f64).exp();
        match branch {
            KappaBranch::Bernoulli => {
                prop_assert!(gap <= 1.0);
                prop_assert_eq!(set, vec![0, 1]);
            }
            KappaBranch::Bracket => {
                prop_assert!(set.iter().all(|&k| gap <= e(k) && e(k) < gap + 1.0));
            }
            KappaBranch::Boundary => {
                prop_assert!(set.iter().all(|&k| !(gap <= e(k) && e(k) < gap + 1.0)));
                prop_assert!(set.iter().any(|&k| e(k) < gap + 1.0));
                prop_assert!(set.iter().any(|&k| e(k) >= gap + 1.0));
            }
        }
    }

    #[test]
    fn kappa_from_k_is_the_smallest_preimage(k in 0i64..12, d_hat in 0.0f64..3.0) {
        let kappa = kappa_from_k(k, d_hat);
        prop_assert_eq!(kappa_exponent(kappa, d_hat), k);
        prop_assert!(kappa == 0 || kappa_exponent(kappa - 1, d_hat) < k);
    }

    #[test]
    fn quantiles_are_monotone(mut v in prop::collection::vec(-100.0f64..100.0, 1..60), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        v.sort_by(f64::total_cmp);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (ql, qh) = (quantile(&v, lo).unwrap(), quantile(&v, hi).unwrap());
        prop_assert!(ql <= qh);
        prop_assert!(v[0] <= ql && qh <= v[v.len() - 1]);
    }

    #[test]
    fn hellinger_to_tent_is_bounded(ys in prop::collection::vec(-20i64..20, 1..200), k in 0u64..10, t in 0.0f64..0.49) {
        let pmf = EmpiricalPmf::from_samples(ys.iter().copied());
        let h = hellinger_to_tent(&pmf, &TentParams::new(0, k, t).unwrap());
        prop_assert!((0.0..=1.0).contains(&h));
    }
}

#[test]
fn exact_pmf_has_zero_distance() {
    let tent = TentParams::new(0, 2, 0.0).unwrap();
    // y = -2..=2 with weights 1,2,3,2,1 is exactly the t = 0 tent of width 2.
    let mut pmf = EmpiricalPmf::new();
    for (y, c) in [(-2, 1), (-1, 2), (0, 3), (1, 2), (2, 1)] {
        pmf.add_count(y, c);
    }
    assert!(hellinger_to_tent(&pmf, &tent) < 1e-7);
}
