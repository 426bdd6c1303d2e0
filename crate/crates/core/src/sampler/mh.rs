use rand::Rng;

use super::{DiscreteTarget, Neighborhood};

/// Result of one random-walk Metropolis-Hastings step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MhOutcome {
    pub state: Vec<i64>,
    pub accepted: bool,
}

/// Proposes uniformly on the ball of the given radius minus the current point
/// and accepts with `min{1, π(λ')/π(λ)}`.
pub fn mh_rw_step<R, T>(rng: &mut R, lambda: &[i64], radius: u32, target: &T) -> MhOutcome
where
    R: Rng + ?Sized,
    T: DiscreteTarget + ?Sized,
{
    let ball = Neighborhood::new(lambda.to_vec(), radius.max(1)).expect("nonempty state");
    let center = ball.center_index();
    let mut index = rng.random_range(0..ball.len() - 1);
    if index >= center {
        index += 1;
    }
    let proposal = ball.point(index);
    let log_ratio = target.log_density(&proposal) - target.log_density(lambda);
    let accepted = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
    if accepted {
        MhOutcome {
            state: proposal,
            accepted,
        }
    } else {
        MhOutcome {
            state: lambda.to_vec(),
            accepted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MultimodalTarget;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_mass_proposals_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let only_zero = |x: &[i64]| if x[0] == 0 { 0.0 } else { f64::NEG_INFINITY };
        for _ in 0..100 {
            let out = mh_rw_step(&mut rng, &[0], 1, &only_zero);
            assert_eq!(out.state, vec![0]);
            assert!(!out.accepted);
        }
    }

    #[test]
    fn flat_target_always_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let flat = |_: &[i64]| 0.0;
        for _ in 0..100 {
            let out = mh_rw_step(&mut rng, &[3, 3], 2, &flat);
            assert!(out.accepted);
            assert_ne!(out.state, vec![3, 3]);
        }
    }

    #[test]
    fn acceptance_rate_from_ten_to_eleven() {
        let tgt = MultimodalTarget::default();
        let log_target = |x: &[i64]| tgt.log_unnorm(x[0]);
        let expected = (tgt.log_unnorm(11) - tgt.log_unnorm(10)).exp().min(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut proposed_up, mut moved_up) = (0usize, 0usize);
        for _ in 0..200_000 {
            let out = mh_rw_step(&mut rng, &[10], 1, &log_target);
            if out.state == vec![11] {
                moved_up += 1;
            }
            proposed_up += 1;
        }
        // Half of the proposals go up; all of those are accepted here.
        let rate = moved_up as f64 / (proposed_up as f64 / 2.0);
        assert!(
            (rate - expected).abs() < 0.01,
            "rate={rate} expected={expected}"
        );
    }
}
