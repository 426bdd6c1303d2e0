use rand::Rng;

use super::{DiscreteTarget, Neighborhood};
use crate::error::{Error, Result};
use crate::logspace::sample_log_weights;

/// Current parameter and the auxiliary point it was last drawn around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcState {
    pub lambda: Vec<i64>,
    pub u: Vec<i64>,
}

impl TcState {
    pub fn new(lambda: Vec<i64>) -> Self {
        let u = lambda.clone();
        Self { lambda, u }
    }
}

fn check_radius(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Config(
            "taxicab radius must be at least 1 for ergodicity".into(),
        ));
    }
    Ok(())
}

/// Uniform draw from the ball of radius `m` around `lambda`.
pub fn draw_auxiliary<R: Rng + ?Sized>(rng: &mut R, lambda: &[i64], m: u32) -> Result<Vec<i64>> {
    check_radius(m)?;
    let m = m as i64;
    Ok(lambda
        .iter()
        .map(|&c| rng.random_range(c - m..=c + m))
        .collect())
}

/// Exact draw from the target restricted to the ball of radius `m` around `u`.
pub fn tc_slice_draw<R, T>(rng: &mut R, u: &[i64], m: u32, target: &T) -> Result<Vec<i64>>
where
    R: Rng + ?Sized,
    T: DiscreteTarget + ?Sized,
{
    check_radius(m)?;
    let ball = Neighborhood::new(u.to_vec(), m)?;
    let mut point = vec![0; ball.dim()];
    let weights: Vec<f64> = (0..ball.len())
        .map(|i| {
            ball.point_into(i, &mut point);
            target.log_density(&point)
        })
        .collect();
    let index = sample_log_weights(rng, &weights).ok_or_else(|| {
        Error::Invariant(format!(
            "every point within {m} of {u:?} has zero target mass"
        ))
    })?;
    Ok(ball.point(index))
}

/// One auxiliary draw followed by one slice draw; there is no accept/reject.
pub fn tc_step<R, T>(rng: &mut R, state: &TcState, m: u32, target: &T) -> Result<TcState>
where
    R: Rng + ?Sized,
    T: DiscreteTarget + ?Sized,
{
    let u = draw_auxiliary(rng, &state.lambda, m)?;
    let lambda = tc_slice_draw(rng, &u, m, target)?;
    Ok(TcState { lambda, u })
}

/// [`tc_step`] for a scalar parameter without allocating: returns the new
/// value and its auxiliary. Consumes the RNG stream exactly as `tc_step` does.
pub fn tc_step_1d<R, F>(rng: &mut R, lambda: i64, m: u32, log_density: F) -> Result<(i64, i64)>
where
    R: Rng + ?Sized,
    F: Fn(i64) -> f64,
{
    check_radius(m)?;
    let mi = m as i64;
    let u = rng.random_range(lambda - mi..=lambda + mi);
    let mut buf = [0.0; 33];
    let mut heap = Vec::new();
    let side = 2 * m as usize + 1;
    let weights: &mut [f64] = if side <= buf.len() {
        &mut buf[..side]
    } else {
        heap.resize(side, 0.0);
        &mut heap
    };
    for (i, w) in weights.iter_mut().enumerate() {
        *w = log_density(u - mi + i as i64);
    }
    let index = sample_log_weights(rng, weights).ok_or_else(|| {
        Error::Invariant(format!(
            "every point within {m} of {u} has zero target mass"
        ))
    })?;
    Ok((u - mi + index as i64, u))
}

/// Applies a taxicab step to each block in turn, holding the other
/// coordinates at their latest values. `blocks` must partition the coordinates.
pub fn tc_blocked_step<R, T>(
    rng: &mut R,
    lambda: &mut [i64],
    blocks: &[Vec<usize>],
    radii: &[u32],
    target: &T,
) -> Result<()>
where
    R: Rng + ?Sized,
    T: DiscreteTarget + ?Sized,
{
    if blocks.len() != radii.len() {
        return Err(Error::Config(format!(
            "{} blocks but {} radii",
            blocks.len(),
            radii.len()
        )));
    }
    let mut seen = vec![false; lambda.len()];
    for &c in blocks.iter().flatten() {
        if c >= lambda.len() || std::mem::replace(&mut seen[c], true) {
            return Err(Error::Config(format!(
                "block coordinate {c} repeated or out of range"
            )));
        }
    }
    if seen.iter().any(|s| !s) || blocks.iter().any(|b| b.is_empty()) {
        return Err(Error::Config(
            "blocks do not partition the coordinates".into(),
        ));
    }

    let mut full = lambda.to_vec();
    for (block, &m) in blocks.iter().zip(radii) {
        let current: Vec<i64> = block.iter().map(|&c| full[c]).collect();
        let u = draw_auxiliary(rng, &current, m)?;
        let conditional = |sub: &[i64]| {
            let mut x = full.clone();
            for (&c, &v) in block.iter().zip(sub) {
                x[c] = v;
            }
            target.log_density(&x)
        };
        let next = tc_slice_draw(rng, &u, m, &conditional)?;
        for (&c, v) in block.iter().zip(next) {
            full[c] = v;
        }
    }
    lambda.copy_from_slice(&full);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_step_matches_general_step() {
        let target = |x: &[i64]| -((x[0] - 3) as f64).powi(2) / 8.0;
        let mut a = ChaCha8Rng::seed_from_u64(21);
        let mut b = a.clone();
        let mut state = TcState::new(vec![0]);
        let mut x = 0;
        for _ in 0..500 {
            state = tc_step(&mut a, &state, 2, &target).unwrap();
            let (next, u) = tc_step_1d(&mut b, x, 2, |v| target(&[v])).unwrap();
            assert_eq!(
                (vec![next], vec![u]),
                (state.lambda.clone(), state.u.clone())
            );
            x = next;
        }
    }

    #[test]
    fn auxiliary_is_uniform_on_the_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            let u = draw_auxiliary(&mut rng, &[5], 2).unwrap();
            assert!((3..=7).contains(&u[0]));
            counts[(u[0] - 3) as usize] += 1;
        }
        let expected = n as f64 / 5.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 4 degrees of freedom, 0.999 quantile 18.47
        assert!(chi2 < 18.47, "chi2={chi2}");
        assert!(draw_auxiliary(&mut rng, &[0], 0).is_err());
    }

    #[test]
    fn two_dimensional_auxiliary_has_nine_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            seen.insert(draw_auxiliary(&mut rng, &[0, 0], 1).unwrap());
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn slice_on_flat_and_point_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let flat = |_: &[i64]| 0.0;
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let x = tc_slice_draw(&mut rng, &[5], 1, &flat).unwrap();
            counts[(x[0] - 4) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.01);
        }
        let point = |x: &[i64]| if x[0] == 4 { 0.0 } else { f64::NEG_INFINITY };
        for _ in 0..100 {
            assert_eq!(tc_slice_draw(&mut rng, &[5], 1, &point).unwrap(), vec![4]);
        }
        let nowhere = |_: &[i64]| f64::NEG_INFINITY;
        assert!(matches!(
            tc_slice_draw(&mut rng, &[5], 1, &nowhere),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn step_reach_is_two_radii() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let flat = |_: &[i64]| 0.0;
        let state = TcState::new(vec![0]);
        let mut counts = [0usize; 5];
        let n = 200_000;
        for _ in 0..n {
            let next = tc_step(&mut rng, &state, 1, &flat).unwrap();
            assert!(next.lambda[0].abs() <= 2);
            assert!((next.lambda[0] - next.u[0]).abs() <= 1);
            counts[(next.lambda[0] + 2) as usize] += 1;
        }
        // Triangular convolution of two uniform ±1 steps.
        let expected = [1.0, 2.0, 3.0, 2.0, 1.0].map(|v| v / 9.0);
        for (c, e) in counts.iter().zip(expected) {
            assert!((*c as f64 / n as f64 - e).abs() < 0.005);
        }
    }

    #[test]
    fn blocked_step_validates_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let flat = |_: &[i64]| 0.0;
        let mut x = vec![0, 0, 0];
        assert!(
            tc_blocked_step(&mut rng, &mut x, &[vec![0], vec![0, 1, 2]], &[1, 1], &flat).is_err()
        );
        assert!(tc_blocked_step(&mut rng, &mut x, &[vec![0, 1]], &[1], &flat).is_err());
        assert!(tc_blocked_step(&mut rng, &mut x, &[vec![0], vec![1, 2]], &[1], &flat).is_err());
        tc_blocked_step(&mut rng, &mut x, &[vec![2], vec![0, 1]], &[1, 2], &flat).unwrap();
    }

    #[test]
    fn single_block_consumes_the_stream_like_a_plain_step() {
        let target = |x: &[i64]| -((x[0] - 3).abs() as f64) - 0.5 * (x[1] as f64).abs();
        let mut a = ChaCha8Rng::seed_from_u64(8);
        let mut b = ChaCha8Rng::seed_from_u64(8);
        let mut x = vec![0, 0];
        let mut state = TcState::new(vec![0, 0]);
        for _ in 0..100 {
            tc_blocked_step(&mut a, &mut x, &[vec![0, 1]], &[2], &target).unwrap();
            state = tc_step(&mut b, &state, 2, &target).unwrap();
            assert_eq!(x, state.lambda);
        }
    }
}
