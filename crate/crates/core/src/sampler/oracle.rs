use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;

/// Exact one-step marginal kernel of the taxicab chain on a finite support.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub states: Vec<i64>,
    /// Target normalized over `states`.
    pub pi: Vec<f64>,
    /// Row-stochastic, `q[i][j] = P(λ' = states[j] | λ = states[i])`.
    pub q: Vec<Vec<f64>>,
}

impl KernelMatrix {
    /// Largest `|π_i q_ij − π_j q_ji|`.
    pub fn detailed_balance_error(&self) -> f64 {
        let n = self.states.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.pi[i] * self.q[i][j] - self.pi[j] * self.q[j][i]).abs());
            }
        }
        worst
    }

    /// Largest `|(πq)_j − π_j|`.
    pub fn stationarity_error(&self) -> f64 {
        let n = self.states.len();
        (0..n)
            .map(|j| {
                let flow: f64 = (0..n).map(|i| self.pi[i] * self.q[i][j]).sum();
                (flow - self.pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|Σ_j q_ij − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.q
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Sums the bivariate `(U, λ')` kernel over every auxiliary value that can
/// touch the support:
/// `q_ij = Σ_u (2m+1)^{-1} 1{|u−i| ≤ m} π_j 1{|u−j| ≤ m} / Σ_{s : |u−s| ≤ m} π_s`.
pub fn marginal_kernel_matrix<F>(states: &[i64], log_target: F, m: u32) -> Result<KernelMatrix>
where
    F: Fn(i64) -> f64,
{
    if states.is_empty() {
        return Err(Error::Config(
            "kernel oracle needs a nonempty support".into(),
        ));
    }
    if m == 0 {
        return Err(Error::Config("taxicab radius must be at least 1".into()));
    }
    let mut sorted = states.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != states.len() {
        return Err(Error::Config(
            "kernel oracle support has repeated states".into(),
        ));
    }
    let logs: Vec<f64> = states.iter().map(|&s| log_target(s)).collect();
    if let Some(bad) = logs.iter().position(|l| !l.is_finite()) {
        return Err(Error::Config(format!(
            "target not finite at state {}",
            states[bad]
        )));
    }
    let lse = log_sum_exp(&logs);
    let pi: Vec<f64> = logs.iter().map(|l| (l - lse).exp()).collect();

    let n = states.len();
    let m = m as i64;
    let aux_density = 1.0 / (2 * m + 1) as f64;
    let mut q = vec![vec![0.0; n]; n];
    let lo = sorted[0] - m;
    let hi = sorted[n - 1] + m;
    for u in lo..=hi {
        let members: Vec<usize> = (0..n).filter(|&s| (states[s] - u).abs() <= m).collect();
        if members.is_empty() {
            continue;
        }
        let z: f64 = members.iter().map(|&s| pi[s]).sum();
        for &i in &members {
            for &j in &members {
                q[i][j] += aux_density * pi[j] / z;
            }
        }
    }
    Ok(KernelMatrix {
        states: states.to_vec(),
        pi,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MultimodalTarget;

    #[test]
    fn singleton_support() {
        let k = marginal_kernel_matrix(&[4], |_| 0.0, 1).unwrap();
        assert_eq!(k.q, vec![vec![1.0]]);
        assert!(marginal_kernel_matrix(&[], |_| 0.0, 1).is_err());
    }

    #[test]
    fn flat_rows_are_stochastic() {
        let k = marginal_kernel_matrix(&[0, 1, 2], |_| 0.0, 1).unwrap();
        assert!(k.row_sum_error() < 1e-14);
    }

    #[test]
    fn multimodal_detailed_balance() {
        let tgt = MultimodalTarget::default();
        let states: Vec<i64> = (0..=30).collect();
        for m in 1..=3 {
            let k = marginal_kernel_matrix(&states, |s| tgt.log_unnorm(s), m).unwrap();
            assert!(k.detailed_balance_error() < 1e-12);
            assert!(k.stationarity_error() < 1e-12);
            assert!(k.row_sum_error() < 1e-12);
            let n = states.len();
            for i in 0..n {
                for j in 0..n {
                    let reach = (i as i64 - j as i64).abs() <= 2 * m as i64;
                    assert_eq!(k.q[i][j] > 0.0, reach, "m={m} i={i} j={j}");
                }
            }
        }
    }
}
