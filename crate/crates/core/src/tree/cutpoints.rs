use super::Dataset;
use crate::error::{Error, Result};

/// Equally spaced candidate cutpoints strictly inside each covariate's range.
#[derive(Debug, Clone, PartialEq)]
pub struct CutpointGrid {
    cuts: Vec<Vec<f64>>,
}

impl CutpointGrid {
    /// `zeta` cuts per covariate at `min + j·(max−min)/(ζ+1)`, `j = 1..=ζ`.
    pub fn from_data(data: &Dataset, zeta: usize) -> Result<Self> {
        if zeta == 0 {
            return Err(Error::Config(
                "at least one cutpoint per covariate is required".into(),
            ));
        }
        let mut cuts = Vec::with_capacity(data.p());
        for v in 0..data.p() {
            let col = data.column(v);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(Error::Config(format!(
                    "covariate {v} is constant; no cutpoints"
                )));
            }
            let step = (hi - lo) / (zeta + 1) as f64;
            cuts.push((1..=zeta).map(|j| lo + j as f64 * step).collect());
        }
        Ok(Self { cuts })
    }

    /// Explicit grids; each must be nonempty and strictly increasing.
    pub fn from_values(cuts: Vec<Vec<f64>>) -> Result<Self> {
        if cuts.is_empty() || cuts.iter().any(Vec::is_empty) {
            return Err(Error::Config(
                "every covariate needs at least one cutpoint".into(),
            ));
        }
        if cuts.iter().any(|c| c.windows(2).any(|w| !(w[0] < w[1]))) {
            return Err(Error::Config(
                "cutpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { cuts })
    }

    pub fn p(&self) -> usize {
        self.cuts.len()
    }

    pub fn zeta(&self, v: usize) -> usize {
        self.cuts[v].len()
    }

    pub fn value(&self, v: usize, index: usize) -> f64 {
        self.cuts[v][index]
    }

    /// Total number of (covariate, cut) rules.
    pub fn n_rules(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }

    /// Inverse of the uniform-covariate, uniform-cut rule draw.
    pub fn rule_log_prob(&self, v: usize) -> f64 {
        -((self.p() * self.zeta(v)) as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_interior_and_increasing() {
        let data = Dataset::new(vec![vec![0.0, 10.0, 3.0]], vec![1, 2, 3]).unwrap();
        let g = CutpointGrid::from_data(&data, 4).unwrap();
        assert_eq!(g.zeta(0), 4);
        let vals: Vec<f64> = (0..4).map(|j| g.value(0, j)).collect();
        assert_eq!(vals, vec![2.0, 4.0, 6.0, 8.0]);
        assert!(CutpointGrid::from_data(&data, 0).is_err());
        let flat = Dataset::new(vec![vec![1.0, 1.0]], vec![0, 0]).unwrap();
        assert!(CutpointGrid::from_data(&flat, 3).is_err());
        assert!(CutpointGrid::from_values(vec![vec![1.0, 1.0]]).is_err());
    }
}
