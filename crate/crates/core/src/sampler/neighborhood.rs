use crate::error::{Error, Result};

/// The integer L∞ ball `{u : max_b |u_b − w_b| ≤ m}`.
///
/// Points are enumerated lexicographically by coordinate offset, first
/// coordinate slowest, so index `i` of a fixed ball always names the same point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    center: Vec<i64>,
    radius: u32,
}

impl Neighborhood {
    pub fn new(center: Vec<i64>, radius: u32) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Config(
                "neighborhood of a zero-dimensional point".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[i64] {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `(2m+1)^B`.
    pub fn len(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.center)
                .all(|(a, c)| a.abs_diff(*c) <= self.radius as u64)
    }

    /// Writes the `index`-th point into `out`.
    pub fn point_into(&self, index: usize, out: &mut [i64]) {
        let side = self.side();
        let m = self.radius as i64;
        let mut rem = index;
        for b in (0..self.dim()).rev() {
            out[b] = self.center[b] - m + (rem % side) as i64;
            rem /= side;
        }
    }

    pub fn point(&self, index: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.point_into(index, &mut out);
        out
    }

    /// Index of the center point.
    pub fn center_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_and_order() {
        let n = Neighborhood::new(vec![0, 0], 1).unwrap();
        assert_eq!(n.len(), 9);
        let pts: Vec<_> = n.iter().collect();
        assert_eq!(pts[0], vec![-1, -1]);
        assert_eq!(pts[1], vec![-1, 0]);
        assert_eq!(pts[8], vec![1, 1]);
        assert_eq!(n.point(n.center_index()), vec![0, 0]);
        assert!(pts.iter().all(|p| n.contains(p)));
        assert_eq!(
            Neighborhood::new(vec![5], 2)
                .unwrap()
                .iter()
                .collect::<Vec<_>>(),
            (3..=7).map(|v| vec![v]).collect::<Vec<_>>()
        );
    }

    #[test]
    fn membership_is_symmetric() {
        for w in -3..=3 {
            for u in -6..=6 {
                let a = Neighborhood::new(vec![w], 2).unwrap().contains(&[u]);
                let b = Neighborhood::new(vec![u], 2).unwrap().contains(&[w]);
                assert_eq!(a, b);
            }
        }
    }
}
