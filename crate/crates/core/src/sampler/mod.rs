//! Generic taxicab sampler over integer vectors, the random-walk
//! Metropolis-Hastings baseline, and an exact marginal-kernel oracle for
//! one-dimensional targets.

mod mh;
mod neighborhood;
mod oracle;
mod tc;

pub use mh::{mh_rw_step, MhOutcome};
pub use neighborhood::Neighborhood;
pub use oracle::{marginal_kernel_matrix, KernelMatrix};
pub use tc::{draw_auxiliary, tc_blocked_step, tc_slice_draw, tc_step, tc_step_1d, TcState};

/// An unnormalized log-density over integer vectors; `-inf` outside the support.
pub trait DiscreteTarget {
    fn log_density(&self, x: &[i64]) -> f64;
}

impl<F> DiscreteTarget for F
where
    F: Fn(&[i64]) -> f64,
{
    fn log_density(&self, x: &[i64]) -> f64 {
        self(x)
    }
}
