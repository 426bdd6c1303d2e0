//! Taxicab sampling for discrete parameters, the tent count likelihood, and a
//! single-tree Bayesian count regression model built on both.
//!
//! Modules, bottom up:
//!
//! - [`distributions`]: tent pmf, location and scale priors, multimodal target
//! - [`sampler`]: taxicab and random-walk MH kernels, exact kernel oracle
//! - [`tree`]: tree model, moves, zero inflation, restart driver
//! - [`metrics`]: distances between pmfs, MAE and L2
//! - [`calibration`]: data-driven choice of the scale hyperparameter and tail mass
//! - [`experiments`]: synthetic data, benchmark runners and output files

pub mod calibration;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod logspace;
pub mod metrics;
pub mod sampler;
pub mod tree;

pub use error::{Error, Result};
