//! Synthetic data, benchmark runners and their output files.

pub mod calibrate;
pub mod config;
pub mod data;
pub mod output;
pub mod plot;
pub mod tree;
pub mod univariate;

pub use calibrate::{run_calibration, CalibrationRun, CalibrationSummary};
pub use config::{ExperimentConfig, ExperimentKind, SamplerChoice};
pub use data::{generate_tree_data, generate_zi_data, quadrant, SyntheticData};
pub use tree::{run_tree_experiment, TreeRun, TreeSummaryRow, TreeTraceRow};
pub use univariate::{
    run_univariate, UnivariateResult, UnivariateRow, UnivariateSummary, VisitRecord,
};
