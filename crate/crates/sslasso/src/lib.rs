//! Sparse linear regression with the spike-and-slab LASSO.
//!
//! The coefficient prior is a mixture of two Laplace densities: a sharp
//! spike absorbing negligible coefficients and a diffuse slab holding the
//! large ones, with the mixing proportion learned from the data. The
//! posterior mode is exactly sparse, so fitting performs selection and
//! estimation in one pass, and the mixture gears the shrinkage per
//! coefficient: near-maximal for small values, near-zero for large ones.
//!
//! What's here:
//!
//! * [`data`] — CSV ingestion, centering/standardization to the squared-norm-
//!   `n` column convention, and raw-scale back-transformation.
//! * [`penalty`] — the adaptive penalty calculus (inclusion probabilities,
//!   adaptive rates, selection thresholds), all in log-space arithmetic.
//! * [`solver`] — coordinate ascent with generalized soft/hard thresholding
//!   and an EM variant, both driven along an increasing spike-rate ladder
//!   with warm starts and variance freezing.
//! * [`inference`] — debiasing of the mode and asymptotic pointwise
//!   confidence intervals via exact-inverse or nodewise precision estimates.
//! * [`sim`], [`metrics`], [`bench`] — a seeded synthetic benchmark harness
//!   with block-correlated Gaussian designs and selection/estimation
//!   metrics against a cross-validated single-rate baseline.
//! * [`cli`] — the file-producing commands behind the `sslasso` binary.
//!
//! The `examples/` directory has one runnable program per capability; start
//! with `cargo run --example quickstart`.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod inference;
pub mod lasso;
pub mod metrics;
pub mod penalty;
pub mod sim;
pub mod solver;

pub use bench::{run_benchmark, BenchmarkReport, SolverChoice};
pub use data::{destandardize, load_dataset, standardize, RawDataset, StandardizedDesign};
pub use error::{Error, Result};
pub use inference::{
    confidence_intervals, debias, precision_estimate, IntervalTable, PrecisionEstimate,
    PrecisionMethod,
};
pub use metrics::{confusion, metrics, ConfusionCounts, MetricsReport};
pub use penalty::{
    g_fn, lambda_star, pen_singleton, pstar, threshold_delta, PenaltyContext, SslHyperParams,
    VarianceMode,
};
pub use sim::{gen_design, gen_response, Preset, SimConfig};
pub use solver::{em_fit, fit_at_rung, fit_path, FitPath, FitSettings, SolverState, ThetaMode};
