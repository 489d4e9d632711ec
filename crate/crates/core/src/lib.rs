//! Uplink coverage of a 3D-beamforming cellular network with
//! height-distributed users.
//!
//! The crate computes the coverage probability of the typical user under
//! pilot-contamination-limited SIR by deterministic nested quadrature
//! ([`analytic`]), validates it against an independent Poisson-field
//! simulation ([`montecarlo`]), and searches for the coverage-maximizing
//! antenna tilt ([`optimizer`]). [`geometry`] holds the elementary radio
//! primitives shared by all of them.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod optimizer;
pub mod quad;

pub use analytic::{
    assemble_alternating_sum, compensated_sum, coverage_probability, eta, gain_ratio,
    inner_expectation, pgfl_exponent, signed_binomial_coeffs, CoverageResult, QuadratureSpec,
};
pub use error::{Error, Result};
pub use geometry::{
    elevation_angle, nearest_bs_cdf, nearest_bs_pdf, sample_nearest_bs_distance, AntennaPattern,
    HeightModel, NetworkConfig, PathLossModel,
};
pub use montecarlo::{
    estimate_coverage, realize_sir, sample_interferers, sir_linear, McCampaign, McEstimate, McRun,
};
pub use optimizer::{
    optimize_tilt, optimize_tilt_per_threshold, sweep_tilt, sweep_tilt_grid, ThresholdOptimum,
    TiltEvaluator, TiltProfile, TiltSearchSpec,
};
