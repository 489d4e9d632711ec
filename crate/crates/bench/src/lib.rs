//! Shared fixtures for the benchmark targets.

use tiltcov_core::{NetworkConfig, QuadratureSpec};

/// Sparse network, interferers all on the ground (single height node).
pub fn sparse_ground() -> NetworkConfig {
    NetworkConfig::baseline(1e-6).with_height_weight(0.0)
}

/// Sparse network with the full height mixture (64-node inner rule).
pub fn sparse_mixture() -> NetworkConfig {
    NetworkConfig::baseline(1e-6)
}

/// Dense network with the full height mixture and a high typical user.
pub fn dense_mixture() -> NetworkConfig {
    NetworkConfig::baseline(5e-5).with_h0(10.0)
}

/// The tolerance profile used by parameter sweeps.
pub fn sweep_tolerances() -> QuadratureSpec {
    QuadratureSpec::sweep()
}
