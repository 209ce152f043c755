//! Centralized numerical tolerances and iteration limits.

use serde::{Deserialize, Serialize};

/// Tolerance record consulted by the solvers and invariant checks.
///
/// The defaults are the thresholds the toolkit guarantees; callers may relax
/// or tighten individual entries (the CLI exposes `--tol`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest admissible ‖r²K − 1‖∞ accepted by the Liouville solver.
    pub trust_region: f64,
    /// Allowed relative deviation of the total curvature from 4π.
    pub total_curvature: f64,
    /// Newton stopping threshold for the spectral Liouville residual (L²).
    pub liouville_residual: f64,
    /// Maximum Newton iterations for the Liouville solve.
    pub liouville_max_iter: usize,
    /// Stopping threshold for |Θ(t)| in the centering Newton iteration.
    pub centering_theta: f64,
    /// Maximum Newton iterations for centering.
    pub centering_max_iter: usize,
    /// Centre-of-mass norm above which the damped pre-iteration is used.
    pub centering_small_cm: f64,
    /// Damping factor σ of the pre-iteration scale maps.
    pub centering_damping: f64,
    /// Invariant bound on the centre of mass of a uniformization result.
    pub result_cm: f64,
    /// Invariant bound on the Liouville residual of a uniformization result.
    pub result_residual: f64,
    /// Finite-difference step for tangent pushforwards.
    pub tangent_step: f64,
    /// Minimum tangent pushforward length accepted by calibration.
    pub tangent_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trust_region: 0.3,
            total_curvature: 0.01,
            liouville_residual: 1e-11,
            liouville_max_iter: 50,
            centering_theta: 1e-10,
            centering_max_iter: 50,
            centering_small_cm: 0.1,
            centering_damping: 0.5,
            result_cm: 1e-9,
            result_residual: 1e-7,
            tangent_step: 1e-4,
            tangent_min: 1e-6,
        }
    }
}
