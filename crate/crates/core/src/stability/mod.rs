//! Comparison of two nearby spheres: induced maps, metric distance,
//! nearest-rotation extraction, calibration and calibrated comparisons.

mod calibration;
mod distance;
mod procrustes;
mod sphere_map;

pub use calibration::{
    calibrate, calibrated_report, calibration_defect, compare_conformal_factors, compare_modes, compare_report,
    induced_map, transitivity_check, CalibratedReport, CalibrationFrame, StabilityReport,
};
pub use distance::metric_distance;
pub use procrustes::{distance_to_identity, nearest_rotation};
pub use sphere_map::{MapFactor, SphereMap};
