//! Onofri functional, Liouville solver, centering and the effective
//! uniformization pipeline.

mod centering;
mod liouville;
mod onofri;
mod pipeline;

pub use centering::{center, centering_jacobian, centering_theta, CenteringSolve};
pub use liouville::{solve_liouville, LiouvilleSolution};
pub use onofri::{center_of_mass, check_onofri, onofri_functional};
pub use pipeline::{uniformize, uniformize_in_gauge, uniqueness_gap, Diagnostics, UniformizationResult};
