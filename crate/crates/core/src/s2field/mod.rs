//! Spectral representation and calculus for fields on the unit sphere.

mod calculus;
mod field;
mod grid;
mod legendre;
mod metric;
mod transform;

pub use calculus::{curl_one_form, gauss_curvature, h_s_norm, integrate, integrate_round, MAX_SOBOLEV_ORDER};
pub use field::{lm_index, OneForm, ScalarField, SpectralCoeffs};
pub use grid::{make_grid, GridSpec, MAX_BAND_LIMIT, MIN_BAND_LIMIT};
pub use metric::ConformalMetric;
pub use transform::{analyze, eval_at, gradient_ambient, gradient_frame, laplace_beltrami, resample, synthesize};

pub(crate) use transform::{analyze_values, eval_unchecked};
