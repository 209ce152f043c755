//! Effective uniformization of nearly round spheres.
//!
//! The crate is organised in layers:
//!
//! * [`s2field`] — spectral grids, harmonic transforms, integration,
//!   curvature, Sobolev-type norms and curl on the sphere;
//! * [`moebius`] — the conformal group (Möbius maps, rotations, polar
//!   decomposition) and conformal-factor transport;
//! * [`uniformize`] — Onofri functional, Liouville solver, centering and the
//!   uniformization pipeline;
//! * [`modes`] — standard and canonical ℓ = 1 modes;
//! * [`stability`] — comparison and calibration of two uniformizations;
//! * [`gcmgeom`] — Hawking mass, angular momentum and leading-order GCM
//!   balance laws.
//!
//! Shared types are re-exported at the crate root.

pub mod error;
pub mod gcmgeom;
pub mod io;
mod linalg;
pub mod modes;
pub mod moebius;
pub mod random;
pub mod s2field;
pub mod selftest;
pub mod stability;
pub mod tolerance;
pub mod uniformize;

pub use error::{Error, Result};
pub use gcmgeom::{GcmInput, SphereData};
pub use modes::ModeBasis;
pub use moebius::{Diffeo, MoebiusMap, Rotation3};
pub use s2field::{ConformalMetric, GridSpec, OneForm, ScalarField, SpectralCoeffs};
pub use stability::{CalibrationFrame, SphereMap};
pub use tolerance::Tolerances;
pub use uniformize::{CenteringSolve, UniformizationResult};
