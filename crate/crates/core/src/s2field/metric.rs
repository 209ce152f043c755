//! Conformal metrics g = φ^#((r^S)² e^{2w} γ₀) on the sphere.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::moebius::Diffeo;
use crate::s2field::field::{ScalarField, SpectralCoeffs};
use crate::s2field::grid::GridSpec;
use crate::s2field::transform::{analyze, eval_unchecked};

/// Metric on a topological sphere whose nodes are the points `y` of a grid.
///
/// The conformal factor `w` is a field on the *conformal chart*: the metric
/// is g = φ^#((r^S)² e^{2w} γ₀), where φ is the optional precomposed
/// diffeomorphism (identity when absent). Without a precompose the physical
/// sphere and the chart coincide and g = (r^S)² e^{2w} γ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    radius: f64,
    w: ScalarField,
    w_coeffs: SpectralCoeffs,
    precompose: Option<Diffeo>,
}

/// Accuracy demanded of the declared inverse of a precompose.
const PRECOMPOSE_ROUNDTRIP_TOL: f64 = 1e-10;

impl ConformalMetric {
    /// Validates and builds a metric.
    ///
    /// # Errors
    /// [`Error::Domain`] for r ≤ 0 or a precompose whose declared inverse
    /// fails to invert it on the grid nodes to 10⁻¹⁰.
    pub fn new(radius: f64, w: ScalarField, precompose: Option<Diffeo>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        if let Some(phi) = &precompose {
            let inv = phi.inverse();
            let grid = w.grid();
            for i in 0..grid.len() {
                let x = grid.node(i);
                let err = (inv.apply(&phi.apply(&x)) - x).norm();
                if !(err <= PRECOMPOSE_ROUNDTRIP_TOL) {
                    return Err(Error::Domain(format!("precompose inverse defect {err:.3e} at node {i}")));
                }
            }
        }
        let w_coeffs = analyze(&w);
        Ok(Self { radius, w, w_coeffs, precompose })
    }

    /// Round metric of radius `r` on `grid`.
    ///
    /// # Errors
    /// [`Error::Domain`] for r ≤ 0.
    pub fn round(grid: &GridSpec, radius: f64) -> Result<Self> {
        Self::new(radius, ScalarField::constant(grid, 0.0), None)
    }

    /// The radius parameter r^S.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Conformal factor w on the conformal chart.
    pub fn conformal_factor(&self) -> &ScalarField {
        &self.w
    }

    /// Harmonic coefficients of w.
    pub fn w_coeffs(&self) -> &SpectralCoeffs {
        &self.w_coeffs
    }

    /// Declared precompose, if any.
    pub fn precompose(&self) -> Option<&Diffeo> {
        self.precompose.as_ref()
    }

    /// Grid of the samples.
    pub fn grid(&self) -> &GridSpec {
        self.w.grid()
    }

    /// Copy with a different precompose (same w and radius).
    ///
    /// # Errors
    /// As for [`ConformalMetric::new`].
    pub fn with_precompose(&self, precompose: Option<Diffeo>) -> Result<Self> {
        Self::new(self.radius, self.w.clone(), precompose)
    }

    /// Chart position φ(y) of a physical point.
    pub fn to_chart(&self, y: &Vector3<f64>) -> Vector3<f64> {
        match &self.precompose {
            Some(phi) => phi.apply(y),
            None => *y,
        }
    }

    /// Area weights dA_g at the physical grid nodes: (r^S)² e^{2w(φ(y))}
    /// |det dφ(y)| times the quadrature weight.
    pub fn area_weights(&self) -> Vec<f64> {
        let grid = self.grid();
        let r2 = self.radius * self.radius;
        match &self.precompose {
            None => (0..grid.len()).map(|i| r2 * (2.0 * self.w.values()[i]).exp() * grid.weight(i)).collect(),
            Some(phi) => {
                let nodes = grid.nodes();
                let images: Vec<_> = nodes.iter().map(|y| phi.apply(y)).collect();
                let w_at = eval_unchecked(&self.w_coeffs, &images);
                (0..grid.len())
                    .map(|i| r2 * (2.0 * w_at[i]).exp() * phi.jacobian_det(&nodes[i]) * grid.weight(i))
                    .collect()
            }
        }
    }

    /// Total area.
    pub fn area(&self) -> f64 {
        crate::linalg::compensated_sum(self.area_weights())
    }

    /// Area radius √(area / 4π).
    pub fn area_radius(&self) -> f64 {
        (self.area() / (4.0 * std::f64::consts::PI)).sqrt()
    }
}
