//! Orthogonal 3×3 matrices (rotations and reflections).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of O(3): a real orthogonal matrix with determinant ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Rotation3 {
    m: Matrix3<f64>,
}

/// Orthogonality tolerance ‖RᵀR − I‖ (Frobenius).
const ORTHOGONALITY_TOL: f64 = 1e-10;

impl Rotation3 {
    /// Validates orthogonality.
    ///
    /// # Errors
    /// [`Error::Domain`] when ‖RᵀR − I‖ > 10⁻¹⁰.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix3::identity()).norm();
        if !defect.is_finite() || defect > ORTHOGONALITY_TOL {
            return Err(Error::Domain(format!("matrix is not orthogonal (defect {defect:.3e})")));
        }
        Ok(Self { m })
    }

    /// Builds a rotation from a matrix known to be orthogonal up to rounding,
    /// re-orthonormalizing it by polar projection.
    pub(crate) fn from_matrix_projected(m: Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap_or_else(Matrix3::identity), svd.v_t.unwrap_or_else(Matrix3::identity));
        Self { m: u * vt }
    }

    /// The identity.
    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    /// Rotation by `angle` (radians, right-handed) about `axis`.
    ///
    /// # Errors
    /// [`Error::Domain`] for a zero axis.
    pub fn axis_angle(axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("rotation axis must be nonzero".into()));
        }
        let k = axis / n;
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        let m = Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos());
        Ok(Self { m })
    }

    /// The reflection diag(1, −1, 1) realizing complex conjugation z ↦ z̄
    /// in stereographic coordinates.
    pub fn conjugation() -> Self {
        Self { m: Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)) }
    }

    /// Minimal rotation (about a × b) taking unit vector `a` to unit vector
    /// `b`; when `a = −b` the rotation by π about the first axis orthogonal
    /// to `a` among (e₁, e₂) is used.
    pub fn between(a: Vector3<f64>, b: Vector3<f64>) -> Self {
        let (a, b) = (a.normalize(), b.normalize());
        let axis = a.cross(&b);
        let s = axis.norm();
        let c = a.dot(&b);
        if s < 1e-15 {
            if c > 0.0 {
                return Self::identity();
            }
            // Antiparallel: rotate by π about e₁ unless e₁ ∥ a.
            let mut e = Vector3::x();
            if a.cross(&e).norm() < 1e-8 {
                e = Vector3::y();
            }
            let perp = (e - a * a.dot(&e)).normalize();
            return Self::axis_angle(perp, std::f64::consts::PI).expect("nonzero axis");
        }
        Self::axis_angle(axis, s.atan2(c)).expect("nonzero axis")
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Determinant (±1).
    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// True for proper rotations (det = +1).
    pub fn is_proper(&self) -> bool {
        self.det() > 0.0
    }

    /// x ↦ R x.
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.m * x
    }

    /// Inverse (transpose).
    pub fn inverse(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Rotation3) -> Self {
        Self { m: self.m * other.m }
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }

    /// Parses row-major entries.
    ///
    /// # Errors
    /// [`Error::Domain`] when the matrix is not orthogonal.
    pub fn from_row_major(v: [f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&v))
    }

    /// Frobenius distance between matrices.
    pub fn distance(&self, other: &Rotation3) -> f64 {
        (self.m - other.m).norm()
    }
}

impl TryFrom<[f64; 9]> for Rotation3 {
    type Error = Error;
    fn try_from(v: [f64; 9]) -> Result<Self> {
        Self::from_row_major(v)
    }
}

impl From<Rotation3> for [f64; 9] {
    fn from(r: Rotation3) -> Self {
        r.to_row_major()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rejects_non_orthogonal_matrices() {
        assert!(Rotation3::new(Matrix3::identity() * 1.001).is_err());
        assert!(Rotation3::new(Matrix3::identity()).is_ok());
    }

    #[test]
    fn axis_angle_quarter_turn() {
        let r = Rotation3::axis_angle(Vector3::z(), FRAC_PI_2).unwrap();
        assert!((r.apply(&Vector3::x()) - Vector3::y()).norm() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn between_maps_source_to_target() {
        let cases = [
            (Vector3::new(0.3, -0.2, 0.9), Vector3::z()),
            (-Vector3::z(), Vector3::z()),
            (Vector3::z(), Vector3::z()),
            (Vector3::x(), -Vector3::x()),
        ];
        for (a, b) in cases {
            let r = Rotation3::between(a, b);
            assert!((r.apply(&a.normalize()) - b).norm() < 1e-14);
            assert!(r.is_proper());
        }
        // Antiparallel tie-break: π about e₁.
        let r = Rotation3::between(-Vector3::z(), Vector3::z());
        assert!((r.apply(&Vector3::x()) - Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn row_major_roundtrip() {
        let r = Rotation3::axis_angle(Vector3::new(1.0, 2.0, 3.0), 0.4).unwrap();
        assert_eq!(Rotation3::from_row_major(r.to_row_major()).unwrap(), r);
    }
}
