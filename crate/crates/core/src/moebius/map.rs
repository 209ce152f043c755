//! Möbius and conjugate-Möbius maps of the sphere in SL(2,ℂ) form.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moebius::rotation::Rotation3;

type C = Complex64;

/// A point of ℂ ∪ {∞} as a projective pair (z₁ : z₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    pub z1: C,
    pub z2: C,
}

impl ProjectivePoint {
    /// The affine coordinate z₁/z₂, or `None` at infinity.
    pub fn value(&self) -> Option<C> {
        if self.z2.norm() <= 1e-300 * self.z1.norm() || (self.z2 == C::new(0.0, 0.0)) {
            None
        } else {
            Some(self.z1 / self.z2)
        }
    }
}

/// Stereographic coordinate z = (x¹ + i x²)/(1 − x³) of a unit vector; the
/// north pole is the point at infinity. The south pole maps to z = 0.
///
/// Near the north pole the pair is built from w = (x¹ − i x²)/(1 + x³) = 1/z,
/// so no cancellation occurs anywhere on the sphere.
pub fn stereo(x: &Vector3<f64>) -> ProjectivePoint {
    if x.z <= 0.0 {
        ProjectivePoint { z1: C::new(x.x, x.y) / (1.0 - x.z), z2: C::new(1.0, 0.0) }
    } else {
        ProjectivePoint { z1: C::new(1.0, 0.0), z2: C::new(x.x, -x.y) / (1.0 + x.z) }
    }
}

/// Inverse stereographic projection of a projective pair.
pub fn stereo_inv(p: &ProjectivePoint) -> Vector3<f64> {
    let (a, b) = (p.z1.norm_sqr(), p.z2.norm_sqr());
    let n = a + b;
    let q = p.z1 * p.z2.conj() * (2.0 / n);
    Vector3::new(q.re, q.im, (a - b) / n)
}

/// Inverse stereographic projection of a finite coordinate z.
pub fn stereo_inv_z(z: C) -> Vector3<f64> {
    stereo_inv(&ProjectivePoint { z1: z, z2: C::new(1.0, 0.0) })
}

/// Normalized spinor (z₁, z₂) of a unit vector.
fn spinor(x: &Vector3<f64>) -> Vector2<C> {
    let p = stereo(x);
    let n = (p.z1.norm_sqr() + p.z2.norm_sqr()).sqrt();
    Vector2::new(p.z1 / n, p.z2 / n)
}

/// Element of the conformal group of the sphere: z ↦ (a z + b)/(c z + d),
/// or (a z̄ + b)/(c z̄ + d) when `conjugate` is set, with ad − bc = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    matrix: Matrix2<C>,
    conjugate: bool,
}

/// Tolerance on |det − 1| accepted by [`MoebiusMap::new`].
const DET_TOL: f64 = 1e-12;

impl MoebiusMap {
    /// Builds a map from a unimodular matrix.
    ///
    /// # Errors
    /// [`Error::Domain`] when |ad − bc − 1| > 10⁻¹².
    pub fn new(a: C, b: C, c: C, d: C, conjugate: bool) -> Result<Self> {
        let det = a * d - b * c;
        if !(det - 1.0).norm().is_finite() || (det - 1.0).norm() > DET_TOL {
            return Err(Error::Domain(format!("det = {det} is not 1")));
        }
        Ok(Self { matrix: Matrix2::new(a, b, c, d), conjugate })
    }

    /// Builds a map from any invertible matrix by dividing by √det.
    ///
    /// # Errors
    /// [`Error::Domain`] for a singular matrix.
    pub fn from_matrix_normalized(m: Matrix2<C>, conjugate: bool) -> Result<Self> {
        let det = m.determinant();
        if det.norm() < 1e-300 || !det.norm().is_finite() {
            return Err(Error::Domain("singular Moebius matrix".into()));
        }
        Ok(Self { matrix: m / det.sqrt(), conjugate })
    }

    /// The identity map.
    pub fn identity() -> Self {
        Self { matrix: Matrix2::identity(), conjugate: false }
    }

    /// The matrix entries (a, b, c, d).
    pub fn entries(&self) -> [C; 4] {
        let m = &self.matrix;
        [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
    }

    /// The SL(2,ℂ) matrix.
    pub fn matrix(&self) -> &Matrix2<C> {
        &self.matrix
    }

    /// True for orientation-reversing maps.
    pub fn is_conjugate(&self) -> bool {
        self.conjugate
    }

    fn act(&self, x: &Vector3<f64>) -> Vector2<C> {
        let s = spinor(x);
        let s = if self.conjugate { s.map(|v| v.conj()) } else { s };
        self.matrix * s
    }

    /// Image of a unit vector.
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let s = self.act(x);
        stereo_inv(&ProjectivePoint { z1: s[0], z2: s[1] })
    }

    /// Inverse map.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.entries();
        let inv = Matrix2::new(d, -b, -c, a);
        if self.conjugate {
            Self { matrix: inv.map(|v| v.conj()), conjugate: true }
        } else {
            Self { matrix: inv, conjugate: false }
        }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        let rhs = if self.conjugate { other.matrix.map(|v| v.conj()) } else { other.matrix };
        Self { matrix: self.matrix * rhs, conjugate: self.conjugate ^ other.conjugate }
    }

    /// Area distortion |det dΦ|(x) relative to the round metric.
    pub fn jacobian_det(&self, x: &Vector3<f64>) -> f64 {
        let s = self.act(x);
        let n2 = s[0].norm_sqr() + s[1].norm_sqr();
        1.0 / (n2 * n2)
    }

    /// Scale map Φ_{p,t}: z ↦ t z in stereographic coordinates that put `p`
    /// at the north pole. Fixes `p` and `−p`; for t > 1 points flow toward `p`.
    ///
    /// # Errors
    /// [`Error::Domain`] for t ≤ 0 or a zero vector `p`.
    pub fn scale(p: &Vector3<f64>, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("scale parameter t = {t} must be positive")));
        }
        if p.norm() == 0.0 || !p.norm().is_finite() {
            return Err(Error::Domain("scale axis must be nonzero".into()));
        }
        let st = t.sqrt();
        let base = Self {
            matrix: Matrix2::new(C::new(st, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0 / st, 0.0)),
            conjugate: false,
        };
        let rp = Self::from_rotation(&Rotation3::between(Vector3::z(), p.normalize()));
        Ok(rp.compose(&base).compose(&rp.inverse()))
    }

    /// The Möbius representative of an orthogonal map: an SU(2) matrix for
    /// proper rotations (lift sign fixed by a nonnegative real trace), and a
    /// conjugate map for reflections.
    pub fn from_rotation(r: &Rotation3) -> Self {
        // With conjugation realized by F = diag(1,−1,1), a reflection R is
        // written R = R' F with R' proper.
        let f = Rotation3::conjugation();
        let (proper, conjugate) = if r.is_proper() { (*r, false) } else { (r.compose(&f), true) };
        // The spinor action realizes x ↦ F R_std(U) F x, where R_std is the
        // usual SU(2) → SO(3) covering map; so lift R_std = F R' F.
        let std_rot = f.compose(&proper).compose(&f);
        let q = nalgebra::UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(
            *std_rot.matrix(),
        ));
        let (mut w, mut v) = (q.w, q.imag());
        if w < 0.0 {
            w = -w;
            v = -v;
        }
        let i = C::new(0.0, 1.0);
        let a = C::new(w, 0.0) - i * v.z;
        let b = -i * v.x - C::new(v.y, 0.0);
        let c = -i * v.x + C::new(v.y, 0.0);
        let d = C::new(w, 0.0) + i * v.z;
        Self::from_matrix_normalized(Matrix2::new(a, b, c, d), conjugate).expect("unit quaternion")
    }

    /// The orthogonal matrix whose columns are the images of e₁, e₂, e₃.
    /// Meaningful for isometric maps (polar parameter t = 1).
    pub fn to_rotation(&self) -> Rotation3 {
        let cols = [self.apply(&Vector3::x()), self.apply(&Vector3::y()), self.apply(&Vector3::z())];
        Rotation3::from_matrix_projected(nalgebra::Matrix3::from_columns(&cols))
    }

    /// Factorization Φ = O₁ ∘ Φ_{N,t} ∘ O₂ with t ≥ 1 and N the north pole.
    ///
    /// # Errors
    /// [`Error::Decomposition`] when the singular-value ratio exceeds 10¹²
    /// (numerically degenerate matrix).
    pub fn polar_decompose(&self) -> Result<PolarDecomposition> {
        let svd = self.matrix.svd(true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::Decomposition("SVD failed".into())),
        };
        let s = svd.singular_values;
        let (mut u, mut vt, mut s1, mut s2) = (u, vt, s[0], s[1]);
        if s1 < s2 {
            // Swap the singular pairs so that s1 ≥ s2.
            u.swap_columns(0, 1);
            vt.swap_rows(0, 1);
            std::mem::swap(&mut s1, &mut s2);
        }
        if !(s2 > 0.0) || s1 / s2 > 1e12 {
            return Err(Error::Decomposition(format!("singular-value ratio {:.3e} too large", s1 / s2)));
        }
        // Rescale to SU(2) factors: A = U Σ V† with det U · det V† = 1.
        let du = u.determinant();
        let root = du.sqrt();
        let u1 = u / root;
        let u2 = vt * root;
        let t = s1 * s1;
        let o1 = Self::from_matrix_normalized(u1, false)?.to_rotation();
        let mut o2 = Self::from_matrix_normalized(u2, false)?.to_rotation();
        if self.conjugate {
            o2 = o2.compose(&Rotation3::conjugation());
        }
        Ok(PolarDecomposition { o1, t, o2 })
    }
}

/// Result of [`MoebiusMap::polar_decompose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition {
    /// Outer rotation (always proper).
    pub o1: Rotation3,
    /// Scale parameter t ≥ 1 of Φ_{N,t}.
    pub t: f64,
    /// Inner orthogonal map (improper for conjugate maps).
    pub o2: Rotation3,
}

impl PolarDecomposition {
    /// Recomposes O₁ ∘ Φ_{N,t} ∘ O₂.
    pub fn recompose(&self) -> MoebiusMap {
        let scale = MoebiusMap::scale(&Vector3::z(), self.t).expect("t > 0");
        MoebiusMap::from_rotation(&self.o1).compose(&scale).compose(&MoebiusMap::from_rotation(&self.o2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sample_points() -> Vec<Vector3<f64>> {
        let mut v = vec![Vector3::z(), -Vector3::z(), Vector3::x()];
        for i in 0..40 {
            let t = 0.37 * i as f64 + 0.1;
            let z = (2.0 * ((i as f64 + 0.5) / 40.0) - 1.0).clamp(-1.0, 1.0);
            let r = (1.0 - z * z).sqrt();
            v.push(Vector3::new(r * t.cos(), r * t.sin(), z));
        }
        v
    }

    #[test]
    fn stereographic_reference_points() {
        assert_eq!(stereo(&-Vector3::z()).value(), Some(c(0.0, 0.0)));
        assert_eq!(stereo(&Vector3::z()).value(), None);
        assert!((stereo_inv_z(c(1.0, 0.0)) - Vector3::x()).norm() < 1e-15);
        for x in sample_points() {
            assert!((stereo_inv(&stereo(&x)) - x).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unimodular_matrix() {
        assert!(MoebiusMap::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), false).is_err());
    }

    #[test]
    fn quarter_turn_has_the_expected_su2_lift() {
        let r = Rotation3::axis_angle(Vector3::z(), FRAC_PI_2).unwrap();
        let m = MoebiusMap::from_rotation(&r);
        let [a, b, cc, d] = m.entries();
        assert!((a - C::from_polar(1.0, FRAC_PI_4)).norm() < 1e-14);
        assert!((d - C::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-14);
        assert!(b.norm() < 1e-14 && cc.norm() < 1e-14);
    }

    #[test]
    fn rotation_lift_reproduces_the_action() {
        let rots = [
            Rotation3::axis_angle(Vector3::new(1.0, 0.0, 0.0), 0.7).unwrap(),
            Rotation3::axis_angle(Vector3::new(0.0, 1.0, 0.0), -1.3).unwrap(),
            Rotation3::axis_angle(Vector3::new(0.2, -0.5, 0.8), 2.9).unwrap(),
            Rotation3::new(nalgebra::Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))).unwrap(),
            Rotation3::axis_angle(Vector3::new(0.3, 0.1, 0.2), 1.0).unwrap().compose(&Rotation3::conjugation()),
        ];
        for r in rots {
            let m = MoebiusMap::from_rotation(&r);
            assert_eq!(m.is_conjugate(), !r.is_proper());
            for x in sample_points() {
                assert!((m.apply(&x) - r.apply(&x)).norm() < 1e-12);
                assert!((m.jacobian_det(&x) - 1.0).abs() < 1e-12);
            }
            assert!(m.to_rotation().distance(&r) < 1e-12);
            if !m.is_conjugate() {
                assert!(m.matrix().trace().re >= 0.0);
            }
        }
    }

    #[test]
    fn scale_map_at_north_pole() {
        let m = MoebiusMap::scale(&Vector3::z(), 2.0).unwrap();
        let y = m.apply(&Vector3::x());
        assert!((y.z - 0.6).abs() < 1e-14 && (y.x - 0.8).abs() < 1e-14);
        assert!((m.jacobian_det(&-Vector3::z()) - 4.0).abs() < 1e-13);
        assert!(MoebiusMap::scale(&Vector3::z(), 0.0).is_err());
        let inv = MoebiusMap::scale(&Vector3::z(), 0.5).unwrap();
        for x in sample_points() {
            assert!((inv.apply(&m.apply(&x)) - x).norm() < 1e-12);
        }
    }

    #[test]
    fn scale_map_fixes_its_axis() {
        let p = Vector3::new(0.3, -0.4, 0.5).normalize();
        let m = MoebiusMap::scale(&p, 3.0).unwrap();
        assert!((m.apply(&p) - p).norm() < 1e-12);
        assert!((m.apply(&-p) + p).norm() < 1e-12);
    }

    #[test]
    fn jacobian_matches_closed_form_for_scaling() {
        // |det dΦ|(z) = t²(1+|z|²)²/(1+t²|z|²)².
        let t: f64 = 1.7;
        let m = MoebiusMap::scale(&Vector3::z(), t).unwrap();
        for x in sample_points().into_iter().filter(|x| x.z < 0.9) {
            let z = stereo(&x).value().unwrap().norm_sqr();
            let exact = t * t * (1.0 + z).powi(2) / (1.0 + t * t * z).powi(2);
            assert!((m.jacobian_det(&x) - exact).abs() < 1e-11 * exact);
        }
    }

    #[test]
    fn conjugate_maps_compose_and_invert() {
        let a = MoebiusMap::from_matrix_normalized(
            Matrix2::new(c(1.0, 0.2), c(0.3, -0.1), c(-0.2, 0.4), c(0.9, 0.0)),
            true,
        )
        .unwrap();
        let b = MoebiusMap::scale(&Vector3::new(1.0, 1.0, 0.0), 1.4).unwrap();
        for x in sample_points() {
            assert!((a.inverse().apply(&a.apply(&x)) - x).norm() < 1e-11);
            assert!((a.compose(&b).apply(&x) - a.apply(&b.apply(&x))).norm() < 1e-11);
            assert!((b.compose(&a).apply(&x) - b.apply(&a.apply(&x))).norm() < 1e-11);
        }
    }

    #[test]
    fn polar_decomposition_recomposes() {
        let maps = [
            MoebiusMap::from_matrix_normalized(
                Matrix2::new(c(1.0, 0.2), c(0.3, -0.1), c(-0.2, 0.4), c(0.9, 0.0)),
                false,
            )
            .unwrap(),
            MoebiusMap::from_matrix_normalized(Matrix2::new(c(0.1, 2.2), c(0.3, 1.1), c(-0.7, 0.4), c(0.2, 0.5)), true)
                .unwrap(),
            MoebiusMap::scale(&Vector3::z(), 3.0).unwrap(),
        ];
        for m in maps {
            let p = m.polar_decompose().unwrap();
            assert!(p.t >= 1.0);
            let r = p.recompose();
            for x in sample_points() {
                assert!((r.apply(&x) - m.apply(&x)).norm() < 1e-9);
            }
        }
        let p = MoebiusMap::scale(&Vector3::z(), 3.0).unwrap().polar_decompose().unwrap();
        assert!((p.t - 3.0).abs() < 1e-12);
        assert!((p.o1.apply(&Vector3::z()) - Vector3::z()).norm() < 1e-12);
        let rot = MoebiusMap::from_rotation(&Rotation3::axis_angle(Vector3::x(), 0.3).unwrap());
        assert!((rot.polar_decompose().unwrap().t - 1.0).abs() < 1e-12);
    }
}
