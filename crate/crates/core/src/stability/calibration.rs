//! Induced maps, calibration and comparisons between two spheres.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeBasis;
use crate::moebius::Rotation3;
use crate::s2field::{analyze, eval_at, ScalarField};
use crate::stability::distance::tangent;
use crate::stability::{nearest_rotation, SphereMap};
use crate::tolerance::Tolerances;
use crate::uniformize::UniformizationResult;

/// Step of the finite-difference tangent pushforward at N.
const TANGENT_STEP: f64 = 1e-4;

/// Base point N and unit tangent direction v at N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFrame {
    n: [f64; 3],
    v: [f64; 3],
}

impl Default for CalibrationFrame {
    /// N = (0, 0, 1), v = (1, 0, 0).
    fn default() -> Self {
        Self { n: [0.0, 0.0, 1.0], v: [1.0, 0.0, 0.0] }
    }
}

impl CalibrationFrame {
    /// Validates |N| = |v| = 1 and v·N = 0 to 10⁻¹².
    ///
    /// # Errors
    /// [`Error::Domain`] otherwise.
    pub fn new(n: Vector3<f64>, v: Vector3<f64>) -> Result<Self> {
        if !((n.norm() - 1.0).abs() <= 1e-12 && (v.norm() - 1.0).abs() <= 1e-12 && n.dot(&v).abs() <= 1e-12) {
            return Err(Error::Domain("calibration frame needs unit N, unit v and v·N = 0".into()));
        }
        Ok(Self { n: n.into(), v: v.into() })
    }

    /// Base point N.
    pub fn n(&self) -> Vector3<f64> {
        Vector3::from(self.n)
    }

    /// Direction v.
    pub fn v(&self) -> Vector3<f64> {
        Vector3::from(self.v)
    }

    /// The frame (RN, Rv).
    pub fn rotated(&self, r: &Rotation3) -> Self {
        Self { n: r.apply(&self.n()).into(), v: r.apply(&self.v()).into() }
    }
}

/// Ψ̂ = phi₂⁻¹ ∘ Ψ ∘ phi₁ as an exact composition.
///
/// # Errors
/// [`Error::Representation`] when `psi` is sampled.
pub fn induced_map(res1: &UniformizationResult, psi: &SphereMap, res2: &UniformizationResult) -> Result<SphereMap> {
    res2.phi.inverse()?.compose(psi)?.compose(&res1.phi)
}

/// Pushforward of the frame by `m`: image n' of N, normalized tangential
/// image w' of v, and the orientation sign of m at N.
fn pushed_frame(m: &SphereMap, frame: &CalibrationFrame) -> Result<(Vector3<f64>, Vector3<f64>, f64)> {
    let (n, v) = (frame.n(), frame.v());
    let np = m.apply(&n)?;
    let wraw = tangent(m, &n, &v, TANGENT_STEP)?;
    let wp = wraw - np * np.dot(&wraw);
    if !(wp.norm() >= 1e-6) {
        return Err(Error::Calibration(format!("tangent pushforward degenerate (|w'| = {:.3e})", wp.norm())));
    }
    let wp = wp.normalize();
    let up = tangent(m, &n, &n.cross(&v), TANGENT_STEP)?;
    let sigma = if wp.cross(&up).dot(&np) >= 0.0 { 1.0 } else { -1.0 };
    Ok((np, wp, sigma))
}

/// The unique O ∈ O(3) such that Ψ̂ = O∘Ψ̂' fixes N, maps v to a positive
/// multiple of v and preserves orientation at N, where Ψ̂' is the induced
/// map. Replace phi₂ by phi₂∘O⁻¹ (see [`UniformizationResult::rotated`]) to
/// obtain the calibrated pair.
///
/// # Errors
/// [`Error::Calibration`] when Ψ̂' is farther than 0.3 from every rotation
/// or its tangent pushforward degenerates.
pub fn calibrate(
    res1: &UniformizationResult,
    psi: &SphereMap,
    res2: &UniformizationResult,
    frame: &CalibrationFrame,
) -> Result<Rotation3> {
    let psi_hat = induced_map(res1, psi, res2)?;
    let (_, dist) = nearest_rotation(&psi_hat, res1.u.grid())?;
    if !(dist <= 0.3) {
        return Err(Error::Calibration(format!("induced map is {dist:.3} from every rotation (limit 0.3)")));
    }
    let (np, wp, sigma) = pushed_frame(&psi_hat, frame)?;
    let (n, v) = (frame.n(), frame.v());
    let target = Matrix3::from_columns(&[n, v, n.cross(&v) * sigma]);
    let source = Matrix3::from_columns(&[np, wp, np.cross(&wp)]);
    Ok(Rotation3::from_matrix_projected(target * source.transpose()))
}

/// Calibration defect of a map: |Ψ̂(N) − N| + |ŵ − v| (ŵ the normalized
/// tangential image of v), plus 2 when orientation at N is reversed.
///
/// # Errors
/// As for the tangent pushforward.
pub fn calibration_defect(psi_hat: &SphereMap, frame: &CalibrationFrame) -> Result<f64> {
    let (np, wp, sigma) = pushed_frame(psi_hat, frame)?;
    let orient = if sigma > 0.0 { 0.0 } else { 2.0 };
    Ok((np - frame.n()).norm() + (wp - frame.v()).norm() + orient)
}

/// ‖u₁ − u₂∘Ψ̂‖∞ over the nodes of u₁'s grid.
///
/// # Errors
/// Representation errors from sampling Ψ̂.
pub fn compare_conformal_factors(u1: &ScalarField, u2: &ScalarField, psi_hat: &SphereMap) -> Result<f64> {
    let images = psi_hat.images_on(u1.grid())?;
    let u2m = eval_at(&analyze(u2), &images)?;
    Ok(u1.values().iter().zip(&u2m).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs())))
}

/// max over p and nodes of |J₁^{(p)} − J₂^{(p)}∘Ψ|.
///
/// # Errors
/// Representation errors from sampling Ψ or evaluating the second basis.
pub fn compare_modes(b1: &ModeBasis, psi: &SphereMap, b2: &ModeBasis) -> Result<f64> {
    let images = psi.images_on(b1.grid())?;
    let j2 = b2.eval_at(&images)?;
    let mut worst = 0.0_f64;
    for p in 0..3 {
        for (a, b) in b1.fields[p].values().iter().zip(&j2[p]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Calibration defect of (phi₂, phi₃) relative to Ψ₂₃ = Ψ₁₃∘Ψ₁₂⁻¹, given
/// (phi₁, phi₂) calibrated for Ψ₁₂ and (phi₁, phi₃) calibrated for Ψ₁₃.
///
/// # Errors
/// Representation errors when a map is sampled.
pub fn transitivity_check(
    res1: &UniformizationResult,
    res2: &UniformizationResult,
    res3: &UniformizationResult,
    psi12: &SphereMap,
    psi13: &SphereMap,
    frame: &CalibrationFrame,
) -> Result<f64> {
    let _ = res1;
    let psi23 = psi13.compose(&psi12.inverse()?)?;
    calibration_defect(&induced_map(res2, &psi23, res3)?, frame)
}

/// Summary of the comparison of two uniformized spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Metric distance d relative to Ψ.
    pub distance: f64,
    /// Nearest orthogonal map to the (uncalibrated) induced map.
    pub rotation: Rotation3,
    /// max |Ψ̂' − O| of the uncalibrated induced map.
    pub psi_hat_defect: f64,
    /// ‖u₁ − u₂∘Ψ̂'‖∞ (uncalibrated).
    pub u_gap: f64,
    /// Mode gap (uncalibrated).
    pub mode_gap: f64,
}

/// Values after calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedReport {
    /// Calibrating rotation O.
    pub rotation: Rotation3,
    /// max |Ψ̂ − I| after calibration.
    pub psi_hat_defect: f64,
    /// ‖u₁ − u₂∘Ψ̂‖∞ after calibration.
    pub u_gap: f64,
    /// Mode gap after calibration.
    pub mode_gap: f64,
    /// Calibration defect of Ψ̂ (should vanish).
    pub calibration_defect: f64,
}

/// Builds the uncalibrated comparison report.
///
/// # Errors
/// Propagates distance, fit and mode errors.
pub fn compare_report(
    g1: &crate::s2field::ConformalMetric,
    res1: &UniformizationResult,
    psi: &SphereMap,
    g2: &crate::s2field::ConformalMetric,
    res2: &UniformizationResult,
    tol: &Tolerances,
) -> Result<StabilityReport> {
    let distance = crate::stability::metric_distance(g1, psi, g2)?;
    let psi_hat = induced_map(res1, psi, res2)?;
    let grid = res1.u.grid();
    let (rotation, psi_hat_defect) = nearest_rotation(&psi_hat, grid)?;
    let u_gap = compare_conformal_factors(&res1.u, &res2.u, &psi_hat)?;
    let b1 = crate::modes::canonical_modes(res1, tol)?;
    let b2 = crate::modes::canonical_modes(res2, tol)?;
    let mode_gap = compare_modes(&b1, psi, &b2)?;
    Ok(StabilityReport { distance, rotation, psi_hat_defect, u_gap, mode_gap })
}

/// Calibrates (res1, res2) relative to Ψ and reports the calibrated gaps.
///
/// # Errors
/// Propagates calibration and comparison errors.
pub fn calibrated_report(
    res1: &UniformizationResult,
    psi: &SphereMap,
    res2: &UniformizationResult,
    frame: &CalibrationFrame,
    tol: &Tolerances,
) -> Result<(UniformizationResult, CalibratedReport)> {
    let o = calibrate(res1, psi, res2, frame)?;
    let res2c = res2.rotated(&o);
    let psi_hat = induced_map(res1, psi, &res2c)?;
    let grid = res1.u.grid();
    let psi_hat_defect = crate::stability::distance_to_identity(&psi_hat, grid)?;
    let u_gap = compare_conformal_factors(&res1.u, &res2c.u, &psi_hat)?;
    let b1 = crate::modes::canonical_modes(res1, tol)?;
    let b2 = crate::modes::canonical_modes(&res2c, tol)?;
    let mode_gap = compare_modes(&b1, psi, &b2)?;
    let calibration_defect = calibration_defect(&psi_hat, frame)?;
    Ok((res2c, CalibratedReport { rotation: o, psi_hat_defect, u_gap, mode_gap, calibration_defect }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_validation_and_rotation() {
        assert!(CalibrationFrame::new(Vector3::z(), Vector3::z()).is_err());
        let f = CalibrationFrame::default();
        let r = Rotation3::axis_angle(Vector3::y(), 0.5).unwrap();
        let fr = f.rotated(&r);
        assert!((fr.n() - r.apply(&Vector3::z())).norm() < 1e-15);
    }

    #[test]
    fn defect_of_rotations() {
        let f = CalibrationFrame::default();
        assert!(calibration_defect(&SphereMap::identity(), &f).unwrap() < 1e-12);
        let r = Rotation3::axis_angle(Vector3::z(), 0.3).unwrap();
        assert!(calibration_defect(&SphereMap::rotation(&r), &f).unwrap() > 0.2);
        let refl = Rotation3::conjugation();
        // F fixes N and v but reverses orientation.
        assert!((calibration_defect(&SphereMap::rotation(&refl), &f).unwrap() - 2.0).abs() < 1e-9);
    }
}
