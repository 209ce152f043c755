//! Hawking mass, angular momentum and the leading-order GCM ℓ = 1 balance
//! laws, plus exact Kerr-asymptotic model fields.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{canonical_modes, project_ell1, triple_to_vector, ModeBasis, Provenance};
use crate::moebius::Rotation3;
use crate::s2field::{curl_one_form, integrate, ConformalMetric, GridSpec, OneForm, ScalarField};
use crate::tolerance::Tolerances;
use crate::uniformize::uniformize;

/// Quantities carried by one sphere.
#[derive(Debug, Clone)]
pub struct SphereData {
    /// Intrinsic metric.
    pub metric: ConformalMetric,
    /// κ = tr χ.
    pub kappa: ScalarField,
    /// κ̄ = tr χ̄.
    pub kappa_bar: ScalarField,
    /// β in unit-sphere orthonormal frame components.
    pub beta: OneForm,
    /// Canonical ℓ = 1 modes of the metric.
    pub modes: ModeBasis,
    /// Area radius r^S.
    pub r: f64,
    /// Mass m^S.
    pub m: f64,
}

impl SphereData {
    /// Validates r > 0, m > 0 and canonical modes.
    ///
    /// # Errors
    /// [`Error::Domain`] or [`Error::WrongProvenance`].
    pub fn new(
        metric: ConformalMetric,
        kappa: ScalarField,
        kappa_bar: ScalarField,
        beta: OneForm,
        modes: ModeBasis,
        r: f64,
        m: f64,
    ) -> Result<Self> {
        if !(r > 0.0 && m > 0.0) {
            return Err(Error::Domain(format!("need r^S > 0 and m^S > 0 (got r = {r}, m = {m})")));
        }
        if !matches!(modes.provenance, Provenance::Canonical(_)) {
            return Err(Error::WrongProvenance("sphere data needs canonical modes".into()));
        }
        Ok(Self { metric, kappa, kappa_bar, beta, modes, r, m })
    }
}

/// Inputs of the leading-order GCM ℓ = 1 solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcmInput {
    /// (div β)_{ℓ=1} in (0, +, −) order.
    pub div_beta_modes: [f64; 3],
    /// (κ̌)_{ℓ=1}.
    pub kappa_check_modes: [f64; 3],
    /// (κ̄̌)_{ℓ=1}.
    pub kappa_bar_check_modes: [f64; 3],
    /// r^S.
    pub r: f64,
    /// m^S.
    pub m: f64,
    /// Υ^S = 1 − 2m^S/r^S.
    pub upsilon: f64,
}

impl GcmInput {
    /// Builds an input with Υ computed from r and m.
    pub fn new(div_beta: [f64; 3], kappa_check: [f64; 3], kappa_bar_check: [f64; 3], r: f64, m: f64) -> Self {
        Self {
            div_beta_modes: div_beta,
            kappa_check_modes: kappa_check,
            kappa_bar_check_modes: kappa_bar_check,
            r,
            m,
            upsilon: 1.0 - 2.0 * m / r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.div_beta_modes.iter().chain(&self.kappa_check_modes).chain(&self.kappa_bar_check_modes);
        if !all.chain([self.r, self.m, self.upsilon].iter()).all(|v| v.is_finite()) {
            return Err(Error::Domain("GCM input has non-finite entries".into()));
        }
        if !(self.m > 0.0) || !(self.r > 0.0) {
            return Err(Error::Domain(format!("need m^S > 0 and r^S > 0 (got m = {}, r = {})", self.m, self.r)));
        }
        let ups = 1.0 - 2.0 * self.m / self.r;
        if (self.upsilon - ups).abs() > 1e-12 {
            return Err(Error::Domain(format!("Υ = {} differs from 1 − 2m/r = {ups}", self.upsilon)));
        }
        Ok(())
    }
}

/// Hawking mass m = (r/2)(1 + (1/16π)∫ κ κ̄ dA_g) with r the area radius.
///
/// # Errors
/// [`Error::Shape`] on grid mismatch.
pub fn hawking_mass(kappa: &ScalarField, kappa_bar: &ScalarField, metric: &ConformalMetric) -> Result<f64> {
    let prod = kappa.zip_with(kappa_bar, |a, b| a * b)?;
    let r = metric.area_radius();
    Ok(0.5 * r * (1.0 + integrate(&prod, metric)? / (16.0 * PI)))
}

/// Result of [`angular_momentum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentum {
    /// a^S ≥ 0.
    pub a_s: f64,
    /// Rotation R with R V ∥ e₃ (identity in the degenerate branch).
    pub rotation: Rotation3,
    /// V = (∫curl β J^{(+)}, ∫curl β J^{(−)}, ∫curl β J^{(0)}) as a vector of ℝ³.
    pub v: [f64; 3],
    /// ± projections after relabeling the basis by the rotation.
    pub rotated_pm: [f64; 2],
}

/// a^S = (r^S)³|V|/(8π m^S) from the ℓ = 1 projections of curl β, with the
/// basis rotation that annihilates the ± projections.
///
/// # Errors
/// [`Error::Domain`] for m^S ≤ 0; curl errors for metrics with a precompose.
pub fn angular_momentum(data: &SphereData) -> Result<AngularMomentum> {
    if !(data.m > 0.0) {
        return Err(Error::Domain(format!("m^S = {} must be positive", data.m)));
    }
    let curl = curl_one_form(&data.beta, &data.metric)?;
    let t = project_ell1(&curl, &data.modes, &data.metric)?;
    let v = triple_to_vector(&t);
    let scale = 8.0 * PI * data.m / data.r.powi(3);
    if v.norm() <= 1e-12 * scale {
        return Ok(AngularMomentum { a_s: 0.0, rotation: Rotation3::identity(), v: v.into(), rotated_pm: [0.0; 2] });
    }
    let rotation = Rotation3::between(v, Vector3::z());
    let relabeled = data.modes.relabeled(rotation.matrix());
    let tr = project_ell1(&curl, &relabeled, &data.metric)?;
    Ok(AngularMomentum { a_s: v.norm() / scale, rotation, v: v.into(), rotated_pm: [tr[1], tr[2]] })
}

/// Kerr model β with physical orthonormal component β_φ̂ = 3am sinθ/r⁴
/// about the axis `axis` (e₃ by default); stored in unit-sphere frame
/// components, i.e. multiplied by r.
pub fn kerr_model_beta_about(a: f64, m: f64, r: f64, grid: &GridSpec, axis: &Vector3<f64>) -> OneForm {
    let c = 3.0 * a * m / r.powi(3);
    let n = axis.normalize();
    OneForm::from_ambient(grid, |x| n.cross(&x) * c)
}

/// [`kerr_model_beta_about`] for the x³ axis.
pub fn kerr_model_beta(a: f64, m: f64, r: f64, grid: &GridSpec) -> OneForm {
    kerr_model_beta_about(a, m, r, grid, &Vector3::z())
}

/// Result of [`gcm_leading_solve`], triples in (0, +, −) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcmSolution {
    /// Λ.
    pub lambda: [f64; 3],
    /// Λ̄.
    pub lambda_bar: [f64; 3],
}

/// Leading-order ℓ = 1 GCM solve:
/// Λ = (r³/3m)(div β)_{ℓ=1}, Λ̄ = ΥΛ + (r/3m)(Υ(κ̌)_{ℓ=1} − (κ̄̌)_{ℓ=1}).
///
/// # Errors
/// [`Error::Domain`] for m ≤ 0, non-finite entries or inconsistent Υ.
pub fn gcm_leading_solve(input: &GcmInput) -> Result<GcmSolution> {
    input.validate()?;
    let (r, m, ups) = (input.r, input.m, input.upsilon);
    let mut lambda = [0.0; 3];
    let mut lambda_bar = [0.0; 3];
    for p in 0..3 {
        lambda[p] = r.powi(3) / (3.0 * m) * input.div_beta_modes[p];
        lambda_bar[p] =
            ups * lambda[p] + r / (3.0 * m) * (ups * input.kappa_check_modes[p] - input.kappa_bar_check_modes[p]);
    }
    Ok(GcmSolution { lambda, lambda_bar })
}

/// Profile coefficients of the Kerr expansions
/// κ̌ = a₀²/r³ (c₁ + c₂ cos²θ) + c₃ m₀a₀²/r⁴ cos θ (and likewise for κ̄̌).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrProfile {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub cb1: f64,
    pub cb2: f64,
    pub cb3: f64,
}

impl Default for KerrProfile {
    fn default() -> Self {
        Self { c1: 1.0, c2: -3.0, c3: 0.0, cb1: -1.0, cb2: 3.0, cb3: 0.0 }
    }
}

/// Model fields (κ̌, κ̄̌). The even part has vanishing ℓ = 1 projections;
/// the optional cos θ remainder (c₃, c̄₃) realizes the next order.
pub fn kerr_model_expansions(a0: f64, m0: f64, r: f64, grid: &GridSpec, p: &KerrProfile) -> (ScalarField, ScalarField) {
    let lead = a0 * a0 / r.powi(3);
    let rem = m0 * a0 * a0 / r.powi(4);
    let k = ScalarField::from_fn(grid, |x| lead * (p.c1 + p.c2 * x.z * x.z) + rem * p.c3 * x.z);
    let kb = ScalarField::from_fn(grid, |x| lead * (p.cb1 + p.cb2 * x.z * x.z) + rem * p.cb3 * x.z);
    (k, kb)
}

/// Kerr-model sphere of area radius r about `axis`: round metric, canonical
/// modes, κ = 2/r + κ̌, κ̄ = −2Υ/r + κ̄̌ with the profile `p`, and the model β.
///
/// # Errors
/// [`Error::Domain`] for r ≤ 0 or m ≤ 0; uniformization errors propagate.
pub fn kerr_model_sphere(
    a: f64,
    m: f64,
    r: f64,
    grid: &GridSpec,
    axis: &Vector3<f64>,
    p: &KerrProfile,
    tol: &Tolerances,
) -> Result<SphereData> {
    if !(r > 0.0 && m > 0.0 && a.is_finite()) || axis.norm() == 0.0 {
        return Err(Error::Domain(format!("Kerr model needs r > 0, m > 0, finite a and an axis (r = {r}, m = {m})")));
    }
    let metric = ConformalMetric::round(grid, r)?;
    let modes = canonical_modes(&uniformize(&metric, tol)?, tol)?;
    let (kc, kbc) = kerr_model_expansions(a, m, r, grid, p);
    let (k0, kb0) = schwarzschild_expansions(m, r, grid);
    let kappa = k0.zip_with(&kc, |x, y| x + y)?;
    let kappa_bar = kb0.zip_with(&kbc, |x, y| x + y)?;
    let beta = kerr_model_beta_about(a, m, r, grid, axis);
    SphereData::new(metric, kappa, kappa_bar, beta, modes, r, m)
}

/// Schwarzschild values κ = 2/r, κ̄ = −2(1 − 2M/r)/r on a grid.
pub fn schwarzschild_expansions(mass: f64, r: f64, grid: &GridSpec) -> (ScalarField, ScalarField) {
    (ScalarField::constant(grid, 2.0 / r), ScalarField::constant(grid, -2.0 * (1.0 - 2.0 * mass / r) / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;

    #[test]
    fn schwarzschild_mass() {
        let g = make_grid(8).unwrap();
        for ratio in [3.0, 10.0, 100.0] {
            let r = 2.0 * ratio;
            let metric = ConformalMetric::round(&g, r).unwrap();
            let (k, kb) = schwarzschild_expansions(2.0, r, &g);
            assert!((hawking_mass(&k, &kb, &metric).unwrap() - 2.0).abs() < 1e-12 * 2.0);
        }
    }

    #[test]
    fn kerr_sphere_recovers_a() {
        let g = make_grid(16).unwrap();
        let tol = Tolerances::default();
        let d = kerr_model_sphere(0.1, 1.0, 100.0, &g, &Vector3::z(), &KerrProfile::default(), &tol).unwrap();
        let am = angular_momentum(&d).unwrap();
        assert!((am.a_s - 0.1).abs() < 1e-9, "{}", am.a_s);
        assert!(am.rotated_pm.iter().all(|v| v.abs() < 1e-9 * triple_to_vector(&am.v).norm()));
    }

    #[test]
    fn gcm_hand_computation() {
        let s = gcm_leading_solve(&GcmInput::new([0.0, 0.0, 2.0], [0.0; 3], [0.0; 3], 10.0, 1.0)).unwrap();
        assert!((s.lambda[2] - 2000.0 / 3.0).abs() < 1e-12);
        assert!((s.lambda_bar[2] - 0.8 * 2000.0 / 3.0).abs() < 1e-12);
        assert!(gcm_leading_solve(&GcmInput::new([0.0; 3], [0.0; 3], [0.0; 3], 10.0, -1.0)).is_err());
    }
}
