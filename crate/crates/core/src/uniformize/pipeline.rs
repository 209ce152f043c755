//! The effective-uniformization pipeline.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::moebius::{conformal_factor_compose, Diffeo, MoebiusMap, Rotation3};
use crate::s2field::{
    analyze, eval_at, eval_unchecked, gauss_curvature, integrate_round, synthesize, ConformalMetric, ScalarField,
    SpectralCoeffs,
};
use crate::stability::{nearest_rotation, MapFactor, SphereMap};
use crate::tolerance::Tolerances;
use crate::uniformize::centering::center;
use crate::uniformize::liouville::{check_curvature, grid_residual, newton_chart};
use crate::uniformize::onofri::center_of_mass;

/// Solver diagnostics attached to a [`UniformizationResult`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Grid L² residual of Δ₀u + (r^S)²(K∘phi) e^{2u} − 1.
    pub residual: f64,
    /// |CM[e^{2u}]|.
    pub cm_norm: f64,
    /// max |u − (w_M + log(r/r^S))| over the nodes: the defect of
    /// phi^#g = (r^S)² e^{2u} γ₀.
    pub metric_identity_error: f64,
    /// Newton iterations of the Liouville solve.
    pub newton_iters: usize,
    /// Total GMRES iterations over all Newton steps.
    pub krylov_iters: usize,
    /// Newton iterations of the centering solve.
    pub centering_iters: usize,
    /// Damped pre-iteration steps of the centering (zero in the small regime).
    pub pre_iterations: usize,
    /// Liouville residual after every Newton iterate.
    pub residual_history: Vec<f64>,
    /// ‖(r^S)²K − 1‖∞ of the input.
    pub epsilon: f64,
}

/// A centered uniformization (phi, u) with phi^#g = (r^S)² e^{2u} γ₀.
///
/// `phi` maps the round sphere to the physical sphere and is stored as the
/// exact composition precompose⁻¹ ∘ M, where M is the Möbius map acting on
/// the conformal chart.
#[derive(Debug, Clone)]
pub struct UniformizationResult {
    /// The uniformizing map.
    pub phi: SphereMap,
    /// Its Möbius part M.
    pub moebius: MoebiusMap,
    /// The metric's declared precompose, if any.
    pub precompose: Option<Diffeo>,
    /// Centered conformal factor.
    pub u: ScalarField,
    /// Harmonic coefficients of `u`.
    pub u_coeffs: SpectralCoeffs,
    /// Area radius r^S.
    pub radius: f64,
    /// Solver diagnostics.
    pub diagnostics: Diagnostics,
}

fn compose_phi(precompose: Option<&Diffeo>, m: &MoebiusMap) -> SphereMap {
    let mut factors = Vec::new();
    if let Some(p) = precompose {
        factors.push(MapFactor::Diffeo(p.inverse()));
    }
    factors.push(MapFactor::Moebius(*m));
    SphereMap::Composition(factors)
}

impl UniformizationResult {
    /// Reassembles a result from its stored parts; phi and the spectral
    /// coefficients of u are rebuilt. Callers should run
    /// [`check_invariants`](Self::check_invariants) on untrusted parts.
    pub fn from_parts(
        moebius: MoebiusMap,
        precompose: Option<Diffeo>,
        u: ScalarField,
        radius: f64,
        diagnostics: Diagnostics,
    ) -> UniformizationResult {
        let u_coeffs = analyze(&u);
        UniformizationResult {
            phi: compose_phi(precompose.as_ref(), &moebius),
            moebius,
            precompose,
            u,
            u_coeffs,
            radius,
            diagnostics,
        }
    }

    /// The metric this result uniformizes, rebuilt from (M, u, r^S): in the
    /// conformal chart (r^S)² e^{2v} γ₀ with v = u∘M⁻¹ + ½ log J_{M⁻¹}, and
    /// the stored precompose.
    ///
    /// # Errors
    /// Propagates metric validation errors.
    pub fn chart_metric(&self) -> Result<ConformalMetric> {
        let v = conformal_factor_compose(&self.u_coeffs, &self.moebius.inverse(), self.u.grid());
        ConformalMetric::new(self.radius, v, self.precompose.clone())
    }

    /// The same uniformization in another O(3) gauge: (phi∘O⁻¹, u∘O⁻¹).
    pub fn rotated(&self, o: &Rotation3) -> UniformizationResult {
        let oinv = o.inverse();
        let moebius = self.moebius.compose(&MoebiusMap::from_rotation(&oinv));
        let grid = self.u.grid();
        let pts: Vec<_> = grid.nodes().iter().map(|x| oinv.apply(x)).collect();
        let u = ScalarField::new(grid, eval_unchecked(&self.u_coeffs, &pts)).expect("finite factor");
        let u_coeffs = analyze(&u);
        UniformizationResult {
            phi: compose_phi(self.precompose.as_ref(), &moebius),
            moebius,
            precompose: self.precompose.clone(),
            u,
            u_coeffs,
            radius: self.radius,
            diagnostics: self.diagnostics.clone(),
        }
    }

    /// Checks the result invariants: |CM| ≤ 10⁻⁹, residual ≤ 10⁻⁷ and
    /// metric identity ≤ 10⁻⁷ (thresholds from `tol`).
    ///
    /// # Errors
    /// [`Error::StaleInput`] naming the first violated invariant.
    pub fn check_invariants(&self, tol: &Tolerances) -> Result<()> {
        let d = &self.diagnostics;
        let cm = center_of_mass(&self.u).norm();
        if !(cm <= tol.result_cm) {
            return Err(Error::StaleInput(format!("center of mass {cm:.3e} exceeds {:.0e}", tol.result_cm)));
        }
        if !(d.residual <= tol.result_residual) {
            return Err(Error::StaleInput(format!("Liouville residual {:.3e} exceeds tolerance", d.residual)));
        }
        if !(d.metric_identity_error <= tol.result_residual) {
            return Err(Error::StaleInput(format!(
                "metric identity defect {:.3e} exceeds tolerance",
                d.metric_identity_error
            )));
        }
        Ok(())
    }
}

/// Effective uniformization of an almost-round metric.
///
/// Pipeline: Gauss curvature in the conformal chart; Newton–Krylov solve of
/// Δ₀ũ + (r^S)² K e^{2ũ} = 1 seeded with the chart factor w + log(r/r^S);
/// centering of ũ by a Möbius map M; composition bookkeeping
/// phi = precompose⁻¹ ∘ M. The result is reported in whichever O(3) gauge
/// the centering lands.
///
/// # Errors
/// [`Error::AlmostRoundViolation`] outside the trust region or on Newton
/// failure; [`Error::Inconsistency`] when the computed pair violates the
/// result invariants; centering errors propagate.
pub fn uniformize(metric: &ConformalMetric, tol: &Tolerances) -> Result<UniformizationResult> {
    uniformize_in_gauge(metric, tol, None)
}

/// [`uniformize`] with the centering started from the chart factor
/// composed with the rotation `seed`, so that the solver lands in a
/// different O(3) gauge. Used to probe uniqueness up to isometries.
///
/// # Errors
/// As for [`uniformize`].
pub fn uniformize_in_gauge(
    metric: &ConformalMetric,
    tol: &Tolerances,
    seed: Option<&Rotation3>,
) -> Result<UniformizationResult> {
    let grid = metric.grid().clone();
    let w = metric.conformal_factor();
    let mean_e2w = integrate_round(&w.map(|v| (2.0 * v).exp())) / (4.0 * PI);
    let r = metric.radius();
    let radius = r * mean_e2w.sqrt();
    let shift = (r / radius).ln();
    let k = gauss_curvature(metric);
    let epsilon = k.values().iter().fold(0.0_f64, |a, v| a.max((radius * radius * v - 1.0).abs()));
    check_curvature(&k, radius, tol)?;

    // Seed with the chart factor: for (nearly) constant K the whole Möbius
    // orbit solves the same equation, and only the chart factor ties the
    // solution to this metric.
    let mut seed_coeffs = metric.w_coeffs().clone();
    seed_coeffs.set(0, 0, seed_coeffs.get(0, 0) + shift * (4.0 * PI).sqrt());
    let chart = newton_chart(&k, radius, seed_coeffs, tol)?;

    let moebius = match seed {
        None => center(&synthesize(&chart.coeffs, &grid)?, tol)?.with_counts(),
        Some(rot) => {
            let rm = MoebiusMap::from_rotation(rot);
            let seeded = conformal_factor_compose(&chart.coeffs, &rm, &grid);
            let (m, it, pre) = center(&seeded, tol)?.with_counts();
            (rm.compose(&m), it, pre)
        }
    };
    let (m, centering_iters, pre_iterations) = moebius;

    let u = conformal_factor_compose(&chart.coeffs, &m, &grid);
    let u_coeffs = analyze(&u);
    let images: Vec<Vector3<f64>> = grid.nodes().iter().map(|x| m.apply(x)).collect();
    let k_at = eval_at(&analyze(&k), &images)?;
    let residual = grid_residual(&u, &u_coeffs, &k_at, radius);
    let cm_norm = center_of_mass(&u).norm();
    let w_m = conformal_factor_compose(metric.w_coeffs(), &m, &grid);
    let metric_identity_error =
        u.values().iter().zip(w_m.values()).fold(0.0_f64, |a, (x, y)| a.max((x - y - shift).abs()));

    let result = UniformizationResult {
        phi: compose_phi(metric.precompose(), &m),
        moebius: m,
        precompose: metric.precompose().cloned(),
        u,
        u_coeffs,
        radius,
        diagnostics: Diagnostics {
            residual,
            cm_norm,
            metric_identity_error,
            newton_iters: chart.iterations,
            krylov_iters: chart.krylov_iterations,
            centering_iters,
            pre_iterations,
            residual_history: chart.history,
            epsilon,
        },
    };
    result.check_invariants(tol).map_err(|e| Error::Inconsistency(format!("uniformization invariant failed: {e}")))?;
    Ok(result)
}

/// Gauge gap between two uniformizations of the same metric:
/// ‖u₁ − u₂∘O‖∞, with O the nearest orthogonal map to phi₂⁻¹∘phi₁.
///
/// # Errors
/// Representation or fit errors from the rotation extraction.
pub fn uniqueness_gap(res1: &UniformizationResult, res2: &UniformizationResult) -> Result<f64> {
    let psi = res2.phi.inverse()?.compose(&res1.phi)?;
    let grid = res1.u.grid();
    let (o, _) = nearest_rotation(&psi, grid)?;
    let pts: Vec<_> = grid.nodes().iter().map(|x| o.apply(x)).collect();
    let u2o = eval_at(&res2.u_coeffs, &pts)?;
    Ok(res1.u.values().iter().zip(&u2o).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;

    #[test]
    fn chart_metric_reproduces_input() {
        let g = make_grid(16).unwrap();
        let w = ScalarField::from_fn(&g, |x| 0.03 * (x.x * x.y + 0.5 * x.z) - 0.01);
        let m = ConformalMetric::new(1.7, w, None).unwrap();
        let res = uniformize(&m, &Tolerances::default()).unwrap();
        let back = res.chart_metric().unwrap();
        let target = m.conformal_factor().map(|v| v + (1.7 / res.radius).ln());
        assert!(back.conformal_factor().max_abs_diff(&target).unwrap() < 1e-10);
        assert!((back.area() - m.area()).abs() < 1e-10 * m.area());
    }

    #[test]
    fn round_metric_is_fixed() {
        let g = make_grid(16).unwrap();
        let res = uniformize(&ConformalMetric::round(&g, 2.0).unwrap(), &Tolerances::default()).unwrap();
        assert!(res.u.sup_norm() < 1e-13);
        assert!((res.radius - 2.0).abs() < 1e-13);
        let x = Vector3::new(0.6, 0.0, 0.8);
        assert!((res.phi.apply(&x).unwrap() - x).norm() < 1e-13);
    }

    #[test]
    fn disguised_round_metric() {
        let g = make_grid(48).unwrap();
        let s = MoebiusMap::scale(&Vector3::z(), 1.2).unwrap();
        let w = conformal_factor_compose(&SpectralCoeffs::zeros(0), &s, &g);
        let metric = ConformalMetric::new(1.0, w, None).unwrap();
        let res = uniformize(&metric, &Tolerances::default()).unwrap();
        assert!(res.u.sup_norm() < 1e-7);
        let pd = res.moebius.compose(&s).polar_decompose().unwrap();
        assert!(pd.t - 1.0 < 1e-7);
    }

    #[test]
    fn gauge_seed_changes_only_the_gauge() {
        let g = make_grid(24).unwrap();
        let w = ScalarField::from_fn(&g, |x| 0.02 * (x.x * x.y + 0.5 * x.z * x.z * x.z) + 0.01 * x.x);
        let metric = ConformalMetric::new(1.3, w, None).unwrap();
        let tol = Tolerances::default();
        let a = uniformize(&metric, &tol).unwrap();
        let rot = Rotation3::axis_angle(Vector3::new(1.0, 2.0, 0.5), 1.1).unwrap();
        let b = uniformize_in_gauge(&metric, &tol, Some(&rot)).unwrap();
        assert!(a.u.max_abs_diff(&b.u).unwrap() > 1e-3);
        assert!(uniqueness_gap(&a, &b).unwrap() < 1e-9);
        assert!(uniqueness_gap(&a, &a.rotated(&rot)).unwrap() < 1e-9);
    }
}
