//! Closed-form oracles for the public API: each expected value below is
//! derived by hand, independently of the implementation.

use std::f64::consts::PI;

use nalgebra::Vector3;
use roundsphere::gcmgeom::{angular_momentum, gcm_leading_solve, hawking_mass, kerr_model_sphere, KerrProfile};
use roundsphere::modes::{gram, standard_modes};
use roundsphere::moebius::{conformal_factor_compose, MoebiusMap, Rotation3};
use roundsphere::s2field::{
    analyze, gauss_curvature, integrate_round, lm_index, make_grid, ConformalMetric, ScalarField, SpectralCoeffs,
};
use roundsphere::stability::{metric_distance, SphereMap};
use roundsphere::uniformize::{center, center_of_mass, check_onofri, onofri_functional, uniformize};
use roundsphere::{GcmInput, Tolerances};

/// Conformal factor ½ log J_M of a Möbius map: e^{2w}γ₀ = M^#γ₀ is round.
fn moebius_factor(m: &MoebiusMap, band_limit: usize) -> ScalarField {
    let g = make_grid(band_limit).unwrap();
    conformal_factor_compose(&SpectralCoeffs::zeros(band_limit), m, &g)
}

#[test]
fn degree_one_coordinates_have_coefficient_sqrt_four_pi_over_three() {
    // z = √(4π/3) Y₁₀, x = √(4π/3) Y₁₁, y = √(4π/3) Y₁₋₁ (no phase factor).
    let g = make_grid(8).unwrap();
    let c = (4.0 * PI / 3.0).sqrt();
    for (f, m) in [(0usize, 0i64), (1, 1), (2, -1)] {
        let field = ScalarField::from_fn(&g, |x| [x.z, x.x, x.y][f]);
        let coeffs = analyze(&field);
        for (i, v) in coeffs.as_slice().iter().enumerate() {
            let want = if i == lm_index(1, m) { c } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "coordinate {f}, index {i}: {v} vs {want}");
        }
    }
}

#[test]
fn quadrature_integrates_polynomials_exactly() {
    // ∫ z² dA = 4π/3, ∫ x²y² dA = 4π/15, ∫ 1 dA = 4π.
    let g = make_grid(6).unwrap();
    assert!((integrate_round(&ScalarField::constant(&g, 1.0)) - 4.0 * PI).abs() < 1e-14);
    assert!((integrate_round(&ScalarField::from_fn(&g, |x| x.z * x.z)) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((integrate_round(&ScalarField::from_fn(&g, |x| x.x * x.x * x.y * x.y)) - 4.0 * PI / 15.0).abs() < 1e-14);
}

#[test]
fn constant_factor_rescales_curvature_and_area() {
    // e^{2c} r² γ₀ has K = e^{−2c}/r² and area 4π r² e^{2c}.
    let g = make_grid(12).unwrap();
    let (r, c) = (2.5, 0.3);
    let m = ConformalMetric::new(r, ScalarField::constant(&g, c), None).unwrap();
    let k = gauss_curvature(&m);
    let want = (-2.0 * c).exp() / (r * r);
    assert!(k.values().iter().all(|v| (v - want).abs() < 1e-13 * want.max(1.0)));
    assert!((m.area() - 4.0 * PI * r * r * (2.0 * c).exp()).abs() < 1e-11);
    assert!((m.area_radius() - r * c.exp()).abs() < 1e-13);
}

#[test]
fn pulled_back_round_metric_has_unit_curvature() {
    let m = MoebiusMap::scale(&Vector3::new(0.3, -0.4, 0.866).normalize(), 1.4).unwrap();
    let w = moebius_factor(&m, 40);
    let g = ConformalMetric::new(1.7, w, None).unwrap();
    let k = gauss_curvature(&g);
    let dev = k.values().iter().map(|v| (v * 1.7 * 1.7 - 1.0).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-9, "‖r²K − 1‖∞ = {dev}");
    assert!((g.area_radius() - 1.7).abs() < 1e-12);
}

#[test]
fn onofri_slack_vanishes_on_moebius_factors_and_is_nonnegative() {
    let m = MoebiusMap::scale(&Vector3::z(), 1.5).unwrap();
    assert!(check_onofri(&moebius_factor(&m, 40)).abs() < 1e-10);
    let g = make_grid(24).unwrap();
    for k in 1..6 {
        let a = 0.2 * k as f64;
        let u = ScalarField::from_fn(&g, |x| a * (x.x * x.z + 0.5 * x.y - x.z * x.z * x.z));
        assert!(check_onofri(&u) > 0.0, "amplitude {a}");
    }
    // Constants: no gradient, S[c] = 2c, and the slack is zero.
    let c = ScalarField::constant(&g, 0.7);
    assert!((onofri_functional(&c) - 1.4).abs() < 1e-14);
    assert!(check_onofri(&c).abs() < 1e-14);
}

#[test]
fn centering_a_moebius_factor_returns_the_round_sphere() {
    // e^{2w}γ₀ = M^#γ₀; centering it must give a map whose transported
    // factor is identically zero (a rotation of the round sphere).
    let m = MoebiusMap::scale(&Vector3::new(1.0, 2.0, 2.0).normalize(), 1.3).unwrap();
    let w = moebius_factor(&m, 32);
    let tol = Tolerances::default();
    let sol = center(&w, &tol).unwrap();
    assert!(sol.theta_norm < tol.centering_theta);
    let centered = conformal_factor_compose(&analyze(&w), &sol.map, w.grid());
    assert!(centered.sup_norm() < 1e-9, "sup |u| = {}", centered.sup_norm());
    assert!(center_of_mass(&centered).norm() < 1e-10);
}

#[test]
fn uniformizing_a_disguised_round_sphere_gives_zero_factor() {
    let m = MoebiusMap::scale(&Vector3::new(-0.2, 0.5, 0.3).normalize(), 1.2).unwrap();
    let g = ConformalMetric::new(0.8, moebius_factor(&m, 32), None).unwrap();
    let res = uniformize(&g, &Tolerances::default()).unwrap();
    assert!(res.u.sup_norm() < 1e-9);
    assert!((res.radius - 0.8).abs() < 1e-12);
    // w∘M' + ½ log J_{M'} = ½ log J_{M∘M'} vanishes only if M∘M' is a rotation.
    let r = m.compose(&res.moebius);
    for p in [Vector3::x(), Vector3::y(), Vector3::z()] {
        assert!((r.jacobian_det(&p) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn round_gram_matrix_is_four_pi_over_three() {
    // ∫ x_p x_q dA = (4π/3) r² δ_pq on the round sphere of radius r.
    let g = make_grid(10).unwrap();
    let metric = ConformalMetric::round(&g, 2.0).unwrap();
    let gm = gram(&standard_modes(&g), &metric).unwrap();
    for p in 0..3 {
        for q in 0..3 {
            let want = if p == q { 4.0 * PI / 3.0 * 4.0 } else { 0.0 };
            assert!((gm[(p, q)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn metric_distance_is_zero_for_isometries_and_linear_in_small_perturbations() {
    let g = make_grid(24).unwrap();
    let round = ConformalMetric::round(&g, 1.0).unwrap();
    let rot = Rotation3::axis_angle(Vector3::new(1.0, 1.0, 0.0), 0.7).unwrap();
    assert!(metric_distance(&round, &SphereMap::rotation(&rot), &round).unwrap() < 1e-9);

    // g₂ = e^{2δ cos θ}γ₀, so g₁ − g₂ ≈ −2δ z P with P = I − xxᵀ and ½|P|² = 1:
    // the L² part alone is 2δ‖z‖ = 2δ√(4π/3) ≈ 4.09δ, and the norm is linear in δ.
    let mut previous: Option<f64> = None;
    for delta in [1e-3, 2e-3] {
        let g2 = ConformalMetric::new(1.0, ScalarField::from_fn(&g, |x| delta * x.z), None).unwrap();
        let d = metric_distance(&round, &SphereMap::identity(), &g2).unwrap();
        assert!(d >= 4.0 * delta && d <= 100.0 * delta, "d = {d} for δ = {delta}");
        if let Some(p) = previous {
            assert!((d / p - 2.0_f64).abs() < 0.01);
        }
        previous = Some(d);
    }
}

#[test]
fn gcm_solve_matches_the_linear_formula() {
    let (r, m) = (20.0, 2.0);
    let ups = 1.0 - 2.0 * m / r;
    let input = GcmInput::new([1e-4, 0.0, -2e-4], [0.0, 3e-3, 0.0], [1e-3, 0.0, 0.0], r, m);
    let s = gcm_leading_solve(&input).unwrap();
    let lam0 = r.powi(3) / (3.0 * m) * 1e-4;
    assert!((s.lambda[0] - lam0).abs() < 1e-15 * lam0.abs().max(1.0));
    assert!((s.lambda_bar[0] - (ups * lam0 - r / (3.0 * m) * 1e-3)).abs() < 1e-14);
    assert!((s.lambda_bar[1] - ups * r / (3.0 * m) * 3e-3).abs() < 1e-14);
    assert!(gcm_leading_solve(&GcmInput::new([0.0; 3], [0.0; 3], [0.0; 3], 1.0, 0.0)).is_err());
}

#[test]
fn kerr_model_recovers_spin_axis_and_schwarzschild_mass() {
    let g = make_grid(16).unwrap();
    let tol = Tolerances::default();
    let axis = Vector3::new(0.2, -0.6, 0.7).normalize();
    let data = kerr_model_sphere(0.3, 1.0, 60.0, &g, &axis, &KerrProfile::default(), &tol).unwrap();
    let am = angular_momentum(&data).unwrap();
    assert!((am.a_s - 0.3).abs() < 1e-10, "a_S = {}", am.a_s);
    assert!((am.rotation.apply(&axis) - Vector3::z()).norm() < 1e-9);

    // κ = 2/r, κ̄ = −2Υ/r integrate to m_H = m exactly.
    let data = kerr_model_sphere(0.0, 1.5, 30.0, &g, &Vector3::z(), &KerrProfile::default(), &tol).unwrap();
    assert!((hawking_mass(&data.kappa, &data.kappa_bar, &data.metric).unwrap() - 1.5).abs() < 1e-12);
}
