//! Integration, curvature, Sobolev-type norms and curl on the sphere.

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::s2field::field::{OneForm, ScalarField};
use crate::s2field::grid::GridSpec;
use crate::s2field::metric::ConformalMetric;
use crate::s2field::transform::{
    analyze, analyze_curl, analyze_values, gradient_ambient, laplace_beltrami, resample, synthesize,
};

/// ∫ f dA_g over the physical sphere of `metric`.
///
/// # Errors
/// [`Error::Shape`] when `f` lives on a different grid.
pub fn integrate(f: &ScalarField, metric: &ConformalMetric) -> Result<f64> {
    if !f.grid().same_as(metric.grid()) {
        return Err(Error::Shape("field and metric grids differ".into()));
    }
    Ok(compensated_sum(f.values().iter().zip(metric.area_weights()).map(|(v, w)| v * w)))
}

/// ∫ f dΩ over the unit round sphere.
pub fn integrate_round(f: &ScalarField) -> f64 {
    let g = f.grid();
    compensated_sum(f.values().iter().enumerate().map(|(i, v)| v * g.weight(i)))
}

/// Gauss curvature K = (r^S)⁻² e^{−2w} (1 − Δ₀ w), sampled on the conformal chart.
pub fn gauss_curvature(metric: &ConformalMetric) -> ScalarField {
    let grid = metric.grid();
    let lap = synthesize(&laplace_beltrami(metric.w_coeffs()), grid).expect("same band limit");
    let r2 = metric.radius() * metric.radius();
    let values = metric
        .conformal_factor()
        .values()
        .iter()
        .zip(lap.values())
        .map(|(w, l)| (-2.0 * w).exp() * (1.0 - l) / r2)
        .collect();
    ScalarField::new(grid, values).expect("finite curvature")
}

/// Largest Sobolev order accepted by [`h_s_norm`].
pub const MAX_SOBOLEV_ORDER: usize = 4;

/// Σ_{i ≤ s} ‖(r^S ∇_g)^i f‖_{L²(dA_g)} for g = (r^S)² e^{2w} γ₀.
///
/// Covariant derivatives are assembled in ambient Cartesian components
/// (smooth through the poles): the round-sphere connection is the projected
/// ambient derivative, corrected by the conformal Christoffel term
/// C(X, Y) = X(w) Y + Y(w) X − γ₀(X, Y) ∇w. Derivatives are computed on an
/// internally refined grid to keep products free of aliasing.
///
/// # Errors
/// [`Error::Config`] for s > 4; [`Error::Shape`] for a grid mismatch;
/// [`Error::Domain`] for metrics with a precompose (the norm is defined in
/// the conformal chart).
pub fn h_s_norm(f: &ScalarField, metric: &ConformalMetric, s: usize) -> Result<f64> {
    if s > MAX_SOBOLEV_ORDER {
        return Err(Error::Config(format!("Sobolev order {s} exceeds {MAX_SOBOLEV_ORDER}")));
    }
    if !f.grid().same_as(metric.grid()) {
        return Err(Error::Shape("field and metric grids differ".into()));
    }
    if metric.precompose().is_some() {
        return Err(Error::Domain("h_s_norm is defined for conformal-gauge metrics without precompose".into()));
    }
    let base = f.grid();
    let r2 = metric.radius().powi(2);
    let mut total = integrate(&f.map(|v| v * v), metric)?.sqrt();
    if s == 0 {
        return Ok(total);
    }
    let fine_l = 2 * base.band_limit() + 3 * s + 4;
    let fine = GridSpec::internal(fine_l);
    let fine_l = fine.band_limit();
    let w = resample(metric.w_coeffs(), &fine);
    let gw = gradient_ambient(&metric.w_coeffs().with_band_limit(fine_l), &fine)?;
    let nodes = fine.nodes();
    let n = fine.len();
    let mut tensor = vec![resample(&analyze(f), &fine).into_values()];
    for k in 1..=s {
        let rank_prev = k - 1;
        let count_prev = tensor.len();
        let grads: Vec<[Vec<f64>; 3]> = tensor
            .iter()
            .map(|comp| gradient_ambient(&analyze_values(&fine, comp, fine_l), &fine))
            .collect::<Result<_>>()?;
        let mut next = vec![vec![0.0; n]; 3 * count_prev];
        for (a_idx, grad) in grads.iter().enumerate() {
            let digits = to_digits(a_idx, rank_prev);
            for b in 0..3 {
                let out = &mut next[b + 3 * a_idx];
                for i in 0..n {
                    let x = &nodes[i];
                    let wb = gw[b][i];
                    let mut v = grad[b][i] - wb * tensor[a_idx][i];
                    for (slot, &aj) in digits.iter().enumerate() {
                        let swapped = &tensor[with_digit(&digits, slot, b)];
                        v += x[aj] * swapped[i] - gw[aj][i] * swapped[i];
                        let p_b_aj = if b == aj { 1.0 } else { 0.0 } - x[b] * x[aj];
                        if p_b_aj != 0.0 {
                            let mut contraction = 0.0;
                            for c in 0..3 {
                                contraction += tensor[with_digit(&digits, slot, c)][i] * gw[c][i];
                            }
                            v += p_b_aj * contraction;
                        }
                    }
                    out[i] = v;
                }
            }
        }
        tensor = next;
        // |(r∇)^k f|²_g dA_g = e^{−2kw} Σ T² · r² e^{2w} dΩ.
        let mut acc = 0.0;
        for i in 0..n {
            let sq: f64 = tensor.iter().map(|c| c[i] * c[i]).sum();
            acc += fine.weight(i) * r2 * (2.0 * (1.0 - k as f64) * w.values()[i]).exp() * sq;
        }
        total += acc.sqrt();
    }
    Ok(total)
}

fn to_digits(mut idx: usize, rank: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(rank);
    for _ in 0..rank {
        d.push(idx % 3);
        idx /= 3;
    }
    d
}

fn with_digit(digits: &[usize], slot: usize, value: usize) -> usize {
    digits.iter().enumerate().rev().fold(0, |acc, (i, &d)| acc * 3 + if i == slot { value } else { d })
}

/// Scalar curl of a 1-form, curl_g b = (r^S)⁻² e^{−2w} (1/sinθ)(∂_θ(sinθ b_φ̂) − ∂_φ b_θ̂).
///
/// The round-sphere curl is computed in weak form against the harmonics, so
/// its monopole vanishes identically and ∫ curl_g b dA_g = 0 to rounding.
///
/// # Errors
/// [`Error::Shape`] for a grid mismatch, [`Error::Domain`] when the metric
/// carries a precompose.
pub fn curl_one_form(b: &OneForm, metric: &ConformalMetric) -> Result<ScalarField> {
    if !b.grid().same_as(metric.grid()) {
        return Err(Error::Shape("1-form and metric grids differ".into()));
    }
    if metric.precompose().is_some() {
        return Err(Error::Domain("curl requires a metric without precompose".into()));
    }
    let grid = metric.grid();
    let c = analyze_curl(grid, b.b_theta(), b.b_phi());
    let curl0 = synthesize(&c, grid)?;
    let r2 = metric.radius().powi(2);
    curl0.zip_with(metric.conformal_factor(), |c, w| c * (-2.0 * w).exp() / r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn digit_helpers_roundtrip() {
        let d = to_digits(17, 3); // 17 = 2 + 2·3 + 1·9
        assert_eq!(d, vec![2, 2, 1]);
        assert_eq!(with_digit(&d, 0, 2), 17);
        assert_eq!(with_digit(&d, 2, 0), 8);
    }

    #[test]
    fn integrate_reference_values() {
        let g = make_grid(8).unwrap();
        let round = ConformalMetric::round(&g, 1.0).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!((integrate(&one, &round).unwrap() - 4.0 * PI).abs() < 1e-12);
        let scaled = ConformalMetric::new(1.0, ScalarField::constant(&g, 0.3), None).unwrap();
        assert!((integrate(&one, &scaled).unwrap() - 4.0 * PI * 0.6f64.exp()).abs() < 1e-11);
        let c2 = ScalarField::from_fn(&g, |x| x.z * x.z);
        assert!((integrate(&c2, &round).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_of_rescaled_spheres() {
        let g = make_grid(8).unwrap();
        let k = gauss_curvature(&ConformalMetric::new(2.0, ScalarField::constant(&g, 0.2), None).unwrap());
        let expect = (-0.4f64).exp() / 4.0;
        assert!(k.values().iter().all(|v| (v - expect).abs() < 1e-14));
    }

    #[test]
    fn h_s_norm_of_height_function() {
        let g = make_grid(12).unwrap();
        let m = ConformalMetric::round(&g, 1.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| x.z);
        let a = (4.0 * PI / 3.0).sqrt();
        let b = (8.0 * PI / 3.0).sqrt();
        assert!((h_s_norm(&f, &m, 0).unwrap() - a).abs() < 1e-12);
        assert!((h_s_norm(&f, &m, 1).unwrap() - (a + b)).abs() < 1e-11);
        // Hessian of an l=1 function is −f γ₀, so |∇²f|² = 2f².
        assert!((h_s_norm(&f, &m, 2).unwrap() - (a + 2.0 * b)).abs() < 1e-10);
        assert!(matches!(h_s_norm(&f, &m, 5), Err(Error::Config(_))));
    }

    #[test]
    fn curl_of_rotational_field() {
        let g = make_grid(10).unwrap();
        let m = ConformalMetric::round(&g, 1.0).unwrap();
        let b = OneForm::from_ambient(&g, |x| nalgebra::Vector3::z().cross(&x));
        let c = curl_one_form(&b, &m).unwrap();
        for i in 0..g.len() {
            assert!((c.values()[i] - 2.0 * g.node(i).z).abs() < 1e-12);
        }
    }
}
