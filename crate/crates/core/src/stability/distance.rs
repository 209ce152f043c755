//! Distance between two metrics relative to a map.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::s2field::{analyze, eval_at, gradient_frame, h_s_norm, ConformalMetric, ScalarField};
use crate::stability::{MapFactor, SphereMap};

/// Step of the finite-difference differentials used for the distance; large
/// enough that rounding noise stays far below the 𝔥₂ amplification.
const DISTANCE_STEP: f64 = 1e-3;

/// Tangent map of an exact composition applied to `v` at `x`, by central
/// differences with step `h` along the great circle, refined once by
/// Richardson extrapolation.
pub(crate) fn tangent(m: &SphereMap, x: &Vector3<f64>, v: &Vector3<f64>, h: f64) -> Result<Vector3<f64>> {
    let d1 = m.pushforward(x, v, h)?;
    let d2 = m.pushforward(x, v, 0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// d = (r^{S₁})⁻² ‖g₁ − Ψ^#g₂‖_{𝔥₂} measured on the first sphere.
///
/// The tensor difference is assembled at g₁'s nodes from the images of the
/// orthonormal frame (e_θ, e_φ) under φ₂∘Ψ (φ₂ the precompose of g₂), then
/// written in ambient Cartesian components T_kl, which are smooth through
/// the poles. The norm is (½ Σ_kl ‖T_kl‖²_{𝔥₂})^{1/2}, normalized so that
/// the round metric itself has unit pointwise size.
///
/// # Errors
/// [`Error::Domain`] when g₁ carries a precompose (the 𝔥₂ norm is taken in
/// the conformal chart); [`Error::Representation`] when a sampled map has a
/// degenerate differential or lives on another grid.
pub fn metric_distance(g1: &ConformalMetric, psi: &SphereMap, g2: &ConformalMetric) -> Result<f64> {
    if g1.precompose().is_some() {
        return Err(Error::Domain("metric_distance measures on a sphere without precompose".into()));
    }
    let grid = g1.grid();
    let n = grid.len();
    // Chart map of the second sphere composed with Ψ, and its differential.
    let (images, de_theta, de_phi) = match psi {
        SphereMap::Composition(f) => {
            let mut factors = Vec::with_capacity(f.len() + 1);
            if let Some(p) = g2.precompose() {
                factors.push(MapFactor::Diffeo(p.clone()));
            }
            factors.extend(f.iter().cloned());
            let chart = SphereMap::Composition(factors);
            let mut imgs = Vec::with_capacity(n);
            let mut dt = Vec::with_capacity(n);
            let mut dp = Vec::with_capacity(n);
            for i in 0..n {
                let x = grid.node(i);
                imgs.push(chart.apply(&x)?);
                dt.push(tangent(&chart, &x, &grid.e_theta(i), DISTANCE_STEP)?);
                dp.push(tangent(&chart, &x, &grid.e_phi(i), DISTANCE_STEP)?);
            }
            (imgs, dt, dp)
        }
        SphereMap::Sampled { .. } => {
            let raw = psi.images_on(grid)?;
            let imgs: Vec<Vector3<f64>> = raw.iter().map(|y| g2.to_chart(y)).collect();
            let mut dt = vec![Vector3::zeros(); n];
            let mut dp = vec![Vector3::zeros(); n];
            for k in 0..3 {
                let f = ScalarField::new(grid, imgs.iter().map(|p| p[k]).collect())?;
                let (a, b) = gradient_frame(&analyze(&f), grid)?;
                for i in 0..n {
                    dt[i][k] = a[i];
                    dp[i][k] = b[i];
                }
            }
            (imgs, dt, dp)
        }
    };
    if let Some(i) = (0..n).find(|&i| !(de_theta[i].cross(&de_phi[i]).norm() > 1e-8)) {
        return Err(Error::Representation(format!("map differential is degenerate at node {i}")));
    }
    let w2 = eval_at(g2.w_coeffs(), &images)?;
    let r1 = g1.radius();
    let r2 = g2.radius();
    let w1 = g1.conformal_factor().values();
    let mut comps = vec![vec![0.0; n]; 9];
    for i in 0..n {
        let s2 = r2 * r2 * (2.0 * w2[i]).exp();
        let s1 = r1 * r1 * (2.0 * w1[i]).exp();
        let d = [de_theta[i], de_phi[i]];
        let mut t = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let g1ab = if a == b { s1 } else { 0.0 };
                t[a][b] = g1ab - s2 * d[a].dot(&d[b]);
            }
        }
        let e = [grid.e_theta(i), grid.e_phi(i)];
        let mut amb = Matrix3::zeros();
        for a in 0..2 {
            for b in 0..2 {
                amb += e[a] * e[b].transpose() * t[a][b];
            }
        }
        for k in 0..3 {
            for l in 0..3 {
                comps[3 * k + l][i] = amb[(k, l)];
            }
        }
    }
    let mut sum = 0.0;
    for c in comps {
        let nrm = h_s_norm(&ScalarField::new(grid, c)?, g1, 2)?;
        sum += nrm * nrm;
    }
    let rs = g1.area_radius();
    Ok((0.5 * sum).sqrt() / (rs * rs))
}
