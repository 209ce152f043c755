//! Onofri functional, centre of mass and the Onofri inequality.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::s2field::{analyze, integrate_round, ScalarField, SpectralCoeffs};

/// S[u] = (1/4π)(∫|∇u|² + 2∫u) over the unit round sphere; the gradient
/// term is Σ ℓ(ℓ+1) c_ℓm².
pub fn onofri_functional(u: &ScalarField) -> f64 {
    let c = analyze(u);
    let grad: f64 = c
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let l = SpectralCoeffs::degree_of(i) as f64;
            l * (l + 1.0) * v * v
        })
        .sum();
    (grad + 2.0 * integrate_round(u)) / (4.0 * PI)
}

/// Centre of mass ∫ x e^{2u} dΩ / ∫ e^{2u} dΩ.
pub fn center_of_mass(u: &ScalarField) -> Vector3<f64> {
    let g = u.grid();
    let mut num = Vector3::zeros();
    let mut den = 0.0;
    for (i, v) in u.values().iter().enumerate() {
        let rho = g.weight(i) * (2.0 * v).exp();
        num += g.node(i) * rho;
        den += rho;
    }
    num / den
}

/// Slack S[u] − log((1/4π)∫ e^{2u}) of the Onofri inequality; nonnegative,
/// and zero exactly on the Möbius orbit of u = 0.
pub fn check_onofri(u: &ScalarField) -> f64 {
    let mean = integrate_round(&u.map(|v| (2.0 * v).exp())) / (4.0 * PI);
    onofri_functional(u) - mean.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{conformal_factor_compose, MoebiusMap};
    use crate::s2field::make_grid;

    #[test]
    fn constants_and_zero() {
        let g = make_grid(8).unwrap();
        assert_eq!(onofri_functional(&ScalarField::constant(&g, 0.0)), 0.0);
        assert!((onofri_functional(&ScalarField::constant(&g, 0.25)) - 0.5).abs() < 1e-14);
        assert!(center_of_mass(&ScalarField::constant(&g, 0.0)).norm() < 1e-15);
        assert!(check_onofri(&ScalarField::constant(&g, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn moebius_orbit_of_zero_is_the_equality_case() {
        let g = make_grid(64).unwrap();
        let m = MoebiusMap::scale(&Vector3::z(), 1.5).unwrap();
        let u = conformal_factor_compose(&SpectralCoeffs::zeros(0), &m, &g);
        assert!(onofri_functional(&u).abs() < 1e-10);
        assert!(check_onofri(&u).abs() < 1e-10);
    }

    #[test]
    fn height_function_centre_of_mass() {
        // CM of e^{2c cos θ}: coth(2c) − 1/(2c) ≈ 2c/3.
        let g = make_grid(16).unwrap();
        let c: f64 = 0.05;
        let cm = center_of_mass(&ScalarField::from_fn(&g, |x| c * x.z));
        let exact = 1.0 / (2.0 * c).tanh() - 1.0 / (2.0 * c);
        assert!((cm.z - exact).abs() < 1e-13 && cm.x.abs() < 1e-15);
        assert!((cm.z - 2.0 * c / 3.0).abs() < c * c);
    }
}
