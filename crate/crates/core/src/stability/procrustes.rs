//! Nearest orthogonal map by weighted orthogonal Procrustes.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::moebius::Rotation3;
use crate::s2field::GridSpec;
use crate::stability::SphereMap;

/// The orthogonal O minimizing Σᵢ wᵢ |m(xᵢ) − O xᵢ|² over the nodes of
/// `grid`, and the sup residual maxᵢ |m(xᵢ) − O xᵢ|.
///
/// Both determinant classes are tried (UVᵀ and U diag(1,1,−1) Vᵀ with the
/// smallest singular direction flipped) and the one with the smaller sup
/// residual is returned, so reflections are recovered as well as rotations.
///
/// # Errors
/// [`Error::Fit`] when the correlation matrix has rank < 3;
/// representation errors from sampling the map.
pub fn nearest_rotation(m: &SphereMap, grid: &GridSpec) -> Result<(Rotation3, f64)> {
    let images = m.images_on(grid)?;
    let nodes = grid.nodes();
    let mut h = Matrix3::zeros();
    for (i, (y, x)) in images.iter().zip(&nodes).enumerate() {
        h += y * x.transpose() * grid.weight(i);
    }
    let svd = h.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Fit("SVD of the correlation matrix failed".into())),
    };
    let s = svd.singular_values;
    let (kmin, smin) = s.iter().enumerate().fold((0, f64::INFINITY), |a, (k, v)| if *v < a.1 { (k, *v) } else { a });
    if !(smin > 1e-12 * s.max()) {
        return Err(Error::Fit(format!("correlation matrix is rank deficient (σ_min = {smin:.3e})")));
    }
    let mut flip = Matrix3::identity();
    flip[(kmin, kmin)] = -1.0;
    let residual =
        |o: &Matrix3<f64>| -> f64 { images.iter().zip(&nodes).fold(0.0_f64, |a, (y, x)| a.max((y - o * x).norm())) };
    let cands = [u * vt, u * flip * vt];
    let (best, res) = cands.iter().map(|o| (*o, residual(o))).fold((Matrix3::identity(), f64::INFINITY), |a, b| {
        if b.1 < a.1 {
            b
        } else {
            a
        }
    });
    Ok((Rotation3::from_matrix_projected(best), res))
}

/// Sup distance maxᵢ |m(xᵢ) − xᵢ| to the identity.
///
/// # Errors
/// Representation errors from sampling the map.
pub fn distance_to_identity(m: &SphereMap, grid: &GridSpec) -> Result<f64> {
    let images = m.images_on(grid)?;
    Ok(images.iter().zip(grid.nodes()).fold(0.0_f64, |a, (y, x): (&Vector3<f64>, _)| a.max((y - x).norm())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::MoebiusMap;
    use crate::s2field::make_grid;

    #[test]
    fn recovers_rotations_and_reflections() {
        let g = make_grid(8).unwrap();
        let r = Rotation3::axis_angle(Vector3::new(0.3, -1.0, 0.4), 2.0).unwrap();
        let (o, res) = nearest_rotation(&SphereMap::rotation(&r), &g).unwrap();
        assert!(o.distance(&r) < 1e-12 && res < 1e-12);
        let refl = r.compose(&Rotation3::conjugation());
        let (o, res) = nearest_rotation(&SphereMap::rotation(&refl), &g).unwrap();
        assert!(o.det() < 0.0 && o.distance(&refl) < 1e-12 && res < 1e-12);
    }

    #[test]
    fn perturbed_rotation() {
        let g = make_grid(16).unwrap();
        let r = Rotation3::axis_angle(Vector3::new(1.0, 1.0, 0.0), 0.7).unwrap();
        let d = 1e-3;
        let m = SphereMap::rotation(&r)
            .compose(&SphereMap::moebius(MoebiusMap::scale(&Vector3::x(), 1.0 + d).unwrap()))
            .unwrap();
        let (o, res) = nearest_rotation(&m, &g).unwrap();
        assert!(o.distance(&r) <= 10.0 * d);
        assert!(res <= 2.0 * d);
    }

    #[test]
    fn degenerate_map_is_rejected() {
        let g = make_grid(8).unwrap();
        let m = SphereMap::sampled(&g, vec![Vector3::z(); g.len()]).unwrap();
        assert!(matches!(nearest_rotation(&m, &g), Err(Error::Fit(_))));
    }
}
