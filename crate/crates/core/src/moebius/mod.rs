//! The conformal group of the sphere: stereographic coordinates, Möbius
//! maps, rotations, polar decomposition and conformal-factor transport.

mod diffeo;
mod map;
mod rotation;

pub use diffeo::Diffeo;
pub use map::{stereo, stereo_inv, stereo_inv_z, MoebiusMap, PolarDecomposition, ProjectivePoint};
pub use rotation::Rotation3;

use crate::error::Result;
use crate::s2field::{eval_at, GridSpec, ScalarField, SpectralCoeffs};

/// Converts an orthogonal matrix to its Möbius representative.
pub fn rotation_to_mobius(r: &Rotation3) -> MoebiusMap {
    MoebiusMap::from_rotation(r)
}

/// The orthogonal matrix of an isometric Möbius map.
pub fn su2_to_rotation(m: &MoebiusMap) -> Rotation3 {
    m.to_rotation()
}

/// Scale map Φ_{p,t}; see [`MoebiusMap::scale`].
///
/// # Errors
/// Domain error for t ≤ 0.
pub fn scale_map(p: &nalgebra::Vector3<f64>, t: f64) -> Result<MoebiusMap> {
    MoebiusMap::scale(p, t)
}

/// Transported conformal factor u_Φ = u∘Φ + ½ log|det dΦ| sampled on `grid`,
/// so that e^{2u_Φ} γ₀ = Φ^#(e^{2u} γ₀).
///
/// `u∘Φ` is evaluated by exact spectral synthesis at the mapped nodes.
pub fn conformal_factor_compose(u: &SpectralCoeffs, m: &MoebiusMap, grid: &GridSpec) -> ScalarField {
    let nodes = grid.nodes();
    let images: Vec<_> = nodes.iter().map(|x| m.apply(x)).collect();
    let mut values = eval_at(u, &images).expect("Moebius images are unit vectors");
    for (v, x) in values.iter_mut().zip(&nodes) {
        *v += 0.5 * m.jacobian_det(x).ln();
    }
    ScalarField::new(grid, values).expect("finite conformal factor")
}
