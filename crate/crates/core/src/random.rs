//! Seeded random fields, rotations and Möbius maps for property tests.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::moebius::{MoebiusMap, Rotation3};
use crate::s2field::{synthesize, GridSpec, ScalarField, SpectralCoeffs};

pub use rand::SeedableRng;

/// The generator used throughout: ChaCha8 seeded from a `u64`.
pub type TestRng = ChaCha8Rng;

/// A generator for `seed`.
pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random shape with degrees `lmin..=lmax`, coefficients N(0,1)/(1+ℓ)²,
/// normalized to unit sup norm on `grid`.
pub fn random_shape(rng: &mut TestRng, grid: &GridSpec, lmin: usize, lmax: usize) -> ScalarField {
    let mut c = SpectralCoeffs::zeros(lmax);
    for l in lmin..=lmax {
        for m in -(l as i64)..=(l as i64) {
            let z: f64 = rng.sample(StandardNormal);
            c.set(l, m, z / ((1 + l) * (1 + l)) as f64);
        }
    }
    let f = synthesize(&c, grid).expect("shape band below grid band");
    let s = f.sup_norm();
    f.map(|v| v / s)
}

/// Uniformly distributed rotation.
pub fn random_rotation(rng: &mut TestRng) -> Rotation3 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let uq = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    Rotation3::new(*uq.to_rotation_matrix().matrix()).expect("orthogonal")
}

/// Uniformly distributed unit vector.
pub fn random_unit(rng: &mut TestRng) -> Vector3<f64> {
    let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    v.normalize()
}

/// O₁ ∘ Φ_{p,t} ∘ O₂ with random rotations and t uniform in [1, `tmax`].
pub fn random_moebius(rng: &mut TestRng, tmax: f64) -> MoebiusMap {
    let t = 1.0 + (tmax - 1.0) * rng.random::<f64>();
    let o1 = MoebiusMap::from_rotation(&random_rotation(rng));
    let o2 = MoebiusMap::from_rotation(&random_rotation(rng));
    o1.compose(&MoebiusMap::scale(&Vector3::z(), t).expect("t > 0")).compose(&o2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;

    #[test]
    fn reproducible_and_normalized() {
        let g = make_grid(16).unwrap();
        let a = random_shape(&mut rng(7), &g, 2, 6);
        let b = random_shape(&mut rng(7), &g, 2, 6);
        assert_eq!(a, b);
        assert!((a.sup_norm() - 1.0).abs() < 1e-15);
        let r = random_rotation(&mut rng(3));
        assert!(r.is_proper());
        let m = random_moebius(&mut rng(1), 2.0);
        let t = m.polar_decompose().unwrap().t;
        assert!((1.0..=2.0 + 1e-9).contains(&t));
    }
}
