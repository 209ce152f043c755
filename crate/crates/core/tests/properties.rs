//! Randomized invariants: transforms, Möbius algebra and the Onofri
//! inequality hold for arbitrary admissible inputs.

use nalgebra::Vector3;
use proptest::prelude::*;
use roundsphere::moebius::MoebiusMap;
use roundsphere::s2field::{analyze, make_grid, synthesize, SpectralCoeffs};
use roundsphere::uniformize::check_onofri;

const L: usize = 10;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, (L + 1) * (L + 1))
}

fn unit() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, p): (f64, f64)| {
        let s = (1.0 - z * z).sqrt();
        Vector3::new(s * p.cos(), s * p.sin(), z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analysis_inverts_synthesis(c in coeffs()) {
        let g = make_grid(L).unwrap();
        let c = SpectralCoeffs::from_vec(c).unwrap();
        let back = analyze(&synthesize(&c, &g).unwrap());
        for (a, b) in c.as_slice().iter().zip(back.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn moebius_inverse_and_composition_act_pointwise(
        p in unit(), q in unit(), x in unit(), s in 1.0..3.0f64, t in 1.0..3.0f64,
    ) {
        let a = MoebiusMap::scale(&p, s).unwrap();
        let b = MoebiusMap::scale(&q, t).unwrap();
        prop_assert!((a.inverse().apply(&a.apply(&x)) - x).norm() < 1e-11);
        prop_assert!((a.compose(&b).apply(&x) - a.apply(&b.apply(&x))).norm() < 1e-11);
        // Chain rule for the area Jacobian.
        let j = a.compose(&b).jacobian_det(&x);
        prop_assert!((j - a.jacobian_det(&b.apply(&x)) * b.jacobian_det(&x)).abs() < 1e-10 * j.max(1.0));
    }

    #[test]
    fn onofri_slack_is_nonnegative(c in prop::collection::vec(-0.3..0.3f64, 16)) {
        let g = make_grid(16).unwrap();
        let mut full = SpectralCoeffs::zeros(16);
        full.as_mut_slice()[..16].copy_from_slice(&c);
        prop_assert!(check_onofri(&synthesize(&full, &g).unwrap()) >= -1e-12);
    }
}
