//! Shared inputs for the benchmarks in `benches/`.

use roundsphere::random::{random_moebius, random_shape, rng};
use roundsphere::s2field::{make_grid, ConformalMetric, ScalarField};

/// Band limits exercised by every benchmark group.
pub const BAND_LIMITS: [usize; 3] = [16, 32, 64];

/// A smooth random field of unit sup norm on the grid of band limit `l`.
pub fn sample_field(l: usize) -> ScalarField {
    let g = make_grid(l).expect("valid band limit");
    random_shape(&mut rng(7), &g, 1, 6)
}

/// A nearly round metric (‖r²K − 1‖∞ of a few percent), disguised by a
/// Möbius map so that centering has real work to do.
pub fn sample_metric(l: usize) -> ConformalMetric {
    let g = make_grid(l).expect("valid band limit");
    let mut r = rng(11);
    let shape = random_shape(&mut r, &g, 2, 6);
    let m = random_moebius(&mut r, 1.3);
    let w = roundsphere::moebius::conformal_factor_compose(
        &roundsphere::s2field::analyze(&shape.map(|v| 0.01 * v)),
        &m,
        &g,
    );
    ConformalMetric::new(1.0, w, None).expect("finite factor")
}
