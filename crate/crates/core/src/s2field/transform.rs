//! Spherical-harmonic analysis, synthesis and pointwise evaluation.
//!
//! The longitude transform is a direct DFT per ring; the colatitude sums use
//! the Legendre recurrence evaluated on the fly. Parallel loops only ever
//! partition independent outputs, and every reduction runs in a fixed
//! sequential order, so results are bit-identical for any thread count.

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::s2field::field::{lm_index, ScalarField, SpectralCoeffs};
use crate::s2field::grid::GridSpec;
use crate::s2field::legendre::{recurrence, tri_len, tri_offset};

/// Per-ring Fourier sums Σ_k f cos(mφ_k) and Σ_k f sin(mφ_k), m = 0..=L.
fn ring_dft(grid: &GridSpec, values: &[f64], lmax: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n_phi = grid.n_phi();
    (0..grid.n_theta())
        .into_par_iter()
        .map(|j| {
            let row = &values[j * n_phi..(j + 1) * n_phi];
            let mut a = vec![0.0; lmax + 1];
            let mut b = vec![0.0; lmax + 1];
            for m in 0..=lmax {
                let (c, s) = (grid.cos_mphi(m), grid.sin_mphi(m));
                let mut sa = 0.0;
                let mut sb = 0.0;
                for k in 0..n_phi {
                    sa += row[k] * c[k];
                    sb += row[k] * s[k];
                }
                a[m] = sa;
                b[m] = sb;
            }
            (a, b)
        })
        .collect()
}

/// Sectoral values p_mm for each ring.
fn ring_sectorals(grid: &GridSpec, lmax: usize) -> Vec<Vec<f64>> {
    let rec = recurrence(lmax);
    (0..grid.n_theta())
        .map(|j| {
            let mut pmm = vec![0.0; lmax + 1];
            rec.sectoral(grid.sin_theta(j), &mut pmm);
            pmm
        })
        .collect()
}

/// Projects grid samples onto the real orthonormal harmonics of degree ≤ L,
/// where L is the grid's band limit.
pub fn analyze(f: &ScalarField) -> SpectralCoeffs {
    analyze_values(f.grid(), f.values(), f.grid().band_limit())
}

/// Projection onto harmonics of degree ≤ `lmax` (`lmax ≤` grid band limit).
pub(crate) fn analyze_values(grid: &GridSpec, values: &[f64], lmax: usize) -> SpectralCoeffs {
    let lmax = lmax.min(grid.band_limit());
    let dft = ring_dft(grid, values, lmax);
    let sect = ring_sectorals(grid, lmax);
    let rec = recurrence(lmax);
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..=lmax)
        .into_par_iter()
        .map(|m| {
            let n = lmax - m + 1;
            let mut cc = vec![0.0; n];
            let mut cs = vec![0.0; n];
            let mut p = vec![0.0; n];
            for j in 0..grid.n_theta() {
                rec.column(m, grid.cos_theta(j), sect[j][m], &mut p);
                let w = grid.ring_weight(j);
                let (a, b) = (dft[j].0[m] * w, dft[j].1[m] * w);
                for i in 0..n {
                    cc[i] += p[i] * a;
                    cs[i] += p[i] * b;
                }
            }
            (cc, cs)
        })
        .collect();
    let mut out = SpectralCoeffs::zeros(lmax);
    let c = out.as_mut_slice();
    for (m, (cc, cs)) in columns.iter().enumerate() {
        for (i, (&vc, &vs)) in cc.iter().zip(cs).enumerate() {
            let l = m + i;
            if m == 0 {
                c[lm_index(l, 0)] = vc;
            } else {
                c[lm_index(l, m as i64)] = SQRT_2 * vc;
                c[lm_index(l, -(m as i64))] = SQRT_2 * vs;
            }
        }
    }
    out
}

fn check_band(c: &SpectralCoeffs, grid: &GridSpec) -> Result<()> {
    if c.band_limit() > grid.band_limit() {
        Err(Error::Shape(format!(
            "coefficients of band limit {} exceed grid band limit {}",
            c.band_limit(),
            grid.band_limit()
        )))
    } else {
        Ok(())
    }
}

/// Per-ring Fourier amplitudes (A_m, B_m) of Σ_l c_lm p_lm (or of its
/// θ-derivative when `derivative` is set), including the √2 factor.
fn ring_amplitudes(
    c: &SpectralCoeffs,
    x: f64,
    s: f64,
    derivative: bool,
    pmm: &mut [f64],
    p: &mut [f64],
    dp: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let lmax = c.band_limit();
    let rec = recurrence(lmax);
    rec.sectoral(s, pmm);
    let mut am = vec![0.0; lmax + 1];
    let mut bm = vec![0.0; lmax + 1];
    let coeffs = c.as_slice();
    for m in 0..=lmax {
        let n = lmax - m + 1;
        rec.column(m, x, pmm[m], &mut p[..n]);
        let vals: &[f64] = if derivative {
            rec.column_dtheta(m, x, s, &p[..n], &mut dp[..n]);
            &dp[..n]
        } else {
            &p[..n]
        };
        let (mut sa, mut sb) = (0.0, 0.0);
        for (i, &v) in vals.iter().enumerate() {
            let l = m + i;
            if m == 0 {
                sa += v * coeffs[lm_index(l, 0)];
            } else {
                sa += v * coeffs[lm_index(l, m as i64)];
                sb += v * coeffs[lm_index(l, -(m as i64))];
            }
        }
        if m == 0 {
            am[0] = sa;
        } else {
            am[m] = SQRT_2 * sa;
            bm[m] = SQRT_2 * sb;
        }
    }
    (am, bm)
}

/// Which function of the Fourier amplitudes a ring synthesis produces.
#[derive(Clone, Copy, PartialEq)]
enum RingOutput {
    Value,
    DTheta,
    DPhiOverSin,
}

fn synthesize_kind(c: &SpectralCoeffs, grid: &GridSpec, kind: RingOutput) -> Vec<f64> {
    let lmax = c.band_limit();
    let n_phi = grid.n_phi();
    let rows: Vec<Vec<f64>> = (0..grid.n_theta())
        .into_par_iter()
        .map(|j| {
            let mut pmm = vec![0.0; lmax + 1];
            let mut p = vec![0.0; lmax + 1];
            let mut dp = vec![0.0; lmax + 1];
            let (x, s) = (grid.cos_theta(j), grid.sin_theta(j));
            let (am, bm) = ring_amplitudes(c, x, s, kind == RingOutput::DTheta, &mut pmm, &mut p, &mut dp);
            let mut row = vec![0.0; n_phi];
            match kind {
                RingOutput::Value | RingOutput::DTheta => {
                    row.iter_mut().for_each(|v| *v = am[0]);
                    for m in 1..=lmax {
                        let (cm, sm) = (grid.cos_mphi(m), grid.sin_mphi(m));
                        for k in 0..n_phi {
                            row[k] += am[m] * cm[k] + bm[m] * sm[k];
                        }
                    }
                }
                RingOutput::DPhiOverSin => {
                    for m in 1..=lmax {
                        let (cm, sm) = (grid.cos_mphi(m), grid.sin_mphi(m));
                        let f = m as f64 / s;
                        for k in 0..n_phi {
                            row[k] += f * (bm[m] * cm[k] - am[m] * sm[k]);
                        }
                    }
                }
            }
            row
        })
        .collect();
    rows.concat()
}

/// Evaluates coefficients at every node of `grid`.
///
/// # Errors
/// [`Error::Shape`] when the coefficient band limit exceeds the grid's.
pub fn synthesize(c: &SpectralCoeffs, grid: &GridSpec) -> Result<ScalarField> {
    check_band(c, grid)?;
    Ok(ScalarField::from_values_unchecked(grid, synthesize_kind(c, grid, RingOutput::Value)))
}

/// Band-limited resampling: coefficients are truncated to the target grid's
/// band limit (or zero padded) before synthesis.
pub fn resample(c: &SpectralCoeffs, grid: &GridSpec) -> ScalarField {
    let c = if c.band_limit() > grid.band_limit() { c.with_band_limit(grid.band_limit()) } else { c.clone() };
    ScalarField::from_values_unchecked(grid, synthesize_kind(&c, grid, RingOutput::Value))
}

/// Tangential gradient of the represented function at the grid nodes,
/// returned as the frame components (∂_θ f, (1/sin θ) ∂_φ f).
///
/// # Errors
/// [`Error::Shape`] when the coefficient band limit exceeds the grid's.
pub fn gradient_frame(c: &SpectralCoeffs, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    check_band(c, grid)?;
    Ok((synthesize_kind(c, grid, RingOutput::DTheta), synthesize_kind(c, grid, RingOutput::DPhiOverSin)))
}

/// Tangential gradient as ambient Cartesian components `[g_x, g_y, g_z]`.
///
/// # Errors
/// [`Error::Shape`] when the coefficient band limit exceeds the grid's.
pub fn gradient_ambient(c: &SpectralCoeffs, grid: &GridSpec) -> Result<[Vec<f64>; 3]> {
    let (dt, dp) = gradient_frame(c, grid)?;
    let mut out = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for i in 0..grid.len() {
        let g = grid.e_theta(i) * dt[i] + grid.e_phi(i) * dp[i];
        for a in 0..3 {
            out[a][i] = g[a];
        }
    }
    Ok(out)
}

/// Weak-form projection ∫ [f_θ (1/sin θ) ∂_φ Y_lm − f_φ ∂_θ Y_lm] dΩ for
/// frame components (f_θ, f_φ) of a tangent field. For a 1-form these are the
/// harmonic coefficients of its scalar curl; the ℓ = 0 entry is exactly zero.
pub(crate) fn analyze_curl(grid: &GridSpec, f_theta: &[f64], f_phi: &[f64]) -> SpectralCoeffs {
    let lmax = grid.band_limit();
    let dt = ring_dft(grid, f_theta, lmax);
    let dp = ring_dft(grid, f_phi, lmax);
    let sect = ring_sectorals(grid, lmax);
    let rec = recurrence(lmax);
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..=lmax)
        .into_par_iter()
        .map(|m| {
            let n = lmax - m + 1;
            let mut cc = vec![0.0; n];
            let mut cs = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mf = m as f64;
            for j in 0..grid.n_theta() {
                let (x, s) = (grid.cos_theta(j), grid.sin_theta(j));
                rec.column(m, x, sect[j][m], &mut p);
                rec.column_dtheta(m, x, s, &p, &mut d);
                let w = grid.ring_weight(j);
                let (at, bt) = (dt[j].0[m], dt[j].1[m]);
                let (ap, bp) = (dp[j].0[m], dp[j].1[m]);
                for i in 0..n {
                    // cos(mφ) harmonic: ∂_φ → −m sin; sin(mφ) harmonic: ∂_φ → m cos.
                    cc[i] += w * (-mf * p[i] / s * bt - d[i] * ap);
                    cs[i] += w * (mf * p[i] / s * at - d[i] * bp);
                }
            }
            (cc, cs)
        })
        .collect();
    let mut out = SpectralCoeffs::zeros(lmax);
    let c = out.as_mut_slice();
    for (m, (cc, cs)) in columns.iter().enumerate() {
        for (i, (&vc, &vs)) in cc.iter().zip(cs).enumerate() {
            let l = m + i;
            if l == 0 {
                continue;
            }
            if m == 0 {
                c[lm_index(l, 0)] = vc;
            } else {
                c[lm_index(l, m as i64)] = SQRT_2 * vc;
                c[lm_index(l, -(m as i64))] = SQRT_2 * vs;
            }
        }
    }
    out
}

/// Evaluates coefficients at arbitrary unit vectors.
///
/// # Errors
/// [`Error::Domain`] when a point deviates from the unit sphere by more
/// than 10⁻⁸.
pub fn eval_at(c: &SpectralCoeffs, points: &[Vector3<f64>]) -> Result<Vec<f64>> {
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| (p.norm() - 1.0).abs() > 1e-8) {
        return Err(Error::Domain(format!("point {i} has norm {} (not a unit vector)", p.norm())));
    }
    Ok(eval_unchecked(c, points))
}

/// Pointwise synthesis without the unit-norm check (points are normalized).
pub(crate) fn eval_unchecked(c: &SpectralCoeffs, points: &[Vector3<f64>]) -> Vec<f64> {
    let lmax = c.band_limit();
    points
        .par_iter()
        .map_init(
            || (vec![0.0; lmax + 1], vec![0.0; tri_len(lmax)]),
            |(pmm, table), x| {
                let x = x.normalize();
                let rho = (x.x * x.x + x.y * x.y).sqrt();
                let phi = x.y.atan2(x.x);
                let rec = recurrence(lmax);
                rec.table(x.z.clamp(-1.0, 1.0), rho, pmm, table);
                let coeffs = c.as_slice();
                let mut sum = 0.0;
                for m in 0..=lmax {
                    let off = tri_offset(lmax, m);
                    let (cm, sm) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
                    for l in m..=lmax {
                        let p = table[off + l - m];
                        if m == 0 {
                            sum += p * coeffs[lm_index(l, 0)];
                        } else {
                            sum += SQRT_2
                                * p
                                * (cm * coeffs[lm_index(l, m as i64)] + sm * coeffs[lm_index(l, -(m as i64))]);
                        }
                    }
                }
                sum
            },
        )
        .collect()
}

/// Laplace–Beltrami operator of the unit round sphere: c_lm ↦ −l(l+1) c_lm.
pub fn laplace_beltrami(c: &SpectralCoeffs) -> SpectralCoeffs {
    let mut out = c.clone();
    for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
        let l = SpectralCoeffs::degree_of(i) as f64;
        *v *= -l * (l + 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_coeffs(l: usize, seed: u64) -> SpectralCoeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = SpectralCoeffs::zeros(l);
        c.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        c
    }

    #[test]
    fn constant_field_has_only_the_monopole() {
        let g = make_grid(10).unwrap();
        let c = analyze(&ScalarField::constant(&g, 1.0));
        assert!((c.get(0, 0) - (4.0 * PI).sqrt()).abs() < 1e-13);
        for i in 1..c.as_slice().len() {
            assert!(c.as_slice()[i].abs() < 1e-13);
        }
    }

    #[test]
    fn coordinate_functions_are_degree_one_harmonics() {
        let g = make_grid(8).unwrap();
        let k = (4.0 * PI / 3.0).sqrt();
        let cz = analyze(&ScalarField::from_fn(&g, |x| x.z));
        let cx = analyze(&ScalarField::from_fn(&g, |x| x.x));
        let cy = analyze(&ScalarField::from_fn(&g, |x| x.y));
        assert!((cz.get(1, 0) - k).abs() < 1e-13);
        assert!((cx.get(1, 1) - k).abs() < 1e-13);
        assert!((cy.get(1, -1) - k).abs() < 1e-13);
        let total: f64 = cz.as_slice().iter().map(|v| v * v).sum();
        assert!((total - k * k).abs() < 1e-12);
    }

    #[test]
    fn synthesis_then_analysis_is_identity() {
        let g = make_grid(32).unwrap();
        let c = random_coeffs(32, 7);
        let back = analyze(&synthesize(&c, &g).unwrap());
        let err = c.as_slice().iter().zip(back.as_slice()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn band_mismatch_is_a_shape_error() {
        let g = make_grid(8).unwrap();
        assert!(matches!(synthesize(&SpectralCoeffs::zeros(9), &g), Err(Error::Shape(_))));
    }

    #[test]
    fn pointwise_evaluation_matches_grid_synthesis() {
        let g = make_grid(20).unwrap();
        let c = random_coeffs(20, 3);
        let f = synthesize(&c, &g).unwrap();
        let v = eval_at(&c, &g.nodes()).unwrap();
        for (a, b) in f.values().iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(eval_at(&c, &[Vector3::new(1.0, 1.0, 0.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluation_at_poles_and_equator() {
        let g = make_grid(6).unwrap();
        let cz = analyze(&ScalarField::from_fn(&g, |x| x.z));
        let cx = analyze(&ScalarField::from_fn(&g, |x| x.x));
        assert!((eval_at(&cz, &[Vector3::z()]).unwrap()[0] - 1.0).abs() < 1e-13);
        assert!((eval_at(&cx, &[Vector3::x()]).unwrap()[0] - 1.0).abs() < 1e-13);
        assert!((eval_at(&cx, &[-Vector3::z()]).unwrap()[0]).abs() < 1e-13);
    }

    #[test]
    fn gradient_of_height_function() {
        // ∇ cos θ = −sin θ e_θ.
        let g = make_grid(8).unwrap();
        let c = analyze(&ScalarField::from_fn(&g, |x| x.z));
        let (dt, dp) = gradient_frame(&c, &g).unwrap();
        for i in 0..g.len() {
            let (th, _) = g.angles(i);
            assert!((dt[i] + th.sin()).abs() < 1e-13);
            assert!(dp[i].abs() < 1e-13);
        }
        // ∇ x¹ in ambient components is e₁ − x¹ x.
        let c = analyze(&ScalarField::from_fn(&g, |x| x.x));
        let grad = gradient_ambient(&c, &g).unwrap();
        for i in 0..g.len() {
            let x = g.node(i);
            let expect = Vector3::x() - x * x.x;
            for a in 0..3 {
                assert!((grad[a][i] - expect[a]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn laplacian_scales_by_eigenvalue() {
        let mut c = SpectralCoeffs::zeros(4);
        c.set(3, 2, 1.0);
        c.set(0, 0, 1.0);
        let d = laplace_beltrami(&c);
        assert_eq!(d.get(3, 2), -12.0);
        assert_eq!(d.get(0, 0), 0.0);
    }
}
