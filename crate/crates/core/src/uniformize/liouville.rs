//! Newton–Krylov solver for the Liouville equation Δ₀u + r² K e^{2u} = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::gmres;
use crate::moebius::conformal_factor_compose;
use crate::s2field::{
    analyze, analyze_values, eval_unchecked, laplace_beltrami, synthesize, ScalarField, SpectralCoeffs,
};
use crate::tolerance::Tolerances;
use crate::uniformize::centering::{center, CenteringSolve};

/// Result of [`solve_liouville`].
#[derive(Debug, Clone)]
pub struct LiouvilleSolution {
    /// Centered conformal factor u = ũ_M.
    pub u: ScalarField,
    /// Chart solution ũ of Δ₀ũ + r²K e^{2ũ} = 1 before centering.
    pub raw: ScalarField,
    /// Harmonic coefficients of the chart solution.
    pub raw_coeffs: SpectralCoeffs,
    /// The centering step applied to the chart solution.
    pub centering: CenteringSolve,
    /// Newton iterations of the chart solve.
    pub newton_iters: usize,
    /// Galerkin residual norm after every Newton iterate.
    pub residual_history: Vec<f64>,
    /// Grid L² residual of Δ₀u + r²(K∘M) e^{2u} − 1 for the centered u.
    pub residual: f64,
}

/// Output of the chart Newton solve.
#[derive(Debug, Clone)]
pub(crate) struct ChartSolve {
    pub coeffs: SpectralCoeffs,
    pub iterations: usize,
    pub krylov_iterations: usize,
    pub history: Vec<f64>,
}

/// Checks the almost-round trust region and the total-curvature proxy.
pub(crate) fn check_curvature(k: &ScalarField, radius: f64, tol: &Tolerances) -> Result<()> {
    let r2 = radius * radius;
    let dev = k.values().iter().fold(0.0_f64, |acc, v| acc.max((r2 * v - 1.0).abs()));
    if !(dev <= tol.trust_region) {
        return Err(Error::AlmostRoundViolation {
            reason: format!("‖r²K − 1‖∞ = {dev:.3e} exceeds the trust region {}", tol.trust_region),
            history: Vec::new(),
        });
    }
    let g = k.grid();
    let mean: f64 = k.values().iter().enumerate().map(|(i, v)| r2 * v * g.weight(i)).sum::<f64>() / (4.0 * PI);
    if (mean - 1.0).abs() > tol.total_curvature {
        return Err(Error::Inconsistency(format!(
            "total curvature proxy (1/4π)∫r²K dΩ = {mean:.6} deviates from 1 by more than {}",
            tol.total_curvature
        )));
    }
    Ok(())
}

fn galerkin_residual(kc: &ScalarField, r2: f64, c: &SpectralCoeffs) -> (SpectralCoeffs, Vec<f64>) {
    let grid = kc.grid();
    let u = synthesize(c, grid).expect("band limit of the grid");
    let e2u: Vec<f64> = u.values().iter().map(|v| (2.0 * v).exp()).collect();
    let src: Vec<f64> = kc.values().iter().zip(&e2u).map(|(k, e)| r2 * k * e - 1.0).collect();
    let f = laplace_beltrami(c).add(&analyze_values(grid, &src, c.band_limit()));
    (f, e2u)
}

/// Newton's method on the Galerkin system, started from `seed`; linear
/// steps by right-preconditioned GMRES with the diagonal preconditioner
/// (2 − ℓ(ℓ+1))⁻¹ off the near-kernel ℓ = 1.
pub(crate) fn newton_chart(k: &ScalarField, radius: f64, seed: SpectralCoeffs, tol: &Tolerances) -> Result<ChartSolve> {
    let grid = k.grid().clone();
    let r2 = radius * radius;
    let lmax = seed.band_limit();
    let precond: Vec<f64> = (0..(lmax + 1) * (lmax + 1))
        .map(|i| {
            let l = SpectralCoeffs::degree_of(i) as f64;
            if l == 1.0 {
                1.0
            } else {
                1.0 / (2.0 - l * (l + 1.0))
            }
        })
        .collect();
    let mut c = seed;
    let (mut f, mut e2u) = galerkin_residual(k, r2, &c);
    let mut history = vec![f.l2_norm()];
    let mut iterations = 0;
    let mut krylov_iterations = 0;
    while f.l2_norm() > tol.liouville_residual {
        if iterations >= tol.liouville_max_iter {
            return Err(Error::AlmostRoundViolation {
                reason: format!("Newton did not converge in {iterations} iterations"),
                history,
            });
        }
        iterations += 1;
        let pot: Vec<f64> = k.values().iter().zip(&e2u).map(|(kv, e)| 2.0 * r2 * kv * e).collect();
        let apply = |v: &[f64]| -> Vec<f64> {
            let vc = SpectralCoeffs::from_vec(v.to_vec()).expect("square length");
            let vf = synthesize(&vc, &grid).expect("band limit of the grid");
            let prod: Vec<f64> = vf.values().iter().zip(&pot).map(|(a, b)| a * b).collect();
            let out = laplace_beltrami(&vc).add(&analyze_values(&grid, &prod, lmax));
            out.as_slice().to_vec()
        };
        let rhs: Vec<f64> = f.as_slice().iter().map(|v| -v).collect();
        let norm = f.l2_norm();
        let lin = gmres(
            apply,
            |x| x.iter_mut().zip(&precond).for_each(|(a, p)| *a *= p),
            &rhs,
            (1e-9 * norm).max(1e-16),
            80,
            20,
        );
        krylov_iterations += lin.iterations;
        if !lin.residual.is_finite() {
            return Err(Error::AlmostRoundViolation { reason: "Krylov solve broke down".into(), history });
        }
        let step = SpectralCoeffs::from_vec(lin.x).expect("square length");
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = c.add(&step.scaled(alpha));
            let (fc, ec) = galerkin_residual(k, r2, &cand);
            if fc.l2_norm() < norm {
                c = cand;
                f = fc;
                e2u = ec;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        history.push(f.l2_norm());
        if !accepted {
            // Stagnation at the rounding floor is success; anything else is not.
            if norm <= 1e3 * tol.liouville_residual {
                break;
            }
            return Err(Error::AlmostRoundViolation {
                reason: "line search failed to reduce the residual".into(),
                history,
            });
        }
    }
    Ok(ChartSolve { coeffs: c, iterations, krylov_iterations, history })
}

/// Grid L² residual of Δ₀u + r²(K∘M) e^{2u} − 1 where `k_at` holds K∘M at
/// the nodes.
pub(crate) fn grid_residual(u: &ScalarField, u_coeffs: &SpectralCoeffs, k_at: &[f64], radius: f64) -> f64 {
    let grid = u.grid();
    let lap = synthesize(&laplace_beltrami(u_coeffs), grid).expect("band limit of the grid");
    let r2 = radius * radius;
    let s: f64 = (0..grid.len())
        .map(|i| {
            let res = lap.values()[i] + r2 * k_at[i] * (2.0 * u.values()[i]).exp() - 1.0;
            grid.weight(i) * res * res
        })
        .sum();
    s.sqrt()
}

/// Solves Δ₀u + r² K e^{2u} = 1 from the round seed u = 0 and returns the
/// centered representative u = ũ_M, which solves the equation with K∘M.
///
/// # Errors
/// [`Error::AlmostRoundViolation`] outside the trust region ‖r²K − 1‖∞ ≤ 0.3
/// or when Newton fails within 50 iterations (with the residual history);
/// [`Error::Inconsistency`] when (1/4π)∫r²K dΩ deviates from 1 by more than 1%;
/// [`Error::Centering`] when centering the solution fails.
pub fn solve_liouville(k: &ScalarField, radius: f64, tol: &Tolerances) -> Result<LiouvilleSolution> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius {radius} must be positive")));
    }
    check_curvature(k, radius, tol)?;
    let grid = k.grid();
    let chart = newton_chart(k, radius, SpectralCoeffs::zeros(grid.band_limit()), tol)?;
    let raw = synthesize(&chart.coeffs, grid)?;
    let centering = center(&raw, tol)?;
    let u = conformal_factor_compose(&chart.coeffs, &centering.map, grid);
    let u_coeffs = analyze(&u);
    let images: Vec<_> = grid.nodes().iter().map(|x| centering.map.apply(x)).collect();
    let k_at = eval_unchecked(&analyze(k), &images);
    let residual = grid_residual(&u, &u_coeffs, &k_at, radius);
    Ok(LiouvilleSolution {
        u,
        raw,
        raw_coeffs: chart.coeffs,
        centering,
        newton_iters: chart.iterations,
        residual_history: chart.history,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::{gauss_curvature, make_grid, ConformalMetric};

    #[test]
    fn round_curvature_gives_zero() {
        let g = make_grid(16).unwrap();
        let s = solve_liouville(&ScalarField::constant(&g, 1.0), 1.0, &Tolerances::default()).unwrap();
        assert!(s.u.sup_norm() < 1e-12);
        assert_eq!(s.newton_iters, 0);
    }

    #[test]
    fn manufactured_centered_solution_is_recovered() {
        let g = make_grid(32).unwrap();
        // 0.1 Y₂₀ is centered by reflection symmetry.
        let ustar = ScalarField::from_fn(&g, |x| 0.1 * (5.0 / (16.0 * PI)).sqrt() * (3.0 * x.z * x.z - 1.0));
        let metric = ConformalMetric::new(1.0, ustar.clone(), None).unwrap();
        let k = gauss_curvature(&metric);
        let s = solve_liouville(&k, 1.0, &Tolerances::default()).unwrap();
        assert!(s.u.max_abs_diff(&ustar).unwrap() < 1e-9);
        assert!(s.residual < 1e-9);
    }

    #[test]
    fn rejects_far_from_round_and_wrong_total_curvature() {
        let g = make_grid(8).unwrap();
        let tol = Tolerances::default();
        assert!(matches!(
            solve_liouville(&ScalarField::constant(&g, 2.0), 1.0, &tol),
            Err(Error::AlmostRoundViolation { .. })
        ));
        assert!(matches!(solve_liouville(&ScalarField::constant(&g, 1.2), 1.0, &tol), Err(Error::Inconsistency(_))));
    }
}
