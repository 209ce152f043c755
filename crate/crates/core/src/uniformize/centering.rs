//! Centering: the Möbius map making the centre of mass of e^{2u} vanish.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use crate::s2field::ScalarField;
use crate::tolerance::Tolerances;

/// Result of [`center`].
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringSolve {
    /// Scale parameters at the axes e₁, e₂, e₃ of the Newton stage.
    pub t: [f64; 3],
    /// Full centering map (pre-iteration composed with the Newton stage).
    pub map: MoebiusMap,
    /// Newton iterations used.
    pub iterations: usize,
    /// Damped pre-iteration steps used (zero in the small regime).
    pub pre_iterations: usize,
    /// Final |Θ(t)|.
    pub theta_norm: f64,
    /// |Θ| after every Newton iterate.
    pub trace: Vec<f64>,
}

impl CenteringSolve {
    /// (map, Newton iterations, pre-iterations).
    pub(crate) fn with_counts(self) -> (MoebiusMap, usize, usize) {
        (self.map, self.iterations, self.pre_iterations)
    }
}

/// Density samples ρᵢ = wᵢ e^{2u(xᵢ)} and nodes of a conformal factor.
struct Density {
    rho: Vec<f64>,
    nodes: Vec<Vector3<f64>>,
}

impl Density {
    fn new(u: &ScalarField) -> Self {
        let g = u.grid();
        Self {
            rho: u.values().iter().enumerate().map(|(i, v)| g.weight(i) * (2.0 * v).exp()).collect(),
            nodes: g.nodes(),
        }
    }

    /// ∫ e^{2u_Φ} x dΩ = ∫ e^{2u} Φ⁻¹(y) dΩ(y) (change of variables).
    fn moment(&self, map: &MoebiusMap) -> Vector3<f64> {
        let inv = map.inverse();
        self.rho.iter().zip(&self.nodes).fold(Vector3::zeros(), |acc, (r, y)| acc + inv.apply(y) * *r)
    }

    fn mass(&self) -> f64 {
        self.rho.iter().sum()
    }
}

fn axis_map(pre: &MoebiusMap, t: &Vector3<f64>) -> Result<MoebiusMap> {
    let s1 = MoebiusMap::scale(&Vector3::x(), t.x)?;
    let s2 = MoebiusMap::scale(&Vector3::y(), t.y)?;
    let s3 = MoebiusMap::scale(&Vector3::z(), t.z)?;
    Ok(pre.compose(&s1).compose(&s2).compose(&s3))
}

/// Θ(t) = ∫ e^{2u_Φ} x dΩ with Φ = Φ_{e₁,t₁}∘Φ_{e₂,t₂}∘Φ_{e₃,t₃}.
///
/// # Errors
/// Domain error when some tᵢ ≤ 0.
pub fn centering_theta(u: &ScalarField, t: [f64; 3]) -> Result<Vector3<f64>> {
    let d = Density::new(u);
    Ok(d.moment(&axis_map(&MoebiusMap::identity(), &Vector3::from(t))?))
}

/// Central finite-difference Jacobian dΘ at `t` with step `h`.
///
/// # Errors
/// Domain error when the stencil leaves t > 0.
pub fn centering_jacobian(u: &ScalarField, t: [f64; 3], h: f64) -> Result<Matrix3<f64>> {
    let d = Density::new(u);
    jacobian(&d, &MoebiusMap::identity(), &Vector3::from(t), h)
}

fn jacobian(d: &Density, pre: &MoebiusMap, t: &Vector3<f64>, h: f64) -> Result<Matrix3<f64>> {
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let mut tp = *t;
        let mut tm = *t;
        tp[k] += h;
        tm[k] -= h;
        let col = (d.moment(&axis_map(pre, &tp)?) - d.moment(&axis_map(pre, &tm)?)) / (2.0 * h);
        j.set_column(k, &col);
    }
    Ok(j)
}

/// Finds the Möbius map Φ with centre of mass of e^{2u_Φ} equal to zero.
///
/// In the small regime (|CM| ≤ 0.1) Newton's method is run on Θ(t) directly,
/// with step halving whenever |Θ| fails to decrease. Otherwise a damped
/// pre-iteration first composes scale maps toward the centre of mass until
/// |CM| ≤ 0.1; the number of such steps is reported in `pre_iterations`.
///
/// # Errors
/// [`Error::Centering`] when Newton does not reach |Θ| ≤ 10⁻¹⁰.
pub fn center(u: &ScalarField, tol: &Tolerances) -> Result<CenteringSolve> {
    let d = Density::new(u);
    let mass = d.mass();
    let mut pre = MoebiusMap::identity();
    let mut pre_iterations = 0;
    loop {
        let cm = d.moment(&pre) / mass;
        let n = cm.norm();
        if n <= tol.centering_small_cm {
            break;
        }
        if pre_iterations >= 200 {
            return Err(Error::Centering { iterations: 0, trace: vec![n * mass] });
        }
        // Scaling toward +CM with t > 1 moves pulled-back mass toward −CM.
        let step = MoebiusMap::scale(&(cm / n), 1.0 + tol.centering_damping * n)?;
        pre = pre.compose(&step);
        pre_iterations += 1;
    }
    let mut t = Vector3::new(1.0, 1.0, 1.0);
    let mut theta = d.moment(&pre);
    let mut trace = vec![theta.norm()];
    let mut iterations = 0;
    while theta.norm() > tol.centering_theta {
        if iterations >= tol.centering_max_iter {
            return Err(Error::Centering { iterations, trace });
        }
        iterations += 1;
        let j = jacobian(&d, &pre, &t, 1e-6)?;
        let step = j.lu().solve(&(-theta)).unwrap_or_else(|| theta * (3.0 / (8.0 * PI)));
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = t + step * alpha;
            if cand.iter().all(|v| *v > 0.0) {
                let th = d.moment(&axis_map(&pre, &cand)?);
                if th.norm() < theta.norm() {
                    accepted = Some((cand, th));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, th)) => {
                t = cand;
                theta = th;
                trace.push(theta.norm());
            }
            None => {
                // No decrease possible: we are at the rounding floor.
                trace.push(theta.norm());
                if theta.norm() <= 1e3 * tol.centering_theta {
                    break;
                }
                return Err(Error::Centering { iterations, trace });
            }
        }
    }
    Ok(CenteringSolve {
        t: [t.x, t.y, t.z],
        map: axis_map(&pre, &t)?,
        iterations,
        pre_iterations,
        theta_norm: theta.norm(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;

    #[test]
    fn centered_input_is_left_alone() {
        let g = make_grid(16).unwrap();
        let u = ScalarField::from_fn(&g, |x| 0.1 * (3.0 * x.z * x.z - 1.0));
        let c = center(&u, &Tolerances::default()).unwrap();
        assert_eq!(c.iterations, 0);
        assert_eq!(c.t, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn height_function_newton_step() {
        let g = make_grid(24).unwrap();
        let c = 0.05;
        let u = ScalarField::from_fn(&g, |x| c * x.z);
        let cm = crate::uniformize::center_of_mass(&u);
        let sol = center(&u, &Tolerances::default()).unwrap();
        assert!(sol.theta_norm <= 1e-10);
        assert!((sol.t[2] - 1.0 - 1.5 * cm.z).abs() < 5.0 * cm.z * cm.z + 1e-3 * cm.z);
        assert!((sol.t[0] - 1.0).abs() < 1e-9 && (sol.t[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_at_round_point() {
        let g = make_grid(16).unwrap();
        let j = centering_jacobian(&ScalarField::constant(&g, 0.0), [1.0, 1.0, 1.0], 1e-5).unwrap();
        assert!((j + Matrix3::identity() * (8.0 * PI / 3.0)).norm() < 1e-8);
    }

    #[test]
    fn large_offsets_use_the_pre_iteration() {
        let g = make_grid(32).unwrap();
        let u = ScalarField::from_fn(&g, |x| 0.8 * x.x - 0.3 * x.y);
        let sol = center(&u, &Tolerances::default()).unwrap();
        assert!(sol.pre_iterations > 0);
        assert!(sol.theta_norm <= 1e-10);
    }
}
