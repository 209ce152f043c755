//! Standard and canonical ℓ = 1 modes, projections and Gram matrices.
//!
//! Mode triples are ordered (0, +, −) ↔ (x³, x¹, x²). Whenever a triple is
//! read as a vector of ℝ³ (for rotation actions) the order is (x¹, x², x³);
//! see [`triple_to_vector`].

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use crate::s2field::{
    analyze, eval_at, gauss_curvature, integrate, laplace_beltrami, synthesize, ConformalMetric, GridSpec, ScalarField,
    SpectralCoeffs,
};
use crate::stability::SphereMap;
use crate::tolerance::Tolerances;
use crate::uniformize::UniformizationResult;

/// Where a mode basis comes from.
#[derive(Debug, Clone)]
pub enum Provenance {
    /// Coordinate restrictions x³, x¹, x² of the round sphere.
    Standard,
    /// J^{𝕊²}∘phi⁻¹ for a centered uniformization.
    Canonical(Box<CanonicalSource>),
    /// A named analytic family supplied by the caller.
    Background { name: String },
}

/// The parts of a uniformization that canonical modes depend on.
#[derive(Debug, Clone)]
pub struct CanonicalSource {
    /// Uniformizing map (round sphere → physical sphere).
    pub phi: SphereMap,
    /// Its Möbius part on the conformal chart.
    pub moebius: MoebiusMap,
    /// Coefficients of the centered factor u.
    pub u_coeffs: SpectralCoeffs,
    /// Area radius r^S.
    pub radius: f64,
}

/// Three ℓ = 1 mode fields J^{(0)}, J^{(+)}, J^{(−)} on one grid.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    /// Fields in (0, +, −) order.
    pub fields: [ScalarField; 3],
    /// Origin of the basis.
    pub provenance: Provenance,
}

/// (x³, x¹, x²) components of a vector, i.e. its (0, +, −) mode triple.
pub fn vector_to_triple(v: &Vector3<f64>) -> [f64; 3] {
    [v.z, v.x, v.y]
}

/// Inverse of [`vector_to_triple`]: (0, +, −) → (x¹, x², x³).
pub fn triple_to_vector(t: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(t[1], t[2], t[0])
}

fn coordinate_fields(grid: &GridSpec, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> [ScalarField; 3] {
    let pts: Vec<Vector3<f64>> = grid.nodes().iter().map(f).collect();
    let comp = |k: usize| ScalarField::new(grid, pts.iter().map(|p| p[k]).collect()).expect("finite coordinates");
    [comp(2), comp(0), comp(1)]
}

impl ModeBasis {
    /// Grid of the mode fields.
    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    /// The three modes at arbitrary points of the physical sphere, in
    /// (0, +, −) order. Canonical and standard modes are evaluated exactly;
    /// background modes by spectral synthesis.
    ///
    /// # Errors
    /// [`Error::Domain`] for non-unit points; representation errors of phi.
    pub fn eval_at(&self, points: &[Vector3<f64>]) -> Result<[Vec<f64>; 3]> {
        let coords = |pts: Vec<Vector3<f64>>| -> [Vec<f64>; 3] {
            [pts.iter().map(|p| p.z).collect(), pts.iter().map(|p| p.x).collect(), pts.iter().map(|p| p.y).collect()]
        };
        if let Some(i) = points.iter().position(|p| !((p.norm() - 1.0).abs() <= 1e-8)) {
            return Err(Error::Domain(format!("point {i} is not a unit vector")));
        }
        match &self.provenance {
            Provenance::Standard => Ok(coords(points.to_vec())),
            Provenance::Canonical(src) => {
                let inv = src.phi.inverse()?;
                Ok(coords(points.iter().map(|p| inv.apply(p)).collect::<Result<_>>()?))
            }
            Provenance::Background { .. } => Ok([
                eval_at(&analyze(&self.fields[0]), points)?,
                eval_at(&analyze(&self.fields[1]), points)?,
                eval_at(&analyze(&self.fields[2]), points)?,
            ]),
        }
    }

    /// Relabels the basis by an orthogonal map acting on the ℝ³ reading of
    /// the triple: J' = O J (pointwise, in (x¹, x², x³) order).
    pub fn relabeled(&self, o: &Matrix3<f64>) -> ModeBasis {
        let grid = self.grid();
        let vals: Vec<Vector3<f64>> = (0..grid.len())
            .map(|i| {
                let t = [self.fields[0].values()[i], self.fields[1].values()[i], self.fields[2].values()[i]];
                o * triple_to_vector(&t)
            })
            .collect();
        let comp = |k: usize| ScalarField::new(grid, vals.iter().map(|p| p[k]).collect()).expect("finite modes");
        ModeBasis {
            fields: [comp(2), comp(0), comp(1)],
            provenance: Provenance::Background { name: "relabeled".into() },
        }
    }
}

/// The standard modes J^{(0)} = x³ = cos θ, J^{(+)} = x¹, J^{(−)} = x².
pub fn standard_modes(grid: &GridSpec) -> ModeBasis {
    ModeBasis { fields: coordinate_fields(grid, |x| *x), provenance: Provenance::Standard }
}

/// Canonical modes J^{𝕊²}∘phi⁻¹ sampled at the physical grid nodes.
///
/// # Errors
/// [`Error::StaleInput`] when `res` violates its invariants.
pub fn canonical_modes(res: &UniformizationResult, tol: &Tolerances) -> Result<ModeBasis> {
    res.check_invariants(tol)?;
    let grid = res.u.grid();
    let inv = res.phi.inverse()?;
    let images = grid.nodes().iter().map(|y| inv.apply(y)).collect::<Result<Vec<_>>>()?;
    let comp = |k: usize| ScalarField::new(grid, images.iter().map(|p| p[k]).collect()).expect("finite modes");
    Ok(ModeBasis {
        fields: [comp(2), comp(0), comp(1)],
        provenance: Provenance::Canonical(Box::new(CanonicalSource {
            phi: res.phi.clone(),
            moebius: res.moebius,
            u_coeffs: res.u_coeffs.clone(),
            radius: res.radius,
        })),
    })
}

/// ℓ = 1 projections (∫ f J^{(p)} dA_g) in (0, +, −) order.
///
/// # Errors
/// [`Error::Shape`] on grid mismatch.
pub fn project_ell1(f: &ScalarField, basis: &ModeBasis, metric: &ConformalMetric) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (o, j) in out.iter_mut().zip(&basis.fields) {
        *o = integrate(&f.zip_with(j, |a, b| a * b)?, metric)?;
    }
    Ok(out)
}

/// Gram matrix ∫ J^{(p)} J^{(q)} dA_g in (0, +, −) order.
///
/// # Errors
/// [`Error::Shape`] on grid mismatch.
pub fn gram(basis: &ModeBasis, metric: &ConformalMetric) -> Result<Matrix3<f64>> {
    let mut g = Matrix3::zeros();
    for p in 0..3 {
        let row = project_ell1(&basis.fields[p], basis, metric)?;
        for q in 0..3 {
            g[(p, q)] = row[q];
        }
    }
    Ok(g)
}

fn canonical_source(basis: &ModeBasis) -> Result<&CanonicalSource> {
    match &basis.provenance {
        Provenance::Canonical(src) => Ok(src),
        _ => Err(Error::WrongProvenance("operation requires canonical modes".into())),
    }
}

/// Chart samples of the canonical modes, x∘M⁻¹, in (0, +, −) order.
fn chart_modes(grid: &GridSpec, m: &MoebiusMap) -> [ScalarField; 3] {
    let inv = m.inverse();
    coordinate_fields(grid, |z| inv.apply(z))
}

/// max_p ‖(Δ_g + 2/(r^S)²)J^{(p)} − (2/(r^S)²)(1 − e^{−2v})J^{(p)}‖_{L²(dA_g)}
/// with v = u∘phi⁻¹, computed on the conformal chart.
///
/// # Errors
/// [`Error::WrongProvenance`] for non-canonical bases.
pub fn laplacian_defect(basis: &ModeBasis, metric: &ConformalMetric) -> Result<f64> {
    let src = canonical_source(basis)?;
    let grid = metric.grid();
    let rs2 = src.radius * src.radius;
    let r2 = metric.radius() * metric.radius();
    let minv = src.moebius.inverse();
    let pre: Vec<Vector3<f64>> = grid.nodes().iter().map(|z| minv.apply(z)).collect();
    let v = eval_at(&src.u_coeffs, &pre)?;
    let w = metric.conformal_factor().values();
    let mut worst = 0.0_f64;
    for j in chart_modes(grid, &src.moebius) {
        let lap0 = synthesize(&laplace_beltrami(&analyze(&j)), grid)?;
        let mut s = 0.0;
        for i in 0..grid.len() {
            let e2w = (2.0 * w[i]).exp();
            let lap_g = lap0.values()[i] / (r2 * e2w);
            let jv = j.values()[i];
            let d = lap_g + 2.0 / rs2 * jv - 2.0 / rs2 * (1.0 - (-2.0 * v[i]).exp()) * jv;
            s += d * d * r2 * e2w * grid.weight(i);
        }
        worst = worst.max(s.sqrt());
    }
    Ok(worst)
}

/// ∫ (K − 1/(r^S)²) J^{(p,S)} dA_g for the canonical modes of `res`, in
/// (0, +, −) order; computed on the conformal chart.
///
/// # Errors
/// [`Error::Shape`] when `res` belongs to another grid.
pub fn curvature_mode_cancellation(metric: &ConformalMetric, res: &UniformizationResult) -> Result<[f64; 3]> {
    let grid = metric.grid();
    if !grid.same_as(res.u.grid()) {
        return Err(Error::Shape("result and metric grids differ".into()));
    }
    let chart = ConformalMetric::new(metric.radius(), metric.conformal_factor().clone(), None)?;
    let k = gauss_curvature(&chart);
    let dk = k.map(|v| v - 1.0 / (res.radius * res.radius));
    let modes = chart_modes(grid, &res.moebius);
    let mut out = [0.0; 3];
    for (o, j) in out.iter_mut().zip(&modes) {
        *o = integrate(&dk.zip_with(j, |a, b| a * b)?, &chart)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s2field::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn standard_gram_and_projections() {
        let g = make_grid(8).unwrap();
        let b = standard_modes(&g);
        let m = ConformalMetric::round(&g, 1.0).unwrap();
        let gr = gram(&b, &m).unwrap();
        assert!((gr - Matrix3::identity() * (4.0 * PI / 3.0)).norm() < 1e-12);
        let p = project_ell1(&ScalarField::from_fn(&g, |x| x.z), &b, &m).unwrap();
        assert!((p[0] - 4.0 * PI / 3.0).abs() < 1e-12 && p[1].abs() < 1e-14 && p[2].abs() < 1e-14);
        assert_eq!(b.fields[0].values()[0], g.node(0).z);
    }

    #[test]
    fn vector_triple_roundtrip() {
        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(vector_to_triple(&v), [3.0, 1.0, 2.0]);
        assert_eq!(triple_to_vector(&vector_to_triple(&v)), v);
    }
}
