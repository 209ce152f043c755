//! Scalar fields, spherical-harmonic coefficient vectors and 1-forms.

use crate::error::{Error, Result};
use crate::s2field::grid::GridSpec;

/// Index of `(l, m)` in a coefficient vector, `-l ≤ m ≤ l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Real-valued function sampled on the nodes of a grid (θ-major order).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps node values; checks the length and finiteness.
    ///
    /// # Errors
    /// [`Error::Shape`] for a length mismatch, [`Error::Domain`] for
    /// non-finite entries.
    pub fn new(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("field has {} values, grid has {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Constant field.
    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples a function of the node position.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(nalgebra::Vector3<f64>) -> f64) -> Self {
        Self { grid: grid.clone(), values: (0..grid.len()).map(|i| f(grid.node(i))).collect() }
    }

    /// Samples a function of (θ, φ).
    pub fn from_angles(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len())
                .map(|i| {
                    let (t, p) = grid.angles(i);
                    f(t, p)
                })
                .collect(),
        }
    }

    pub(crate) fn from_values_unchecked(grid: &GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    /// The grid the samples live on.
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Node values in storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Consumes the field, returning its values.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `f` node by node.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Combines two fields on the same grid node by node.
    ///
    /// # Errors
    /// [`Error::Shape`] when the grids differ.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest absolute value.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute node-wise difference to another field on the same grid.
    ///
    /// # Errors
    /// [`Error::Shape`] when the grids differ.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Shape(format!("grid mismatch: L={} vs L={}", self.grid.band_limit(), other.grid.band_limit())))
        }
    }
}

/// Real orthonormal spherical-harmonic coefficients `c_lm`, `0 ≤ l ≤ L`.
///
/// Stored flat with `(l, m)` at index `l² + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    band_limit: usize,
    coeffs: Vec<f64>,
}

impl SpectralCoeffs {
    /// All-zero coefficients for band limit `L`.
    pub fn zeros(band_limit: usize) -> Self {
        Self { band_limit, coeffs: vec![0.0; (band_limit + 1) * (band_limit + 1)] }
    }

    /// Wraps a flat coefficient vector of length `(L + 1)²`.
    ///
    /// # Errors
    /// [`Error::Shape`] when the length is not a perfect square.
    pub fn from_vec(coeffs: Vec<f64>) -> Result<Self> {
        let n = (coeffs.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != coeffs.len() {
            return Err(Error::Shape(format!("{} is not a valid coefficient count", coeffs.len())));
        }
        Ok(Self { band_limit: n - 1, coeffs })
    }

    /// Band limit `L`.
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Flat coefficient slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mutable flat coefficient slice.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of `Y_lm` (zero when `l > L`).
    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.band_limit || m.unsigned_abs() as usize > l {
            0.0
        } else {
            self.coeffs[lm_index(l, m)]
        }
    }

    /// Sets the coefficient of `Y_lm`.
    ///
    /// # Panics
    /// When `l > L` or `|m| > l`.
    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        assert!(l <= self.band_limit && m.unsigned_abs() as usize <= l, "({l},{m}) out of range");
        self.coeffs[lm_index(l, m)] = value;
    }

    /// Copy with band limit `new_l`, zero padded or truncated.
    pub fn with_band_limit(&self, new_l: usize) -> Self {
        let mut out = Self::zeros(new_l);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { band_limit: self.band_limit, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Coefficient-wise sum; the result has the larger band limit.
    pub fn add(&self, other: &SpectralCoeffs) -> Self {
        let l = self.band_limit.max(other.band_limit);
        let mut out = self.with_band_limit(l);
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += c;
        }
        out
    }

    /// L² norm of the represented function (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Degree `l` of flat index `i`.
    pub fn degree_of(i: usize) -> usize {
        (i as f64).sqrt().floor() as usize
    }
}

/// Tangential 1-form given by its components in the unit orthonormal frame
/// (e_θ, e_φ) of the round unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    grid: GridSpec,
    b_theta: Vec<f64>,
    b_phi: Vec<f64>,
}

impl OneForm {
    /// Wraps frame components; checks lengths and finiteness.
    ///
    /// # Errors
    /// [`Error::Shape`] / [`Error::Domain`] as for [`ScalarField::new`].
    pub fn new(grid: &GridSpec, b_theta: Vec<f64>, b_phi: Vec<f64>) -> Result<Self> {
        ScalarField::new(grid, b_theta.clone())?;
        ScalarField::new(grid, b_phi.clone())?;
        Ok(Self { grid: grid.clone(), b_theta, b_phi })
    }

    /// The zero form.
    pub fn zero(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), b_theta: vec![0.0; grid.len()], b_phi: vec![0.0; grid.len()] }
    }

    /// Builds a form from an ambient (Cartesian) tangent vector field.
    pub fn from_ambient(grid: &GridSpec, f: impl Fn(nalgebra::Vector3<f64>) -> nalgebra::Vector3<f64>) -> Self {
        let mut b_theta = Vec::with_capacity(grid.len());
        let mut b_phi = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let v = f(grid.node(i));
            b_theta.push(v.dot(&grid.e_theta(i)));
            b_phi.push(v.dot(&grid.e_phi(i)));
        }
        Self { grid: grid.clone(), b_theta, b_phi }
    }

    /// The grid of the components.
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// e_θ components.
    pub fn b_theta(&self) -> &[f64] {
        &self.b_theta
    }

    /// e_φ components.
    pub fn b_phi(&self) -> &[f64] {
        &self.b_phi
    }

    /// Largest pointwise frame norm.
    pub fn sup_norm(&self) -> f64 {
        self.b_theta.iter().zip(&self.b_phi).fold(0.0, |acc, (a, b)| acc.max((a * a + b * b).sqrt()))
    }
}
