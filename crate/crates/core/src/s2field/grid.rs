//! Gauss–Legendre × equispaced-longitude quadrature grids on the unit sphere.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::Vector3;
use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Smallest band limit accepted by [`make_grid`].
pub const MIN_BAND_LIMIT: usize = 4;
/// Largest band limit accepted by [`make_grid`].
pub const MAX_BAND_LIMIT: usize = 256;
/// Largest band limit used for internal refinement grids.
pub(crate) const MAX_INTERNAL_BAND_LIMIT: usize = 640;

static GRID_CACHE: LazyLock<Mutex<HashMap<usize, GridSpec>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Quadrature grid with `n_theta = L + 1` Gauss–Legendre colatitudes and
/// `n_phi = 2L + 2` equispaced longitudes.
///
/// Values on the grid are stored θ-major: node `(j, k)` lives at index
/// `j * n_phi + k`. The grid integrates every spherical harmonic of degree at
/// most `2L` exactly. Cloning is cheap (shared, immutable storage).
#[derive(Clone)]
pub struct GridSpec {
    inner: Arc<GridData>,
}

struct GridData {
    band_limit: usize,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    phi: Vec<f64>,
    ring_weight: Vec<f64>,
    /// cos(m φ_k) at index `m * n_phi + k`, for m in 0..=L.
    cos_mphi: Vec<f64>,
    /// sin(m φ_k) at index `m * n_phi + k`.
    sin_mphi: Vec<f64>,
}

/// Builds (or fetches from the process-wide cache) the grid for band limit `L`.
///
/// # Errors
/// [`Error::Config`] when `L` lies outside `[4, 256]`.
pub fn make_grid(band_limit: usize) -> Result<GridSpec> {
    if !(MIN_BAND_LIMIT..=MAX_BAND_LIMIT).contains(&band_limit) {
        return Err(Error::Config(format!("band limit {band_limit} outside [{MIN_BAND_LIMIT}, {MAX_BAND_LIMIT}]")));
    }
    Ok(GridSpec::cached(band_limit))
}

impl GridSpec {
    /// Grid used for internal refinement; band limits up to 640 are allowed.
    pub(crate) fn internal(band_limit: usize) -> GridSpec {
        let l = band_limit.clamp(MIN_BAND_LIMIT, MAX_INTERNAL_BAND_LIMIT);
        Self::cached(l)
    }

    fn cached(band_limit: usize) -> GridSpec {
        let mut cache = GRID_CACHE.lock().unwrap_or_else(|e| e.into_inner());
        cache.entry(band_limit).or_insert_with(|| GridSpec { inner: Arc::new(GridData::build(band_limit)) }).clone()
    }

    /// Band limit `L`.
    pub fn band_limit(&self) -> usize {
        self.inner.band_limit
    }

    /// Number of colatitude rings.
    pub fn n_theta(&self) -> usize {
        self.inner.n_theta
    }

    /// Number of longitudes per ring.
    pub fn n_phi(&self) -> usize {
        self.inner.n_phi
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.inner.n_theta * self.inner.n_phi
    }

    /// Always false; grids have at least `5 × 10` nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Colatitude of ring `j`.
    pub fn theta(&self, j: usize) -> f64 {
        self.inner.theta[j]
    }

    /// Cosine of the colatitude of ring `j`.
    pub fn cos_theta(&self, j: usize) -> f64 {
        self.inner.cos_theta[j]
    }

    /// Sine of the colatitude of ring `j`.
    pub fn sin_theta(&self, j: usize) -> f64 {
        self.inner.sin_theta[j]
    }

    /// Longitude of column `k`.
    pub fn phi(&self, k: usize) -> f64 {
        self.inner.phi[k]
    }

    /// Quadrature weight of ring `j` (Gauss weight times 2π / n_phi).
    pub fn ring_weight(&self, j: usize) -> f64 {
        self.inner.ring_weight[j]
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.inner.ring_weight[i / self.inner.n_phi]
    }

    /// All node weights in storage order.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// (θ, φ) of node `i`.
    pub fn angles(&self, i: usize) -> (f64, f64) {
        let n = self.inner.n_phi;
        (self.inner.theta[i / n], self.inner.phi[i % n])
    }

    /// Unit vector of node `i`.
    pub fn node(&self, i: usize) -> Vector3<f64> {
        let n = self.inner.n_phi;
        let (j, k) = (i / n, i % n);
        let s = self.inner.sin_theta[j];
        Vector3::new(s * self.inner.cos_mphi[n + k], s * self.inner.sin_mphi[n + k], self.inner.cos_theta[j])
    }

    /// All node positions in storage order.
    pub fn nodes(&self) -> Vec<Vector3<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Unit vector ∂/∂θ at node `i`.
    pub fn e_theta(&self, i: usize) -> Vector3<f64> {
        let n = self.inner.n_phi;
        let (j, k) = (i / n, i % n);
        let c = self.inner.cos_theta[j];
        Vector3::new(c * self.inner.cos_mphi[n + k], c * self.inner.sin_mphi[n + k], -self.inner.sin_theta[j])
    }

    /// Unit vector (1/sinθ) ∂/∂φ at node `i`.
    pub fn e_phi(&self, i: usize) -> Vector3<f64> {
        let n = self.inner.n_phi;
        let k = i % n;
        Vector3::new(-self.inner.sin_mphi[n + k], self.inner.cos_mphi[n + k], 0.0)
    }

    pub(crate) fn cos_mphi(&self, m: usize) -> &[f64] {
        let n = self.inner.n_phi;
        &self.inner.cos_mphi[m * n..(m + 1) * n]
    }

    pub(crate) fn sin_mphi(&self, m: usize) -> &[f64] {
        let n = self.inner.n_phi;
        &self.inner.sin_mphi[m * n..(m + 1) * n]
    }

    /// True when both handles describe the same discretization.
    pub fn same_as(&self, other: &GridSpec) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.band_limit() == other.band_limit()
                && self.n_theta() == other.n_theta()
                && self.n_phi() == other.n_phi())
    }
}

impl std::fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridSpec")
            .field("band_limit", &self.band_limit())
            .field("n_theta", &self.n_theta())
            .field("n_phi", &self.n_phi())
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl GridData {
    fn build(band_limit: usize) -> GridData {
        let n_theta = band_limit + 1;
        let n_phi = 2 * band_limit + 2;
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|&xi| xi.acos()).collect();
        let cos_theta = x.clone();
        let sin_theta: Vec<f64> = x.iter().map(|&xi| (1.0 - xi * xi).max(0.0).sqrt()).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let phi: Vec<f64> = (0..n_phi).map(|k| k as f64 * dphi).collect();
        let ring_weight = w.iter().map(|&wi| wi * dphi).collect();
        // Trig tables must cover m = 1 even for tiny L (node positions use it).
        let m_count = band_limit.max(1) + 1;
        let mut cos_mphi = vec![0.0; m_count * n_phi];
        let mut sin_mphi = vec![0.0; m_count * n_phi];
        for m in 0..m_count {
            for k in 0..n_phi {
                // Reduce m·k modulo n_phi so the angle stays in [0, 2π).
                let a = ((m * k) % n_phi) as f64 * dphi;
                cos_mphi[m * n_phi + k] = a.cos();
                sin_mphi[m * n_phi + k] = a.sin();
            }
        }
        GridData { band_limit, n_theta, n_phi, theta, cos_theta, sin_theta, phi, ring_weight, cos_mphi, sin_mphi }
    }
}

/// Gauss–Legendre nodes (descending in x, i.e. ascending colatitude) and weights.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    // Newton in θ (x = cos θ) keeps 1 − x² = sin²θ accurate near the poles;
    // at a root P_n' = n P_{n−1}/(1 − x²), so w = 2 sin²θ / (n P_{n−1})².
    for i in 0..(n + 1) / 2 {
        let mut theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        for _ in 0..100 {
            let (z, s) = (theta.cos(), theta.sin());
            let (p, p_prev) = legendre_pair(n, z);
            let dtheta = -(n as f64) * (p_prev - z * p) / s;
            let step = p / dtheta;
            theta -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (z, s) = (theta.cos(), theta.sin());
        let (_, p_prev) = legendre_pair(n, z);
        let wi = 2.0 * s * s / (n as f64 * p_prev).powi(2);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    // The recurrence leaves ~n·eps relative error in the weights; restore
    // their exact sum ∫₋₁¹ dx = 2.
    let total = crate::linalg::compensated_sum(w.iter().copied());
    w.iter_mut().for_each(|v| *v *= 2.0 / total);
    (x, w)
}

/// (P_n(z), P_{n-1}(z)) by the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_band_limits_are_rejected() {
        assert!(matches!(make_grid(3), Err(Error::Config(_))));
        assert!(matches!(make_grid(257), Err(Error::Config(_))));
        assert!(make_grid(4).is_ok());
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        for l in [4, 5, 17, 64, 128] {
            let g = make_grid(l).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 4.0 * PI).abs() <= 1e-12 * 4.0 * PI, "L={l}: {s}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_monomials_exactly() {
        let (x, w) = gauss_legendre(9);
        // Exact through degree 17: ∫ x^k dx = 2/(k+1) for even k.
        for k in 0..=17 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q} vs {exact}");
        }
    }

    #[test]
    fn cos_squared_integral_matches_analytic_value() {
        let g = make_grid(8).unwrap();
        let q: f64 = (0..g.len()).map(|i| g.weight(i) * g.node(i).z.powi(2)).sum();
        assert!((q - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_and_tangent() {
        let g = make_grid(6).unwrap();
        for i in 0..g.len() {
            let (x, et, ep) = (g.node(i), g.e_theta(i), g.e_phi(i));
            assert!((x.norm() - 1.0).abs() < 1e-14);
            assert!(x.dot(&et).abs() < 1e-14 && x.dot(&ep).abs() < 1e-14);
            assert!(et.dot(&ep).abs() < 1e-14);
            // (e_r, e_theta, e_phi) is right-handed.
            assert!((x.cross(&et) - ep).norm() < 1e-14);
        }
    }

    #[test]
    fn grids_are_shared_per_band_limit() {
        let a = make_grid(12).unwrap();
        let b = make_grid(12).unwrap();
        assert!(Arc::ptr_eq(&a.inner, &b.inner));
        assert_ne!(a, make_grid(13).unwrap());
    }
}
