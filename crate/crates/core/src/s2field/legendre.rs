//! Orthonormal associated Legendre functions by stable three-term recurrence.
//!
//! Values `p_lm(cos θ)` are normalized so that `p_lm(cos θ)·trig(mφ)·√2`
//! (or just `p_l0` for m = 0) is orthonormal on the unit sphere. No
//! Condon–Shortley phase is applied, so `Y_{1,1} ∝ +x¹`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use std::sync::LazyLock;

/// Precomputed recurrence coefficients for one band limit.
pub(crate) struct Recurrence {
    lmax: usize,
    /// Factor √((2m+1)/(2m)) for the diagonal recurrence, indexed by m.
    diag: Vec<f64>,
    /// (a, b) of p_lm = a (x p_{l-1,m} − b p_{l-2,m}), triangular index.
    ab: Vec<(f64, f64)>,
    /// √((2l+1)(l²−m²)/(2l−1)) used by the θ-derivative, triangular index.
    deriv: Vec<f64>,
}

static RECURRENCES: LazyLock<Mutex<HashMap<usize, Arc<Recurrence>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Shared recurrence table for band limit `lmax`.
pub(crate) fn recurrence(lmax: usize) -> Arc<Recurrence> {
    let mut cache = RECURRENCES.lock().unwrap_or_else(|e| e.into_inner());
    cache.entry(lmax).or_insert_with(|| Arc::new(Recurrence::build(lmax))).clone()
}

/// Offset of column `m` in a triangular (m-major) layout for band limit `lmax`.
#[inline]
pub(crate) fn tri_offset(lmax: usize, m: usize) -> usize {
    m * (2 * lmax + 3 - m) / 2
}

/// Length of a triangular table for band limit `lmax`.
#[inline]
pub(crate) fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Values this small are flushed to zero to keep the recurrence out of the
/// subnormal range; they are far below any representable contribution.
const FLUSH: f64 = 1e-280;

impl Recurrence {
    fn build(lmax: usize) -> Recurrence {
        let mut diag = vec![0.0; lmax + 1];
        for (m, d) in diag.iter_mut().enumerate().skip(1) {
            *d = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        let mut ab = vec![(0.0, 0.0); tri_len(lmax)];
        let mut deriv = vec![0.0; tri_len(lmax)];
        for m in 0..=lmax {
            let off = tri_offset(lmax, m);
            for l in m..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                if l >= m + 2 {
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let lm1 = lf - 1.0;
                    let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                    ab[off + l - m] = (a, b);
                }
                if l > m {
                    deriv[off + l - m] = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
                }
            }
        }
        Recurrence { lmax, diag, ab, deriv }
    }

    /// Sectoral values p_mm(cos θ) for m = 0..=lmax given sin θ.
    pub(crate) fn sectoral(&self, sin_theta: f64, out: &mut [f64]) {
        out[0] = 1.0 / (4.0 * PI).sqrt();
        for m in 1..=self.lmax {
            let v = self.diag[m] * sin_theta * out[m - 1];
            out[m] = if v.abs() < FLUSH { 0.0 } else { v };
        }
    }

    /// Column p_lm(x), l = m..=lmax, written to `out[l - m]`.
    pub(crate) fn column(&self, m: usize, x: f64, pmm: f64, out: &mut [f64]) {
        let n = self.lmax - m + 1;
        out[0] = pmm;
        if n == 1 {
            return;
        }
        if pmm == 0.0 {
            out[..n].iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        out[1] = ((2 * m + 3) as f64).sqrt() * x * pmm;
        let off = tri_offset(self.lmax, m);
        for i in 2..n {
            let (a, b) = self.ab[off + i];
            out[i] = a * (x * out[i - 1] - b * out[i - 2]);
        }
    }

    /// θ-derivatives of a column computed by [`Recurrence::column`].
    /// Requires sin θ ≠ 0.
    pub(crate) fn column_dtheta(&self, m: usize, x: f64, sin_theta: f64, p: &[f64], out: &mut [f64]) {
        let n = self.lmax - m + 1;
        let off = tri_offset(self.lmax, m);
        let inv_s = 1.0 / sin_theta;
        out[0] = m as f64 * x * p[0] * inv_s;
        for i in 1..n {
            let l = (m + i) as f64;
            out[i] = (l * x * p[i] - self.deriv[off + i] * p[i - 1]) * inv_s;
        }
    }

    /// Full triangular table p_lm(x) for all (l, m), m-major.
    pub(crate) fn table(&self, x: f64, sin_theta: f64, pmm: &mut [f64], out: &mut [f64]) {
        self.sectoral(sin_theta, pmm);
        for m in 0..=self.lmax {
            let off = tri_offset(self.lmax, m);
            let n = self.lmax - m + 1;
            self.column(m, x, pmm[m], &mut out[off..off + n]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values_match_closed_forms() {
        let r = recurrence(3);
        let theta: f64 = 0.7;
        let (x, s) = (theta.cos(), theta.sin());
        let mut pmm = vec![0.0; 4];
        let mut t = vec![0.0; tri_len(3)];
        r.table(x, s, &mut pmm, &mut t);
        let c = 1.0 / (4.0 * PI).sqrt();
        // p_10 = √3 x /√(4π); p_11 (with √2 split out) = √(3/2) s /√(4π).
        assert!((t[tri_offset(3, 0) + 1] - c * 3f64.sqrt() * x).abs() < 1e-15);
        assert!((t[tri_offset(3, 1)] - c * 1.5f64.sqrt() * s).abs() < 1e-15);
        // p_20 = √5/2 (3x² − 1)/√(4π).
        let p20 = c * 5f64.sqrt() * 0.5 * (3.0 * x * x - 1.0);
        assert!((t[tri_offset(3, 0) + 2] - p20).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let r = recurrence(12);
        let values = |th: f64, m: usize| {
            let mut pmm = vec![0.0; 13];
            r.sectoral(th.sin(), &mut pmm);
            let mut col = vec![0.0; 13 - m];
            r.column(m, th.cos(), pmm[m], &mut col);
            col
        };
        let th = 1.1;
        let h = 1e-6;
        for m in 0..=12 {
            let p = values(th, m);
            let mut d = vec![0.0; p.len()];
            r.column_dtheta(m, th.cos(), th.sin(), &p, &mut d);
            let (pp, pm) = (values(th + h, m), values(th - h, m));
            for i in 0..p.len() {
                let fd = (pp[i] - pm[i]) / (2.0 * h);
                assert!((fd - d[i]).abs() < 1e-7, "l={} m={m}: {fd} vs {}", m + i, d[i]);
            }
        }
    }
}
