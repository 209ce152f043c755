//! Small dense and Krylov linear-algebra helpers.

/// Outcome of a GMRES solve.
#[derive(Debug, Clone)]
pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Compensated (Neumaier) sum: error O(eps) independent of the term count,
/// used for quadrature over whole grids.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0_f64, 0.0_f64);
    for t in terms {
        let u = s + t;
        c += if s.abs() >= t.abs() { (s - u) + t } else { (t - u) + s };
        s = u;
    }
    s + c
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted, right-preconditioned GMRES for `A x = b` starting from x = 0.
///
/// `apply` computes A·v and `precond` applies M⁻¹ in place. Stops when the
/// true residual ‖b − A x‖ drops below `tol`.
pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&mut [f64]),
    b: &[f64],
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> GmresOutcome {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut total_iters = 0;
    let mut r = b.to_vec();
    let mut beta = norm(&r);
    for _ in 0..max_restarts {
        if beta <= tol {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let mut zk = v[k].clone();
            precond(&mut zk);
            let mut w = apply(&zk);
            z.push(zk);
            // Modified Gram–Schmidt, applied twice for stability.
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[i][k] += hij;
                    w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= hij * vj);
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total_iters += 1;
            if g[k + 1].abs() <= tol * 0.5 || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&z[j]).for_each(|(xi, zi)| *xi += yj * zi);
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        beta = norm(&r);
    }
    GmresOutcome { x, residual: beta, iterations: total_iters }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        assert_eq!(compensated_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
        let naive: f64 = std::iter::repeat_n(0.1, 10_000).sum();
        assert!((compensated_sum(std::iter::repeat_n(0.1, 10_000)) - 1000.0).abs() < (naive - 1000.0).abs());
    }

    #[test]
    fn solves_a_nonsymmetric_system() {
        let n = 30;
        let a = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = (i as f64 + 2.0) * v[i];
                    if i + 1 < n {
                        s += 0.7 * v[i + 1];
                    }
                    if i > 0 {
                        s -= 0.3 * v[i - 1];
                    }
                    s
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let out = gmres(a, |z| z.iter_mut().enumerate().for_each(|(i, v)| *v /= i as f64 + 2.0), &b, 1e-12, 20, 10);
        let r: Vec<f64> = a(&out.x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) < 1e-11, "{}", norm(&r));
    }
}
