//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson shifts.
//!
//! Used for Gauss quadrature (Golub–Welsch), both for the Gauss–Legendre
//! rules behind density integration and for quadratures built from moments.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigen decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues in increasing order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector belonging to `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Computes all eigenpairs of the symmetric tridiagonal matrix with main
/// diagonal `diag` and sub/super diagonal `off` (`off.len() + 1 == diag.len()`).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen {
            values: vec![],
            vectors: vec![],
        });
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // z[row][col], columns are eigenvectors
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| z.iter().map(|row| row[k]).collect())
        .collect();
    Ok(TridiagEigen { values, vectors })
}

/// Largest residual `‖T v − λ v‖₂` over all eigenpairs.
pub fn max_residual(diag: &[f64], off: &[f64], eig: &TridiagEigen) -> f64 {
    let n = diag.len();
    let mut worst: f64 = 0.0;
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let mut sq = 0.0;
        for i in 0..n {
            let mut tv = diag[i] * v[i];
            if i > 0 {
                tv += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                tv += off[i] * v[i + 1];
            }
            let r = tv - lambda * v[i];
            sq += r * r;
        }
        worst = worst.max(sq.sqrt());
    }
    worst
}

/// Frobenius norm of the tridiagonal matrix.
pub fn norm(diag: &[f64], off: &[f64]) -> f64 {
    let s: f64 = diag.iter().map(|x| x * x).sum::<f64>() + 2.0 * off.iter().map(|x| x * x).sum::<f64>();
    s.sqrt()
}
