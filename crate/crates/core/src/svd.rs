//! Thin SVD by one-sided (Hestenes) Jacobi rotations, plus rank truncation.
//!
//! The rotations act on the columns of the taller orientation of the input,
//! so the number of columns being orthogonalized is `min(m, n)`. Tiles are at
//! most `Delta x Gamma`, which keeps this cheap and very accurate.

use crate::error::{Result, TessError};
use crate::matrix::Matrix;

pub const MAX_SWEEPS: usize = 60;

/// `A = U diag(S) V^T` with `r = min(m, n)` singular triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// m x r, orthonormal columns.
    pub u: Matrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// n x r, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    pub fn rank_used(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let (m, n, r) = (self.u.rows(), self.v.rows(), self.rank_used());
        Matrix::from_fn(m, n, |i, j| {
            (0..r)
                .map(|k| self.u[(i, k)] * self.singular_values[k] * self.v[(j, k)])
                .sum()
        })
    }
}

/// Rank-q factors of a matrix: `left = U_q diag(S_q)`, `right = V_q^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub left: Matrix,
    pub right: Matrix,
    /// Sum of the squared discarded singular values.
    pub residual_sq: f64,
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m >= n {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

pub fn truncate(svd: &Svd, rank: usize) -> Result<Truncation> {
    let r = svd.rank_used();
    if rank > r {
        return Err(TessError::RankOutOfRange { rank, max: r });
    }
    let s = &svd.singular_values;
    let left = Matrix::from_fn(svd.u.rows(), rank, |i, k| svd.u[(i, k)] * s[k]);
    let right = Matrix::from_fn(rank, svd.v.rows(), |k, j| svd.v[(j, k)]);
    let residual_sq = s[rank..].iter().map(|x| x * x).sum();
    Ok(Truncation {
        left,
        right,
        residual_sq,
    })
}

/// Jacobi on an m x n matrix with m >= n.
fn jacobi_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);

    // Column-major copies so each rotation touches contiguous memory.
    let mut work = vec![0.0; m * n];
    for j in 0..n {
        for i in 0..m {
            work[j * m + i] = a[(i, j)];
        }
    }
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }

    let norm = a.frobenius_norm();
    if !norm.is_finite() {
        return Err(TessError::SvdNoConvergence { norm, sweeps: 0 });
    }
    let rel_tol = (m as f64 * f64::EPSILON).max(1e-15);

    let mut converged = norm == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(TessError::SvdNoConvergence { norm, sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (head, tail) = work.split_at_mut(q * m);
                let cp = &mut head[p * m..(p + 1) * m];
                let cq = &mut tail[..m];
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (x, y) in cp.iter().zip(cq.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= rel_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                let (vh, vt) = v.split_at_mut(q * n);
                rotate(&mut vh[p * n..(p + 1) * n], &mut vt[..n], c, s);
            }
        }
        converged = !rotated;
    }

    let mut sigma: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let col = &work[j * m..(j + 1) * m];
            (col.iter().map(|x| x * x).sum::<f64>().sqrt(), j)
        })
        .collect();
    // Stable sort keeps sweep order among equal values.
    sigma.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut missing = Vec::new();
    for (k, &(s, j)) in sigma.iter().enumerate() {
        let col = &work[j * m..(j + 1) * m];
        if s > 0.0 && col.iter().all(|x| (x / s).is_finite()) {
            for i in 0..m {
                u[(i, k)] = col[i] / s;
            }
        } else {
            missing.push(k);
        }
        for i in 0..n {
            vm[(i, k)] = v[j * n + i];
        }
    }
    complete_basis(&mut u, &missing);

    let singular_values: Vec<f64> = sigma.iter().map(|&(s, _)| s).collect();
    fix_signs(&mut u, &mut vm);
    Ok(Svd {
        u,
        singular_values,
        v: vm,
    })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to all other
/// columns (Gram-Schmidt against the standard basis).
fn complete_basis(u: &mut Matrix, missing: &[usize]) {
    let (m, r) = u.shape();
    let mut filled: Vec<usize> = (0..r).filter(|k| !missing.contains(k)).collect();
    let mut candidate = 0;
    for &k in missing {
        while candidate < m {
            let mut x = vec![0.0; m];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &c in &filled {
                    let dot: f64 = (0..m).map(|i| u[(i, c)] * x[i]).sum();
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi -= dot * u[(i, c)];
                    }
                }
            }
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len > 0.5 {
                for (i, xi) in x.iter().enumerate() {
                    u[(i, k)] = xi / len;
                }
                filled.push(k);
                break;
            }
        }
    }
}

/// Makes the largest-magnitude entry of each column of `u` positive,
/// flipping the matching column of `v`.
fn fix_signs(u: &mut Matrix, v: &mut Matrix) {
    for k in 0..u.cols() {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for i in 0..u.rows() {
            let x = u[(i, k)];
            if x.abs() > best.abs() {
                best = x;
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..u.rows() {
                u[(i, k)] = -u[(i, k)];
            }
            for i in 0..v.rows() {
                v[(i, k)] = -v[(i, k)];
            }
        }
    }
}
