//! Symmetric eigenproblems (cyclic Jacobi) and Cholesky factorization.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`sym_eig_extremes`].
pub const TAU_SYM: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascending; the
/// matching eigenvectors are the columns of the returned matrix.
pub fn sym_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    assert!(m.is_square(), "symmetric eigenproblem needs a square matrix");
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = a.norm_fro();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, dst)] = v[(k, src)];
        }
    }
    (vals, vecs)
}

/// Smallest and largest eigenvalue of a (numerically) symmetric matrix.
///
/// The input is symmetrized first; asymmetry above `TAU_SYM·‖m‖_F` is a
/// contract violation.
pub fn sym_eig_extremes(m: &Matrix) -> Result<(f64, f64)> {
    sym_eig_extremes_tol(m, TAU_SYM)
}

pub fn sym_eig_extremes_tol(m: &Matrix, rel_tol: f64) -> Result<(f64, f64)> {
    if !m.is_square() || m.is_empty() {
        return Err(Error::Dimension(format!("expected a nonempty square matrix, got {:?}", m.shape())));
    }
    let asym = m.asymmetry();
    if asym > rel_tol * m.norm_fro() {
        return Err(Error::Contract(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let (vals, _) = sym_eigen(m);
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Lower-triangular Cholesky factor, or `None` if `m` is not positive definite.
pub fn cholesky(m: &Matrix) -> Option<Matrix> {
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    // Invert L (lower triangular), then form L⁻ᵀ L⁻¹.
    let mut li = Matrix::zeros(n, n);
    for j in 0..n {
        li[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[(i, k)] * li[(k, j)];
            }
            li[(i, j)] = s / l[(i, i)];
        }
    }
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..n {
                s += li[(k, i)] * li[(k, j)];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}
