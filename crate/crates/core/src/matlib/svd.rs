//! One-sided Jacobi (Hestenes) singular value decomposition.

use super::matrix::Matrix;

/// Thin SVD `a = u · diag(s) · vᵀ` with `s` sorted descending.
///
/// `u` is `rows × cols`, `v` is `cols × cols`. Columns of `u` that belong to
/// zero singular values are left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 80;

pub fn svd(a: &Matrix) -> Svd {
    let (r, c) = a.shape();
    // Column-major working copies for cache-friendly column rotations.
    let mut u: Vec<Vec<f64>> = (0..c).map(|j| (0..r).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..c)
        .map(|j| (0..c).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let (alpha, beta, gamma) = {
                    let (up, uq) = (&u[p], &u[q]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for k in 0..r {
                        al += up[k] * up[k];
                        be += uq[k] * uq[k];
                        ga += up[k] * uq[k];
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut u, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut s: Vec<f64> = u.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let mut um = Matrix::zeros(r, c);
    let mut vm = Matrix::zeros(c, c);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = s[src];
        for i in 0..r {
            um[(i, dst)] = if sigma > 0.0 { u[src][i] / sigma } else { 0.0 };
        }
        for i in 0..c {
            vm[(i, dst)] = v[src][i];
        }
    }
    s = order.iter().map(|&i| s[i]).collect();
    Svd { u: um, s, v: vm }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, cs: f64, sn: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = cs * x - sn * y;
        *b = sn * x + cs * y;
    }
}

pub fn singular_values(a: &Matrix) -> Vec<f64> {
    // Orthogonalizing the shorter side converges faster and yields the same values.
    if a.rows() < a.cols() {
        let mut s = svd(&a.transpose()).s;
        s.truncate(a.rows());
        s
    } else {
        svd(a).s
    }
}

/// Number of singular values strictly greater than `tol` times the largest one.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Moore–Penrose pseudo-inverse, discarding singular values at or below
/// `rel_tol` times the largest.
pub fn pinv(a: &Matrix, rel_tol: f64) -> Matrix {
    let Svd { u, s, v } = svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(a.cols(), a.rows());
    for (k, &sk) in s.iter().enumerate() {
        if smax == 0.0 || sk <= rel_tol * smax {
            continue;
        }
        for i in 0..a.cols() {
            let vik = v[(i, k)] / sk;
            if vik == 0.0 {
                continue;
            }
            for j in 0..a.rows() {
                out[(i, j)] += vik * u[(j, k)];
            }
        }
    }
    out
}

/// Orthonormal basis of the null space of `a`, one basis vector per column.
pub fn null_space(a: &Matrix, rel_tol: f64) -> Matrix {
    let Svd { s, v, .. } = svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| smax == 0.0 || s[k] <= rel_tol * smax).collect();
    let mut out = Matrix::zeros(a.cols(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        for i in 0..a.cols() {
            out[(i, dst)] = v[(i, k)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::identity(4), 1e-9), 4);
        assert_eq!(rank(&Matrix::zeros(3, 2), 1e-9), 0);
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(rank(&m, 1e-9), 1);
    }

    #[test]
    fn reconstructs() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.5], [0.5, -1.0, 2.0], [1.0, 1.0, 1.0]])
            .unwrap();
        let Svd { u, s, v } = svd(&a);
        let back = &(&u * &Matrix::from_diag(&s)) * &v.transpose();
        assert!((&back - &a).max_abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = Matrix::from_rows(&[[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        let z = null_space(&a, 1e-12);
        assert_eq!(z.cols(), 1);
        assert!((&a * &z).max_abs() < 1e-12);
        let p = pinv(&a, 1e-12);
        assert!((&(&a * &p) - &Matrix::identity(2)).max_abs() < 1e-12);
    }
}
