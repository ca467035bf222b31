//! Nonsymmetric eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form, then Francis double-shift QR with deflation.

use super::complex::Complex;
use super::matrix::Matrix;
use super::solve::Lu;
use super::svd::{svd, Svd};
use crate::error::{Error, Result};

/// Sweep budget per unit of dimension.
pub const SWEEPS_PER_DIM: usize = 100;

/// Singular values below this fraction of `‖m‖_F` count as an exact null
/// space, whose zero eigenvalues are split off before the QR iteration.
const NULL_TOL: f64 = 1e-13;

/// All eigenvalues of a square matrix, with multiplicity, in no particular order.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (zeros, rest) = deflate_null_space(m);
    let mut out = vec![Complex::ZERO; zeros];
    if rest.rows() > 0 {
        let mut h: Vec<Vec<f64>> = rest.to_rows();
        let (low, high) = balance(&mut h);
        hessenberg(&mut h, low, high);
        out.extend(hqr(&mut h, low, high)?);
    }
    Ok(out)
}

/// Repeatedly applies the orthogonal similarity `[N N⊥]ᵀ m [N N⊥]`, where `N`
/// spans the numerical null space, and keeps the trailing block. Zero
/// eigenvalues from Jordan chains then come out exactly instead of being
/// smeared to `O(√ε)`.
fn deflate_null_space(m: &Matrix) -> (usize, Matrix) {
    let scale = m.norm_fro();
    let mut zeros = 0;
    let mut cur = m.clone();
    while cur.rows() > 0 && scale > 0.0 {
        // Cheap gate: only nearly singular matrices pay for an SVD.
        if Lu::factor_tol(&cur, 1e-10).is_ok() {
            break;
        }
        let n = cur.rows();
        let Svd { s, v, .. } = svd(&cur);
        let k = s.iter().filter(|&&x| x <= NULL_TOL * scale).count();
        if k == 0 {
            break;
        }
        let mut q = Matrix::zeros(n, n);
        for (dst, src) in (n - k..n).chain(0..n - k).enumerate() {
            for i in 0..n {
                q[(i, dst)] = v[(i, src)];
            }
        }
        let t = &(&q.transpose() * &cur) * &q;
        cur = t.block(k, k, n - k, n - k);
        zeros += k;
    }
    (zeros, cur)
}

/// Largest eigenvalue modulus computed without null-space deflation. Equal to
/// [`spectral_radius`] except when the dominant eigenvalues are defective
/// zeros, where it may return `O(ε^{1/k})` instead of zero.
pub(crate) fn spectral_radius_undeflated(m: &Matrix) -> Result<f64> {
    if !m.is_square() || m.is_empty() {
        return spectral_radius(m);
    }
    let mut h: Vec<Vec<f64>> = m.to_rows();
    let (low, high) = balance(&mut h);
    hessenberg(&mut h, low, high);
    Ok(hqr(&mut h, low, high)?.iter().fold(0.0, |r, l| r.max(l.abs())))
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if m.is_empty() && m.is_square() {
        return Err(Error::Domain("spectral radius of an empty matrix".into()));
    }
    Ok(eigenvalues(m)?.iter().fold(0.0, |r, l| r.max(l.abs())))
}

fn swap(h: &mut [Vec<f64>], a: usize, b: usize) {
    if a == b {
        return;
    }
    h.swap(a, b);
    for row in h.iter_mut() {
        row.swap(a, b);
    }
}

/// Permutes rows/columns that isolate eigenvalues to the ends of the matrix,
/// then scales the remaining block by powers of two so that row and column
/// norms are comparable. Returns the active range `[low, high]`.
fn balance(h: &mut [Vec<f64>]) -> (usize, usize) {
    let n = h.len();
    let mut low = 0usize;
    let mut high = n - 1;

    // Rows with a zero off-diagonal part (within the active columns) go last.
    'rows: loop {
        for j in (0..=high).rev() {
            let isolated = (0..=high).all(|i| i == j || h[j][i] == 0.0);
            if isolated {
                swap(h, j, high);
                if high == 0 {
                    return (0, 0);
                }
                high -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // Columns with a zero off-diagonal part (within the active rows) go first.
    'cols: loop {
        for j in low..=high {
            let isolated = (low..=high).all(|i| i == j || h[i][j] == 0.0);
            if isolated {
                swap(h, j, low);
                low += 1;
                if low > high {
                    return (low - 1, high);
                }
                continue 'cols;
            }
        }
        break;
    }

    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in low..=high {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in low..=high {
                if j != i {
                    c += h[j][i].abs();
                    r += h[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let g = 1.0 / f;
                for v in h[i].iter_mut() {
                    *v *= g;
                }
                for row in h.iter_mut() {
                    row[i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (low, high)
}

/// Orthogonal similarity reduction of the active block to upper Hessenberg form.
fn hessenberg(h: &mut [Vec<f64>], low: usize, high: usize) {
    let n = h.len();
    let mut ort = vec![0.0; n];
    for m in (low + 1)..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[i][j];
            }
            f /= hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut().take(high + 1) {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        h[m][m - 1] = scale * g;
        for row in h.iter_mut().take(high + 1).skip(m + 1) {
            row[m - 1] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
#[allow(unused_assignments)]
fn hqr(h: &mut [Vec<f64>], low: usize, high: usize) -> Result<Vec<Complex>> {
    let nn = h.len();
    let low = low as isize;
    let high = high as isize;
    let eps = f64::EPSILON;
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        if (i as isize) < low || (i as isize) > high {
            d[i] = h[i][i];
        }
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }

    let budget = SWEEPS_PER_DIM * nn;
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut exshift = 0.0;
    let mut n = high;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut w, mut x, mut y);

    macro_rules! at {
        ($i:expr, $j:expr) => {
            h[($i) as usize][($j) as usize]
        };
    }

    while n >= low {
        let mut l = n;
        while l > low {
            s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at!(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            at!(n, n) += exshift;
            d[n as usize] = at!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at!(n, n - 1) * at!(n - 1, n);
            p = (at!(n - 1, n - 1) - at!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            at!(n, n) += exshift;
            at!(n - 1, n - 1) += exshift;
            x = at!(n, n);
            let (i1, i0) = ((n - 1) as usize, n as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[i1] = x + z;
                d[i0] = d[i1];
                if z != 0.0 {
                    d[i0] = x - w / z;
                }
                e[i1] = 0.0;
                e[i0] = 0.0;
            } else {
                d[i1] = x + p;
                d[i0] = x + p;
                e[i1] = z;
                e[i0] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > budget {
                return Err(Error::Convergence {
                    iterations: budget,
                    residual: at!(n, n - 1).abs(),
                });
            }
            x = at!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = at!(n - 1, n - 1);
                w = at!(n, n - 1) * at!(n - 1, n);
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    at!(i, i) -= x;
                }
                s = at!(n, n - 1).abs() + at!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        at!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            let mut m = n - 2;
            loop {
                z = at!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                at!(i, i - 2) = 0.0;
                if i > m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }

            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if notlast { at!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        at!(k, k - 1) = -s * x;
                    } else if l != m {
                        at!(k, k - 1) = -at!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in (k as usize)..nn {
                        let mut pp = h[k as usize][j] + q * h[(k + 1) as usize][j];
                        if notlast {
                            pp += r * h[(k + 2) as usize][j];
                            h[(k + 2) as usize][j] -= pp * z;
                        }
                        h[k as usize][j] -= pp * x;
                        h[(k + 1) as usize][j] -= pp * y;
                    }
                    let top = n.min(k + 3);
                    for i in 0..=top {
                        let iu = i as usize;
                        let mut pp = x * h[iu][k as usize] + y * h[iu][(k + 1) as usize];
                        if notlast {
                            pp += z * h[iu][(k + 2) as usize];
                            h[iu][(k + 2) as usize] -= pp * r;
                        }
                        h[iu][k as usize] -= pp;
                        h[iu][(k + 1) as usize] -= pp * q;
                    }
                }
                k += 1;
            }
        }
    }

    let out: Vec<Complex> = d.iter().zip(&e).map(|(re, im)| Complex::new(*re, *im)).collect();
    if out.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::complex::match_multisets;

    fn reals(v: &[f64]) -> Vec<Complex> {
        v.iter().map(|x| Complex::real(*x)).collect()
    }

    #[test]
    fn identity_and_nilpotent() {
        let e = eigenvalues(&Matrix::identity(2)).unwrap();
        assert!(match_multisets(&e, &reals(&[1.0, 1.0]), 1e-12).is_some());
        let n = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let e = eigenvalues(&n).unwrap();
        assert!(match_multisets(&e, &reals(&[0.0, 0.0]), 1e-12).is_some());
    }

    #[test]
    fn companion_of_quadratic() {
        let c = Matrix::from_rows(&[[7.0, -12.0], [1.0, 0.0]]).unwrap();
        let e = eigenvalues(&c).unwrap();
        assert!(match_multisets(&e, &reals(&[3.0, 4.0]), 1e-8).is_some());
    }

    #[test]
    fn complex_pair_and_radius() {
        // (z - 0.4)(z^2 - z + 0.5): roots 0.4 and 0.5 ± 0.5i
        let m = Matrix::from_rows(&[[1.4, -0.8, -0.1], [1.0, 0.0, 0.0], [1.0, -2.0, 0.0]]).unwrap();
        let e = eigenvalues(&m).unwrap();
        let want = [Complex::real(0.4), Complex::new(0.5, 0.5), Complex::new(0.5, -0.5)];
        assert!(match_multisets(&e, &want, 1e-10).is_some());
        assert!((spectral_radius(&m).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn radius_examples() {
        assert_eq!(spectral_radius(&Matrix::identity(3)).unwrap(), 1.0);
        let n = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(spectral_radius(&n).unwrap(), 0.0);
    }

    #[test]
    fn rejects_rectangular() {
        assert!(matches!(eigenvalues(&Matrix::zeros(2, 3)), Err(Error::Dimension(_))));
        assert!(spectral_radius(&Matrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn shift_structure_is_isolated_exactly() {
        // Block shift with Jordan chains: eigenvalues must be exactly zero.
        let mut m = Matrix::zeros(6, 6);
        m[(0, 0)] = 1.5;
        m[(0, 1)] = 0.3;
        m[(1, 0)] = -0.2;
        m[(1, 1)] = 0.7;
        m[(2, 0)] = 1.0;
        m[(2, 1)] = -2.0;
        m[(3, 2)] = 1.0;
        m[(4, 3)] = 1.0;
        m[(5, 4)] = 1.0;
        let e = eigenvalues(&m).unwrap();
        let zeros = e.iter().filter(|c| c.abs() == 0.0).count();
        assert_eq!(zeros, 4);
    }

    #[test]
    fn hidden_jordan_chain_gives_exact_zeros() {
        // Rotated 3x3 nilpotent Jordan block next to the eigenvalue 0.5.
        let mut j = Matrix::zeros(4, 4);
        j[(0, 1)] = 1.0;
        j[(1, 2)] = 1.0;
        j[(3, 3)] = 0.5;
        let (c, s) = (0.6, 0.8);
        let q = Matrix::from_rows(&[[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, c, -s], [0.0, 0.0, s, c]]).unwrap();
        let q = &q * &Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [0.0, 0.0, 0.0, 1.0]]).unwrap();
        let m = &(&q * &j) * &q.transpose();
        let ev = eigenvalues(&m).unwrap();
        assert!(match_multisets(&ev, &reals(&[0.0, 0.0, 0.0, 0.5]), 1e-12).is_some(), "{ev:?}");
    }
}
