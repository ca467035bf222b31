use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Pivots below this multiple of `‖a‖_∞` are treated as singular.
pub const TAU_SING: f64 = 1e-12;

/// LU factorization with partial pivoting (`P a = L U`, packed).
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        Self::factor_tol(a, TAU_SING)
    }

    pub fn factor_tol(a: &Matrix, rel_tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU needs a square matrix, got {:?}", a.shape())));
        }
        let n = a.rows();
        let threshold = rel_tol * a.norm_inf();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::Singular { pivot: pmax });
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows()
            )));
        }
        let mut x = Matrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                let mut s = y[i];
                for k in 0..i {
                    s -= self.lu[(i, k)] * y[k];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in (i + 1)..n {
                    s -= self.lu[(i, k)] * y[k];
                }
                y[i] = s / self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, c)] = y[i];
            }
        }
        Ok(x)
    }

    pub fn det(&self) -> f64 {
        (0..self.lu.rows()).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }
}

/// Solves `a x = b`.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.solve(b)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.solve(&Matrix::identity(a.rows()))
}

/// Determinant; zero for matrices that are singular to working precision.
pub fn det(a: &Matrix) -> Result<f64> {
    match Lu::factor_tol(a, 0.0) {
        Ok(lu) => Ok(lu.det()),
        Err(Error::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let b = Matrix::from_rows(&[[1.5, -2.0], [0.25, 7.0]]).unwrap();
        assert_eq!(solve_linear(&Matrix::identity(2), &b).unwrap(), b);
        let x = solve_linear(&Matrix::from_diag(&[2.0, 4.0]), &Matrix::column(&[2.0, 4.0])).unwrap();
        assert_eq!(x, Matrix::column(&[1.0, 1.0]));
        let a = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let x = solve_linear(&a, &Matrix::column(&[3.0, 1.0])).unwrap();
        assert_eq!(x, Matrix::column(&[2.0, 1.0]));
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(solve_linear(&a, &Matrix::column(&[1.0, 1.0])), Err(Error::Singular { .. })));
        assert_eq!(det(&a).unwrap(), 0.0);
    }

    #[test]
    fn residual_bound() {
        let a = Matrix::from_rows(&[[4.0, -2.0, 1.0], [3.0, 6.0, -4.0], [2.0, 1.0, 8.0]]).unwrap();
        let b = Matrix::column(&[12.0, -25.0, 32.0]);
        let x = solve_linear(&a, &b).unwrap();
        let r = (&(&a * &x) - &b).norm_fro();
        assert!(r <= 1e-12 * (a.norm_fro() * x.norm_fro() + b.norm_fro()));
        assert!((det(&a).unwrap() - 263.0).abs() < 1e-9);
    }
}
