//! Dense real linear algebra used throughout the toolkit.
//!
//! Tolerance contracts: eigenvalues and polynomial roots are accurate to
//! [`TAU_EIG`] (absolute, on well-conditioned roots); symmetric inputs may
//! deviate from symmetry by at most [`symmetric::TAU_SYM`] relative; linear
//! solves reject pivots below [`solve::TAU_SING`] relative.

mod complex;
mod eigen;
mod matrix;
mod poly;
mod solve;
mod svd;
mod symmetric;

pub use complex::{match_multisets, Complex};
pub(crate) use eigen::spectral_radius_undeflated;
pub use eigen::{eigenvalues, spectral_radius};
pub use matrix::Matrix;
pub use poly::{poly_roots, Polynomial};
pub use solve::{det, inverse, solve_linear, Lu, TAU_SING};
pub use svd::{null_space, pinv, rank, singular_values, svd, Svd};
pub use symmetric::{cholesky, cholesky_inverse, sym_eig_extremes, sym_eig_extremes_tol, sym_eigen, TAU_SYM};

/// Absolute tolerance for eigenvalue and root comparisons.
pub const TAU_EIG: f64 = 1e-8;

/// Characteristic polynomial `det(zI - m)`, assembled from the eigenvalues.
pub fn characteristic_polynomial(m: &Matrix) -> crate::Result<Polynomial> {
    Ok(Polynomial::from_roots(&eigenvalues(m)?))
}
