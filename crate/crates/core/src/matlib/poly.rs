use std::fmt;

use super::complex::Complex;
use super::eigen::eigenvalues;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Real polynomial, coefficients from the highest degree down.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Leading zeros are trimmed. The zero polynomial and non-finite
    /// coefficients are rejected.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial"));
        }
        let first = coeffs
            .iter()
            .position(|c| *c != 0.0)
            .ok_or_else(|| Error::Domain("zero polynomial".into()))?;
        Ok(Self { coeffs: coeffs[first..].to_vec() })
    }

    pub fn from_slice(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.to_vec())
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    /// Monic real polynomial with the given roots. Complex roots are assumed
    /// to come in conjugate pairs; residual imaginary parts are dropped.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut c = vec![Complex::ONE];
        for r in roots {
            let mut next = vec![Complex::ZERO; c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i] = next[i] + *ci;
                next[i + 1] = next[i + 1] - *ci * *r;
            }
            c = next;
        }
        Self { coeffs: c.iter().map(|z| z.re).collect() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        let l = self.leading();
        Self { coeffs: self.coeffs.iter().map(|c| c / l).collect() }
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs.iter().fold(Complex::ZERO, |acc, c| acc * z + Complex::real(*c))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    /// Companion matrix of the monic normalization (top-row form).
    pub fn companion(&self) -> Result<Matrix> {
        let d = self.degree();
        if d == 0 {
            return Err(Error::Domain("companion matrix of a constant".into()));
        }
        let m = self.monic();
        let mut c = Matrix::zeros(d, d);
        for j in 0..d {
            c[(0, j)] = -m.coeffs[j + 1];
        }
        for i in 1..d {
            c[(i, i - 1)] = 1.0;
        }
        Ok(c)
    }

    /// Roots with multiplicity, from the companion-matrix eigenvalues.
    pub fn roots(&self) -> Result<Vec<Complex>> {
        poly_roots(self)
    }
}

pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex>> {
    if p.degree() == 0 {
        return Err(Error::Domain("a constant polynomial has no roots".into()));
    }
    eigenvalues(&p.companion()?)
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}
