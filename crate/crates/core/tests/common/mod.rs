#![allow(dead_code)]

use firsyn::matlib::Matrix;
use firsyn::sysmodel::{FirGains, StateSpaceSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn random_system(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, max_p: usize) -> StateSpaceSystem {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let p = rng.random_range(1..=max_p);
    StateSpaceSystem::new(
        uniform_matrix(rng, n, n, -2.0, 2.0),
        uniform_matrix(rng, n, m, -2.0, 2.0),
        uniform_matrix(rng, p, n, -2.0, 2.0),
    )
    .unwrap()
}

pub fn random_gains(rng: &mut ChaCha8Rng, order: usize, m: usize, p: usize, scale: f64) -> FirGains {
    FirGains::new((0..=order).map(|_| uniform_matrix(rng, m, p, -scale, scale)).collect()).unwrap()
}

/// Orthogonal matrix from Gram–Schmidt on a random square matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut q = Matrix::zeros(n, n);
    let mut j = 0;
    while j < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| v[i] * q[(i, k)]).sum();
            for i in 0..n {
                v[i] -= dot * q[(i, k)];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            for i in 0..n {
                q[(i, j)] = v[i] / norm;
            }
            j += 1;
        }
    }
    q
}

/// `(A, B)` with an uncontrollable mode of modulus in `[1.2, 2]`, hidden by an
/// orthogonal change of basis.
pub fn unstabilizable_pair(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Matrix, Matrix) {
    let mut a = uniform_matrix(rng, n, n, -2.0, 2.0);
    let mut b = uniform_matrix(rng, n, m, -2.0, 2.0);
    for j in 0..n - 1 {
        a[(n - 1, j)] = 0.0;
    }
    let mode: f64 = rng.random_range(1.2..2.0);
    a[(n - 1, n - 1)] = if rng.random_bool(0.5) { mode } else { -mode };
    for j in 0..m {
        b[(n - 1, j)] = 0.0;
    }
    let t = random_orthogonal(rng, n);
    (&(&t * &a) * &t.transpose(), &t * &b)
}
