//! The four benchmark plants used throughout the test suites and the CLI.

use crate::matlib::Matrix;
use crate::sysmodel::{tf_to_ss, StateSpaceSystem, TransferFunctionSiso};

/// `(z - 2) / ((z - 3)(z - 4))`: strongly stabilizable.
pub fn g1() -> TransferFunctionSiso {
    TransferFunctionSiso::from_coeffs(&[1.0, -2.0], &[1.0, -7.0, 12.0]).expect("valid transfer function")
}

/// `(z - 2) / (z (z - 3))`: violates parity interlacing.
pub fn g2() -> TransferFunctionSiso {
    TransferFunctionSiso::from_coeffs(&[1.0, -2.0], &[1.0, -3.0, 0.0]).expect("valid transfer function")
}

pub fn system1() -> StateSpaceSystem {
    tf_to_ss(&g1()).expect("strictly proper")
}

pub fn system2() -> StateSpaceSystem {
    tf_to_ss(&g2()).expect("strictly proper")
}

/// Discretized batch reactor (sampling period 0.1), two-decimal data.
pub fn system3() -> StateSpaceSystem {
    let a = Matrix::from_rows(&[
        [1.18, 0.0, 0.51, -0.40],
        [-0.05, 0.66, -0.01, 0.06],
        [0.08, 0.34, 0.56, 0.38],
        [0.0, 0.34, 0.09, 0.85],
    ])
    .expect("rectangular");
    let b = Matrix::column(&[0.0, 0.47, 0.21, 0.21]);
    let c = Matrix::from_rows(&[[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 1.0, -1.0]]).expect("rectangular");
    StateSpaceSystem::new(a, b, c).expect("consistent dimensions")
}

pub fn system4() -> StateSpaceSystem {
    let a = Matrix::from_rows(&[[1.0, -0.3, 0.6], [0.0, 0.0, 1.0], [0.29, -0.8, 1.0]]).expect("rectangular");
    let b = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).expect("rectangular");
    let c = Matrix::row(&[1.0, 1.0, 0.0]);
    StateSpaceSystem::new(a, b, c).expect("consistent dimensions")
}

/// All four plants, in order.
pub fn all() -> [StateSpaceSystem; 4] {
    [system1(), system2(), system3(), system4()]
}
