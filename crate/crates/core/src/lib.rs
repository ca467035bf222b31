//! Analysis and synthesis of finite-impulse-response (FIR) output-feedback
//! controllers for discrete-time linear systems.

pub mod analysis;
pub mod benchmarks;
pub mod error;
pub mod firdesign;
pub mod lmi;
pub mod matlib;
pub mod sim;
pub mod sysmodel;

pub use error::{Error, Result};
