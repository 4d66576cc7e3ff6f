//! Fixed-point restoration priors for linear inverse problems.
//!
//! A restoration operator `R` built for a degradation class `D` defines an
//! implicit prior through the fixed-point set of `T = R o D`. The solver in
//! [`engine`] alternates weighted prior residuals `x - R(Hx + w)` with the
//! proximal step of the data term `1/2 ||Ax - y||^2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datafit;
pub mod degradations;
pub mod diagnostics;
pub mod engine;
mod error;
pub mod fft;
mod par;
pub mod remote;
pub mod restorers;
pub mod tensor;

pub use error::{FireError, Result};
