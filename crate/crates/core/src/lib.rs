//! Numerics for the fractional Poisson process.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fraccalc;
pub mod laplace;
pub mod montecarlo;
pub mod process;
pub mod quad;
pub mod specfun;
pub mod table;

pub use error::{Error, Result};
