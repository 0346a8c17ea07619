//! Dissipative two-level atom whose evolution time is a Gamma-distributed
//! random variable.
//!
//! The averaged dynamics are computed by three independent routes that
//! cross-check each other:
//!
//! * closed forms for the averaged populations and coherences,
//! * the matrix function `V(t) = (I - tau G)^(-t/tau)` acting on the
//!   vectorized density matrix,
//! * direct quadrature of `e^{G t'}` over the Gamma distribution of `t'`.
//!
//! Two further routes integrate master equations with fixed-step RK4: the
//! exact log-generator equation and its small-`tau` expansion.

// NaN-rejecting checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
mod error;
pub mod generator;
pub mod linalg;
pub mod operator;
pub mod random_time;

pub use error::{Error, Result};
