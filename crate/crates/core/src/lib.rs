//! Conformal submersions between chart manifolds, their O'Neill tensors,
//! geodesics and the Clairaut criterion.

// `!(r <= tol)` is used on purpose so that NaN residuals fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod geodesic;
pub mod geometry;
pub mod submersion;
pub mod clairaut;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
