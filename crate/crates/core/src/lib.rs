//! Coined quantum walks on `Z^d` with a single coin defect: construction of
//! the walk on a truncated periodic box, its spectrum relative to the
//! essential-spectrum arcs of the bulk, and certificates for the exponential
//! decay of eigenfunctions attached to isolated eigenvalues.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod exec;
pub mod lattice;
pub mod linalg;
pub mod spectrum;
pub mod walk;

pub use error::{Error, Result};
pub use exec::Execution;
pub use faer::c64;
