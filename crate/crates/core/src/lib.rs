//! Method-of-moments solver for TE scattering from multilayered cylinders,
//! with a single-source surface formulation and a two-current reference.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod admittance;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod media;
pub mod quadrature;
pub mod scene;
pub mod solver;
pub mod special;
pub mod study;

pub use error::{Error, Result};
