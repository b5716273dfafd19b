//! Numerical engines for Muckenhoupt-type weight classes on the disk, the
//! circle and ℂⁿ: Berezin, Poisson and heat transforms, Toeplitz truncations,
//! weighted projection norms and a dyadic reverse Hölder pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod polar;
pub mod quad;
pub mod reverse_holder;
pub mod symbols;
pub mod transforms;
pub mod weight_classes;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
