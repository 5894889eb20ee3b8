//! Kernels of hypo-elliptic diffusion and convection-diffusion on the space
//! of positions and orientations `R³⋊S²`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod convolve;
pub mod error;
pub mod evolution;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod montecarlo;
pub mod quadrature;
pub mod sh;
pub mod spectral;
pub mod synthesis;

pub use error::{Error, Result};
