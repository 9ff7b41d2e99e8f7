//! Galerkin finite elements for 1D nonlinear diffusion problems whose
//! boundary and initial data are incompatible at a time-space corner.
//!
//! The solution is split as `u = S + v_h`, where `S` is a combination of
//! erfc-type corner functions that carries the singular part and `v_h` is a
//! continuous piecewise-linear field with compatible data.

// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fem;
pub mod problem;
pub mod special;
pub mod timestep;

pub use error::{Error, Result};
