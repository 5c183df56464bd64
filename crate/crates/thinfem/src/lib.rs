//! Numerical workbench for concentrated forcing on thin two-dimensional
//! domains with weakly oscillating boundaries.
//!
//! The crate covers the full pipeline: domain geometry and flattening maps
//! (`geometry`), quasi-periodic means and homogenized coefficients
//! (`qmean`), strip-aligned triangulations (`meshgen`), the 2D finite
//! element solver in its physical and rectangle formulations (`fem2d`), the
//! reduced and limit 1D solvers (`fem1d`), and the study driver that ties
//! them together (`harness`).

// Domain checks are written as negated comparisons (`!(x > 0.0)`) so that
// NaN fails validation; `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem1d;
pub mod fem2d;
pub mod geometry;
pub mod harness;
pub mod meshgen;
pub mod numeric;
pub mod qmean;
pub mod sparse;
pub mod trig;

pub use error::{Error, Result};
