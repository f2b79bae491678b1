//! Constrained ("submanifold") Schrödinger operators for curves and surfaces
//! embedded in Euclidean space.
//!
//! The crate is `no_std` (it needs `alloc`). The pipeline runs
//!
//! ```text
//! Embedding -> frames -> connection coefficients -> Hashimoto rotation
//!           -> effective potential + Laplace–Beltrami -> half-density gauge
//!           -> -Δ_S + V_eff -> lowest eigenpairs
//! ```
//!
//! and [`squeeze`] provides an independent check: the full Dirichlet problem
//! on a thin tube around the submanifold, with the transverse energy removed
//! and the thickness extrapolated to zero.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod dual;
mod error;
pub mod geometry;
pub mod frames;
pub mod linalg;
pub(crate) mod math;
pub mod operators;
pub mod spectra;
pub mod squeeze;
pub mod tubular;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
