//! Minimum-energy densities on `[0, T]` for displacement kernels.
//!
//! Minimises `J[φ] = (γ/2)∫φ² + (1/2)∬ G(|t-s|) φ(t) φ(s)` over densities with
//! `∫φ = 1`, either on a uniform grid (any kernel) or in closed form for
//! exponential sums, the capped linear kernel and the cosine kernel. The
//! `diagnostics` module checks the shape of the result.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;

pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod expo;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelStructure};
