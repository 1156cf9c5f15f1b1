//! Numerical building blocks for the norm-resolvent limit of one-dimensional
//! bosons with rescaled two-body potentials converging to δ-interactions.
//!
//! The crate is `no_std` (with `alloc`). It evaluates free Green's functions,
//! discretizes the integral kernels that appear in the Krein resolvent
//! formula, assembles factored resolvents and measures convergence rates.
//! IO, configuration and parallel drivers live in the `contact-limit` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod experiments;
pub mod forms;
pub mod greens;
pub mod kernels;
pub mod krein;
pub mod linalg;
pub mod math;
pub mod potentials;
pub mod quadrature;

pub use error::{Error, Result};
