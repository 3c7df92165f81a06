//! Desk-scale numerical laboratory for the complex admittivity equation
//! `div(γ∇u) = 0` with prescribed boundary current, built around one question:
//! how much does a single power measurement tell you about the size of an
//! inclusion?
//!
//! The crate provides:
//!
//! * structured meshes of the reference domains and cell-set inclusion masks
//!   ([`geometry`]),
//! * complex-valued P1 finite elements for the zero-mean Neumann problem
//!   ([`fem`]),
//! * power gaps, exact discrete energy identities, and explicit energy bounds
//!   ([`power`]),
//! * the closed-form one-dimensional theory on `(-1, 1)` ([`oned`]),
//! * quantitative unique-continuation diagnostics: Almgren frequency,
//!   three-spheres and doubling ratios, propagation-of-smallness scans, and
//!   fractional boundary norms ([`ucp`]),
//! * even reflection across a flat Neumann boundary ([`reflect`]),
//! * the empirical size-estimate sweep harness ([`sizelab`]).
//!
//! The core is `no_std` + `alloc`; IO, configuration, and file formats live in
//! the companion CLI crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod error;
pub mod fem;
pub mod geometry;
pub mod oned;
pub mod power;
pub mod quadrature;
pub mod reflect;
pub mod rng;
pub mod sizelab;
pub mod solver;
pub mod ucp;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

pub use error::{Error, Result};
