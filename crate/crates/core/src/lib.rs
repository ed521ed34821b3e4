//! Pseudo-spectral solver and diagnostics for the Zakharov-Kuznetsov (ZK)
//! and modified ZK equations on a periodic box.
//!
//! Fourier coefficients use the unitary convention
//! `f̂(γ) = (2π)^{-1} ∫ e^{-i x·γ} f(x) dx`, discretised on a centred box, so a
//! coefficient approximates the continuous transform at its lattice point.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyticity;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod initial;
pub mod integrator;
pub mod probes;
pub mod rng;
pub mod spectral;
pub mod window;

pub use error::{Error, Result};
