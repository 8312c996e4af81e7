//! Spectral Galerkin numerics for the stochastic Allen-Cahn equation on the
//! two-dimensional torus `T² = [0, 2π)²` driven by spectrally truncated
//! space-time white noise.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. With `std` the Fourier transforms run on `rustfft`; without it a
//! direct separable DFT is used, which is exact but only practical for small
//! grids.
//!
//! Module map:
//!
//! * [`spectral`]: band-limited real fields, the FFT bridge to physical space,
//!   pointwise nonlinearities and the heat semigroup.
//! * [`besov`]: Littlewood-Paley blocks, `Lᵖ` and Besov norms, and the
//!   numerical check of the heat-semigroup smoothing estimate.
//! * [`renorm`]: lattice sums, the renormalisation constant `C_ε`, the
//!   free-field variance `D_ε²` and Wick powers.
//! * [`noise`]: the truncated cylindrical Wiener process and the stationary
//!   Ornstein-Uhlenbeck stochastic convolution `z_ε`.
//! * [`integrators`]: exponential time stepping of the regularised equation,
//!   the shifted equation for `v_ε = u_ε − z_ε` and the deterministic limit.
//! * [`schedule`], [`stats`], [`seed`]: noise-strength schedules, Monte-Carlo
//!   aggregation and reproducible seed splitting used by the sweep driver.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod besov;
mod error;
pub mod fft;
pub mod integrators;
mod math;
pub mod noise;
pub mod renorm;
pub mod schedule;
pub mod seed;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
