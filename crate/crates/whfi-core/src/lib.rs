//! Weyl-Heisenberg (Gabor) frame machinery on a discretized model of L²(ℝ).
//!
//! Signals live on a uniform grid over a truncated interval. On top of that
//! substrate the crate provides:
//!
//!   * [`signal`] — complex grid signals, inner product, translation,
//!     modulation, and a window factory,
//!   * [`lattice`] — the (a, b) time-frequency lattice and its
//!     grid-compatibility certificate,
//!   * [`correlation`] — the correlation functions G_k, the Wiener amalgam
//!     norm, and the CC-condition report,
//!   * [`gabor`] — frame coefficients, the frame operator S, frame-bound
//!     estimation, and reconstruction via conjugate gradients,
//!   * [`walnut`] — the Walnut series, its partial-sum operators, the
//!     identity right-hand side, and convergence diagnostics,
//!   * [`verify`] — scenario-level identity verification and divergence
//!     probes.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate. Every operation is a pure function of its inputs and, where seeded,
//! bit-for-bit reproducible.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive
// values, which `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod correlation;
mod eigen;
pub mod gabor;
pub mod lattice;
pub(crate) mod math;
pub mod rng;
pub mod signal;
pub(crate) mod sum;
pub mod verify;
pub mod walnut;

pub use num_complex::Complex64;
