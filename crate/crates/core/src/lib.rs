//! Symmetric-polynomial functionals and a randomized verifier for the
//! concavity and convexity inequalities they satisfy.
//!
//! The crate is organised bottom-up:
//!
//! * [`sympoly`] evaluates `e_k` and `h_k` with overflow-safe log-domain kernels
//!   and keeps brute-force enumeration oracles next to them.
//! * [`parsum`] holds the parallel sum `x : y`, its power generalization and the
//!   recursive representation of the normalized ratio `e_k / e_{k-1}`.
//! * [`funcs`] builds the ratio and root functionals on top of the kernels.
//! * [`verify`] runs seeded, order-independent trials of every inequality and
//!   searches for counterexamples outside the proven parameter ranges.
//! * [`spectral`] adds the symmetric positive definite matrix variants.
//! * [`mc`] is a Monte Carlo cross-check of `h_k` via exponential moments.
//! * [`cli`] is the command-line front end.

// The `!(x >= 0.0)` form is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod funcs;
pub mod mc;
pub mod parsum;
pub mod seed;
pub mod spectral;
pub mod sympoly;
pub mod verify;

pub use error::{Error, Result};
pub use sympoly::{LogValue, PositiveVector};
