//! Core numerics for studying excess-risk convergence of logistic-loss ReLU
//! network classifiers.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It provides:
//!
//! - [`distribution`]: the grid-of-bumps family of hard distributions with an
//!   exact regression function, exact Bayes risk, seeded sampling and the
//!   closed-form Hellinger distance between neighbouring members.
//! - [`surrogate`]: the logistic loss and its calibration calculus
//!   (`H`, `H⁻`, the ψ-transform, comparison inequalities).
//! - [`network`]: dense ReLU networks with clamped output, exact reverse-mode
//!   gradients and width sizing.
//! - [`construct`]: explicit ReLU constructions (approximate multiplication,
//!   gluing networks, composition of local approximants).
//! - [`erm`]: multi-restart mini-batch training of the empirical φ-risk
//!   minimiser and Monte Carlo risk evaluation against a known distribution.
//! - [`bounds`]: closed-form complexity bounds, the ♯-transform and rate curves.
//!
//! File formats, the experiment runner and the CLI live in the companion
//! `excess-risk-lab` crate.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used for every domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod construct;
pub mod distribution;
pub mod erm;
pub mod error;
pub mod math;
pub mod network;
pub mod quadrature;
pub mod surrogate;

pub use error::{Error, Result};
