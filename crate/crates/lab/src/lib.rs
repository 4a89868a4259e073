//! Experiment harness for the excess-risk numerics in `excess-risk-core`:
//! TOML configuration, CSV/JSON/binary formats, seeded resumable sweeps,
//! log-log rate fitting and the distribution check suite. The `erlab` binary
//! is a thin CLI over this library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod error;
pub mod fit;
pub mod io;
pub mod sweep;

pub use error::{LabError, LabResult};
