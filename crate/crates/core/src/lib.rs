//! Remote state preparation (RSP) treated as a single-qubit quantum channel.
//!
//! The crate simulates the protocol over arbitrary two-qubit resource states,
//! reconstructs the resulting process matrix, and decides whether the process
//! could have been produced by a classical (hidden-state) strategy.

pub mod fixtures;
pub mod linalg;
pub mod metrics;
pub mod qstate;
pub mod rsp;
pub mod sdp;
pub mod tol;
pub mod tomo;

pub use linalg::{CMatrix, HermEig, LinalgError, Subsystem};
pub use num_complex::Complex64;
