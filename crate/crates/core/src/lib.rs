//! Deterministic state-vector simulation of teleporting arbitrary `N`-qubit
//! states with `N` Bell pairs, Bell-basis measurements and conditional
//! single-qubit Pauli corrections.
//!
//! - [`qstate`]: dense complex state vectors over labeled qubits
//! - [`bell`]: Bell basis, pairs and measurement
//! - [`teleport`]: protocol engines, correction tables, derivation and certification
//! - [`harness`]: two-party sessions and transcripts
//! - [`cli`]: campaigns, uniformity statistics and reports

pub mod bell;
pub mod cli;
pub mod error;
pub mod harness;
pub mod qstate;
pub mod teleport;

pub use error::{Error, Result};
