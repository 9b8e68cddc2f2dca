//! Phase-insensitive force sensing with bosonic probes.
//!
//! The crate is organized bottom-up:
//!
//! * [`fock`] truncated Fock-space types, special functions and overlaps,
//! * [`channels`] phase-randomized displacements and thermal decoherence,
//! * [`metrology`] Fisher information, gain and analytic expansions,
//! * [`zoo`] probe-state families and occupation solvers,
//! * [`control`] the spin-boson simulator and dCRAB optimizer.

pub mod channels;
pub mod control;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod zoo;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, NumberDistribution, TruncationPolicy};
