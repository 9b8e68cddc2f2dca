//! Truncated Fock-space foundation: special functions, the displaced-Fock
//! overlap kernel, state types, ladder actions and Wigner evaluation.

pub mod ladder;
pub mod overlap;
pub mod special;
pub mod state;
pub mod wigner;

pub use overlap::{displaced_fock_overlap, OverlapKernel};
pub use special::{airy_ai, hermite_functions, laguerre_assoc, ln_factorial};
pub use state::{DensityMatrix, NumberDistribution, TruncationPolicy};
pub use wigner::{wigner_at, wigner_grid, wigner_sample, WignerSample};
