//! State-transformation channels: phase-randomized displacements, small-time
//! decoherence maps, the closed-form thermal solution and an RK4 master-equation
//! integrator.

pub mod decoherence;
pub mod displacement;
pub mod master;

pub use decoherence::{
    exact_lindblad, exact_lindblad_with, small_time_diagonal, small_time_map, DecoherenceRegime,
    SmallTimeConfig, ThermalBathConfig,
};
pub use displacement::{
    phase_randomized_diagonals, phase_randomized_diagonals_at, phase_randomized_distribution,
    phase_randomized_full, ChannelConfig, ChannelVariant,
};
pub use master::{integrate_master, lindblad_rhs, Generator};
