//! State preparation in a driven spin-boson system and its optimization.
//!
//! The reward is the gain after a small dose of decoherence minus a penalty
//! that pushes the mean occupation up to a target:
//!
//! ```text
//! F = f[rho after small-time map with tau = zeta alpha^2] - lambda (1 - <N>^2 / Ntilde^2) Theta(Ntilde - <N>)
//! ```

mod dcrab;
pub mod nelder_mead;
pub mod pulse;
pub mod spin_boson;

pub use dcrab::{
    dcrab_optimize, dimension_convergence, evaluate_under_preparation_noise, DcrabOptions, DcrabResult, PulseRecord,
};
pub use pulse::{default_nu_max, scaling_function, PulseBlock, PulseParams};
pub use spin_boson::{hamiltonian_at, hamiltonian_with_drive, JointState, SpinBoson, SpinBosonState};

use serde::{Deserialize, Serialize};

use crate::channels::{small_time_diagonal, SmallTimeConfig};
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::metrology::fisher_from_diagonal;

pub const DEFAULT_LAMBDA: f64 = 10.0;

/// Which small-time channel the reward protects against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardNoise {
    #[default]
    Loss,
    /// Heating with eps_bar = zeta alpha^2.
    Heating,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub alpha: f64,
    /// Decoherence strength relative to alpha^2.
    pub zeta: f64,
    pub ntilde: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub noise: RewardNoise,
}

impl RewardConfig {
    pub fn new(alpha: f64, zeta: f64, ntilde: f64) -> Result<Self> {
        let cfg = RewardConfig { alpha, zeta, ntilde, lambda: DEFAULT_LAMBDA, noise: RewardNoise::Loss };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha = {} must be > 0", self.alpha)));
        }
        if !(self.zeta >= 0.0) || !(self.lambda >= 0.0) || !(self.ntilde > 0.0) {
            return Err(Error::InvalidArgument("need zeta >= 0, lambda >= 0 and ntilde > 0".into()));
        }
        Ok(())
    }

    pub fn small_time(&self) -> SmallTimeConfig {
        let tau = self.zeta * self.alpha * self.alpha;
        match self.noise {
            RewardNoise::Loss => SmallTimeConfig::loss(tau),
            RewardNoise::Heating => SmallTimeConfig::heating(tau, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub reward: f64,
    /// Gain after the reward's small-time decoherence.
    pub gain: f64,
    pub mean_n: f64,
    /// Occupation penalty before the lambda weight.
    pub penalty: f64,
}

/// (1 - <N>^2 / Ntilde^2) Theta(Ntilde - <N>)
pub fn occupation_penalty(mean_n: f64, ntilde: f64) -> f64 {
    if mean_n < ntilde {
        1.0 - mean_n * mean_n / (ntilde * ntilde)
    } else {
        0.0
    }
}

pub fn reward(rho: &DensityMatrix, cfg: &RewardConfig) -> Result<RewardBreakdown> {
    reward_from_diagonal(&rho.diagonal(), cfg)
}

pub fn reward_from_diagonal(diag: &[f64], cfg: &RewardConfig) -> Result<RewardBreakdown> {
    cfg.validate()?;
    let mean_n: f64 = diag.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let noisy = small_time_diagonal(diag, &cfg.small_time())?;
    let gain = fisher_from_diagonal(&noisy, cfg.alpha)?.gain;
    let penalty = occupation_penalty(mean_n, cfg.ntilde);
    Ok(RewardBreakdown { reward: gain - cfg.lambda * penalty, gain, mean_n, penalty })
}
