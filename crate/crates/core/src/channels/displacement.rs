//! Displacements whose phase is uniformly randomized from shot to shot.
//!
//! Three physical realizations are supported:
//!
//! * `Displace`: U = D(alpha e^{i phi})
//! * `RotatedDisplace`: U = R^dagger(phi) D(alpha) R(phi)
//! * `DisplaceRotate`: U = D(alpha) R(phi)
//!
//! with R(phi) = exp(-i phi a^dagger a). After averaging over phi all three
//! share the same output diagonal, which depends only on the input diagonal.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::state::DEFAULT_TAIL_BUDGET;
use crate::fock::{DensityMatrix, NumberDistribution, OverlapKernel};

/// Levels beyond the input support the output may grow by before giving up.
const MAX_EXTRA_LEVELS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelVariant {
    Displace,
    RotatedDisplace,
    DisplaceRotate,
}

impl ChannelVariant {
    pub const ALL: [ChannelVariant; 3] =
        [ChannelVariant::Displace, ChannelVariant::RotatedDisplace, ChannelVariant::DisplaceRotate];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub alpha: f64,
    pub variant: ChannelVariant,
}

impl ChannelConfig {
    pub fn new(alpha: f64, variant: ChannelVariant) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must be finite and >= 0")));
        }
        Ok(Self { alpha, variant })
    }
}

/// Diagonal trimmed to its last strictly positive entry.
pub(crate) fn trimmed_diagonal(diag: &[f64]) -> Vec<f64> {
    let last = diag.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    diag[..=last].to_vec()
}

/// Overlap kernel whose output window loses at most `tail_budget` of the
/// displaced input mass.
pub(crate) fn sized_kernel(
    diag: &[f64],
    alpha: f64,
    tail_budget: f64,
    derivative: bool,
) -> Result<OverlapKernel> {
    let in_dim = diag.len();
    let build = |out: usize| {
        if derivative {
            OverlapKernel::with_derivative(alpha, in_dim, out)
        } else {
            OverlapKernel::new(alpha, in_dim, out)
        }
    };
    if alpha == 0.0 {
        return build(in_dim);
    }
    let mut out_dim = in_dim + (5.0 * alpha * (in_dim as f64).sqrt()).ceil() as usize + 4;
    loop {
        let kernel = build(out_dim)?;
        let lost: f64 =
            diag.iter().enumerate().map(|(k, p)| p.max(0.0) * (1.0 - kernel.row_norm_sq(k)).max(0.0)).sum();
        if lost <= tail_budget {
            return Ok(kernel);
        }
        if out_dim >= in_dim + MAX_EXTRA_LEVELS {
            return Err(Error::Truncation { lost, budget: tail_budget, dim: out_dim });
        }
        out_dim += (out_dim / 4).max(4);
    }
}

/// P_n^alpha = sum_k rho_k c_kn^2, built from the diagonal only.
pub fn phase_randomized_diagonals(rho: &DensityMatrix, alpha: f64) -> Result<NumberDistribution> {
    phase_randomized_distribution(&rho.diagonal(), alpha, DEFAULT_TAIL_BUDGET)
}

/// Same as [`phase_randomized_diagonals`] for a bare occupation vector.
pub fn phase_randomized_distribution(diag: &[f64], alpha: f64, tail_budget: f64) -> Result<NumberDistribution> {
    ChannelConfig::new(alpha, ChannelVariant::Displace)?;
    let diag = trimmed_diagonal(diag);
    let kernel = sized_kernel(&diag, alpha, tail_budget, false)?;
    let probs = distribute(&diag, &kernel);
    let input_total: f64 = diag.iter().sum();
    let total: f64 = probs.iter().sum();
    if (input_total - total).abs() > tail_budget + 1e-12 {
        return Err(Error::Truncation { lost: input_total - total, budget: tail_budget, dim: probs.len() });
    }
    NumberDistribution::unnormalized(probs)
}

/// P_n on an explicit output window of `out_dim` levels (no budget check).
pub fn phase_randomized_diagonals_at(diag: &[f64], alpha: f64, out_dim: usize) -> Result<Vec<f64>> {
    let kernel = OverlapKernel::new(alpha, diag.len(), out_dim)?;
    Ok(distribute(diag, &kernel))
}

pub(crate) fn distribute(diag: &[f64], kernel: &OverlapKernel) -> Vec<f64> {
    let c = kernel.coeffs();
    (0..kernel.out_dim())
        .map(|n| diag.iter().enumerate().map(|(k, p)| p * c[(k, n)] * c[(k, n)]).sum())
        .collect()
}

/// Full phase-averaged output matrix, off-diagonals included.
pub fn phase_randomized_full(rho: &DensityMatrix, alpha: f64, variant: ChannelVariant) -> Result<DensityMatrix> {
    ChannelConfig::new(alpha, variant)?;
    let diag = trimmed_diagonal(&rho.diagonal());
    // Keep coherences that live above the trimmed diagonal out of the picture:
    // they cannot exist in a positive matrix.
    let in_dim = diag.len();
    let kernel = sized_kernel(&diag, alpha, DEFAULT_TAIL_BUDGET, false)?;
    let c = kernel.coeffs();
    let out_dim = kernel.out_dim();
    let elems = rho.elems();
    let mut out = DMatrix::<C64>::zeros(out_dim, out_dim);
    match variant {
        ChannelVariant::Displace | ChannelVariant::RotatedDisplace => {
            // sum over k, l with m - k = m' - l
            for m in 0..out_dim {
                for mp in 0..out_dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..in_dim {
                        let l = k as isize - m as isize + mp as isize;
                        if l < 0 || l as usize >= in_dim {
                            continue;
                        }
                        let l = l as usize;
                        acc += elems[(k, l)] * (c[(k, m)] * c[(l, mp)]);
                    }
                    out[(m, mp)] = acc;
                }
            }
        }
        ChannelVariant::DisplaceRotate => {
            for m in 0..out_dim {
                for mp in m..out_dim {
                    let v: f64 = (0..in_dim).map(|k| diag[k] * c[(k, m)] * c[(k, mp)]).sum();
                    out[(m, mp)] = C64::new(v, 0.0);
                    out[(mp, m)] = C64::new(v, 0.0);
                }
            }
        }
    }
    DensityMatrix::from_raw(out)
}
