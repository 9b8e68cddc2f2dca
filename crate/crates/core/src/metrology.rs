//! Fisher information for number-resolving readout after a phase-randomized
//! displacement, the metrological gain relative to the coherent baseline, and
//! the analytic expansions used to interpret it.
//!
//! Only the diagonal of the probe enters anywhere in this module: the output
//! occupations P_n^alpha depend on the input occupations alone.

use serde::{Deserialize, Serialize};

use crate::channels::displacement::{distribute, sized_kernel, trimmed_diagonal};
use crate::channels::{exact_lindblad, small_time_diagonal, SmallTimeConfig, ThermalBathConfig};
use crate::error::{Error, Result};
use crate::fock::state::{DEFAULT_TAIL_BUDGET, NEGATIVE_CLAMP};
use crate::fock::{DensityMatrix, OverlapKernel};

/// Fisher information of the coherent (vacuum) probe, the gain normalization.
pub const COHERENT_FISHER: f64 = 4.0;
/// Occupations below this are treated as zero in the Fisher sum.
pub const PROBABILITY_FLOOR: f64 = 1e-14;
/// Squared derivatives below this are negligible for a floored occupation.
pub const NUMERATOR_FLOOR: f64 = 1e-20;
/// Diagonal entries at or below this count as exact zeros for spacing detection.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;
/// Gain must exceed 1 by this margin to count as an advantage.
pub const ADVANTAGE_MARGIN: f64 = 1e-9;
/// Endpoint resolution of dynamical-range intervals.
pub const RANGE_RESOLUTION: f64 = 1e-4;

/// A dropped Fisher term whose numerator was not negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorViolation {
    pub n: usize,
    pub prob: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub fisher: f64,
    pub gain: f64,
    pub alpha: f64,
    pub diagnostics: Vec<FloorViolation>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha}: Fisher information is only evaluated for alpha > 0"
        )));
    }
    Ok(())
}

fn clean_diagonal(diag: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(diag.len());
    for (index, &p) in diag.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidState(format!("non-finite occupation at n = {index}")));
        }
        if p < NEGATIVE_CLAMP {
            return Err(Error::NegativeProbability { index, value: p });
        }
        out.push(p.max(0.0));
    }
    if out.is_empty() {
        return Err(Error::InvalidState("empty diagonal".into()));
    }
    Ok(trimmed_diagonal(&out))
}

/// The Fisher tail weighs occupations by roughly (n / alpha)^2, so the window
/// that holds the mass to the tail budget is widened by half again.
fn fisher_kernel(diag: &[f64], alpha: f64) -> Result<OverlapKernel> {
    let sized = sized_kernel(diag, alpha, DEFAULT_TAIL_BUDGET, true)?;
    OverlapKernel::with_derivative(alpha, diag.len(), sized.out_dim() * 3 / 2 + 8)
}

/// Output occupations and their alpha-derivatives for a probe diagonal.
pub fn distribution_and_derivative(diag: &[f64], alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_alpha(alpha)?;
    let diag = clean_diagonal(diag)?;
    let kernel = fisher_kernel(&diag, alpha)?;
    let probs = distribute(&diag, &kernel);
    let dsq = kernel.sq_derivative().expect("kernel built with derivative");
    let deriv = (0..kernel.out_dim()).map(|n| diag.iter().enumerate().map(|(k, p)| p * dsq[(k, n)]).sum()).collect();
    Ok((probs, deriv))
}

/// dP_n/d alpha from the closed Laguerre form.
pub fn prob_derivative(rho: &DensityMatrix, alpha: f64) -> Result<Vec<f64>> {
    Ok(distribution_and_derivative(&rho.diagonal(), alpha)?.1)
}

/// F = sum_n (dP_n/d alpha)^2 / P_n and gain F/4.
pub fn fisher_information(rho: &DensityMatrix, alpha: f64) -> Result<FisherResult> {
    fisher_from_diagonal(&rho.diagonal(), alpha)
}

pub fn fisher_from_diagonal(diag: &[f64], alpha: f64) -> Result<FisherResult> {
    let (probs, deriv) = distribution_and_derivative(diag, alpha)?;
    Ok(fisher_from_parts(&probs, &deriv, alpha))
}

fn fisher_from_parts(probs: &[f64], deriv: &[f64], alpha: f64) -> FisherResult {
    let mut fisher = 0.0;
    let mut diagnostics = Vec::new();
    for (n, (&p, &dp)) in probs.iter().zip(deriv).enumerate() {
        let num = dp * dp;
        if p < PROBABILITY_FLOOR {
            if num >= NUMERATOR_FLOOR {
                diagnostics.push(FloorViolation { n, prob: p, derivative: dp });
            }
            continue;
        }
        fisher += num / p;
    }
    FisherResult { fisher, gain: fisher / COHERENT_FISHER, alpha, diagnostics }
}

/// Gain only.
pub fn gain(diag: &[f64], alpha: f64) -> Result<f64> {
    Ok(fisher_from_diagonal(diag, alpha)?.gain)
}

/// |F(window) - F(1.5 window)|: recomputes the Fisher sum on an output window
/// half again as large as the automatically chosen one.
pub fn truncation_convergence(diag: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let diag = clean_diagonal(diag)?;
    let kernel = fisher_kernel(&diag, alpha)?;
    let base = {
        let probs = distribute(&diag, &kernel);
        let dsq = kernel.sq_derivative().unwrap();
        let deriv: Vec<f64> =
            (0..kernel.out_dim()).map(|n| diag.iter().enumerate().map(|(k, p)| p * dsq[(k, n)]).sum()).collect();
        fisher_from_parts(&probs, &deriv, alpha).fisher
    };
    let wide = OverlapKernel::with_derivative(alpha, diag.len(), kernel.out_dim() * 3 / 2)?;
    let probs = distribute(&diag, &wide);
    let dsq = wide.sq_derivative().unwrap();
    let deriv: Vec<f64> =
        (0..wide.out_dim()).map(|n| diag.iter().enumerate().map(|(k, p)| p * dsq[(k, n)]).sum()).collect();
    Ok((fisher_from_parts(&probs, &deriv, alpha).fisher - base).abs())
}

/// 1 + 2 <N>
pub fn occupation_bound(rho: &DensityMatrix) -> f64 {
    1.0 + 2.0 * rho.mean_number()
}

fn mean(diag: &[f64]) -> f64 {
    diag.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

fn second_moment(diag: &[f64]) -> f64 {
    diag.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum()
}

/// Leading small-alpha coefficient B with F ~ 4 alpha^2 B:
///
/// ```text
/// B = (r0 - r1)^2 / r0 + sum_{n>=1} [n r_{n-1} - (2n+1) r_n + (n+1) r_{n+1}]^2 / r_n
/// ```
///
/// Terms whose denominator vanishes with a nonzero bracket are listed in
/// `divergent_at`; their presence means the state has gaps and F is O(1)
/// rather than O(alpha^2), so `coefficient` alone is not the expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallAlphaFisher {
    pub coefficient: f64,
    pub divergent_at: Vec<usize>,
}

impl SmallAlphaFisher {
    pub fn is_divergent(&self) -> bool {
        !self.divergent_at.is_empty()
    }
}

pub fn small_alpha_fisher(rho: &DensityMatrix) -> SmallAlphaFisher {
    small_alpha_fisher_diag(&rho.diagonal())
}

pub fn small_alpha_fisher_diag(diag: &[f64]) -> SmallAlphaFisher {
    let get = |i: usize| diag.get(i).copied().unwrap_or(0.0);
    let mut coefficient = 0.0;
    let mut divergent_at = Vec::new();
    let mut push = |n: usize, bracket: f64, denom: f64| {
        if denom > SUPPORT_THRESHOLD {
            coefficient += bracket * bracket / denom;
        } else if bracket * bracket >= NUMERATOR_FLOOR {
            divergent_at.push(n);
        }
    };
    push(0, get(0) - get(1), get(0));
    for n in 1..=diag.len() {
        let nf = n as f64;
        let bracket = nf * get(n - 1) - (2.0 * nf + 1.0) * get(n) + (nf + 1.0) * get(n + 1);
        push(n, bracket, get(n));
    }
    SmallAlphaFisher { coefficient, divergent_at }
}

/// N-spacing of the diagonal support: occupied levels are q, q + N, q + 2N, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spacing {
    pub spacing: usize,
    pub offset: usize,
    pub support: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Detects the spacing; a single occupied level reports the diagonal length.
pub fn detect_spacing(diag: &[f64]) -> Spacing {
    let support: Vec<usize> = diag.iter().enumerate().filter(|(_, p)| **p > SUPPORT_THRESHOLD).map(|(n, _)| n).collect();
    match support.as_slice() {
        [] => Spacing { spacing: diag.len(), offset: 0, support: 0 },
        [only] => Spacing { spacing: diag.len().max(only + 1), offset: *only, support: 1 },
        [first, rest @ ..] => {
            let g = rest.iter().fold(0, |g, n| gcd(g, n - first));
            Spacing { spacing: g, offset: first % g, support: support.len() }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub spacing: usize,
    pub offset: usize,
    /// 1 + 2 <N>
    pub leading: f64,
    /// Exact order-alpha^2 term for 2-spaced states, zero for a single level,
    /// `None` when only the order is known.
    pub correction: Option<f64>,
    /// Power of alpha of the first correction, 2 floor(N/2).
    pub correction_order: u32,
}

impl ExpansionReport {
    pub fn prediction(&self) -> Option<f64> {
        self.correction.map(|c| self.leading + c)
    }
}

/// Small-alpha expansion of the gain for an N-spaced probe.
pub fn expansion_spacing(rho: &DensityMatrix, alpha: f64) -> Result<ExpansionReport> {
    check_alpha(alpha)?;
    let diag = rho.diagonal();
    let sp = detect_spacing(&diag);
    if sp.spacing < 2 {
        return Err(Error::Spacing { required: 2, found: sp.spacing });
    }
    let n1 = mean(&diag);
    let n2 = second_moment(&diag);
    let correction = if sp.support <= 1 {
        Some(0.0)
    } else if sp.spacing == 2 {
        Some(-2.0 * alpha * alpha * (1.0 + n1 + n2))
    } else {
        None
    };
    Ok(ExpansionReport {
        spacing: sp.spacing,
        offset: sp.offset,
        leading: 1.0 + 2.0 * n1,
        correction,
        correction_order: 2 * (sp.spacing / 2) as u32,
    })
}

/// First-order deviation from ideal parity, eta = 1 - |P|, caused by the
/// small-time map on a parity-definite state.
pub fn parity_deviation(mean_n: f64, cfg: &SmallTimeConfig) -> f64 {
    use crate::channels::DecoherenceRegime::*;
    match cfg.regime {
        Loss => 2.0 * mean_n * cfg.tau,
        Heating => 2.0 * (2.0 * mean_n + 1.0) * cfg.eps_bar(),
        General => 2.0 * cfg.tau * ((2.0 * cfg.nbar + 1.0) * mean_n + cfg.nbar),
    }
}

/// Fixed-alpha perturbative gain under weak decoherence,
/// 1 + 2<N> - eta / (2 alpha^2), for states with spacing >= 2.
pub fn perturbative_gain(rho: &DensityMatrix, alpha: f64, cfg: &SmallTimeConfig) -> Result<f64> {
    check_alpha(alpha)?;
    cfg.validate()?;
    let sp = detect_spacing(&rho.diagonal());
    if sp.spacing < 2 {
        return Err(Error::Spacing { required: 2, found: sp.spacing });
    }
    let n = rho.mean_number();
    Ok(1.0 + 2.0 * n - parity_deviation(n, cfg) / (2.0 * alpha * alpha))
}

/// Fixed-tau perturbative gain under loss, 1 + <N> + <N> alpha^2 / tau, for
/// states with spacing >= 4.
pub fn perturbative_gain_fixed_tau(rho: &DensityMatrix, alpha: f64, tau: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be > 0 for the fixed-tau expansion")));
    }
    let sp = detect_spacing(&rho.diagonal());
    if sp.spacing < 4 {
        return Err(Error::Spacing { required: 4, found: sp.spacing });
    }
    let n = rho.mean_number();
    Ok(1.0 + n + n * alpha * alpha / tau)
}

/// Decoherence applied to the probe before the displacement channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoherence {
    None,
    SmallTime(SmallTimeConfig),
    Exact { bath: ThermalBathConfig, t: f64 },
}

impl Decoherence {
    /// Probe diagonal after decoherence.
    pub fn apply_diagonal(&self, diag: &[f64]) -> Result<Vec<f64>> {
        match self {
            Decoherence::None => Ok(diag.to_vec()),
            Decoherence::SmallTime(cfg) => small_time_diagonal(diag, cfg),
            Decoherence::Exact { bath, t } => {
                let rho = DensityMatrix::from_diagonal(diag)?;
                Ok(exact_lindblad(&rho, *t, bath)?.diagonal())
            }
        }
    }
}

/// Gain after decoherence then the displacement channel.
pub fn gain_under(diag: &[f64], decoherence: &Decoherence, alpha: f64) -> Result<f64> {
    gain(&decoherence.apply_diagonal(diag)?, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Alpha intervals on which gain > 1 after the given decoherence.
///
/// Endpoints between grid points are refined by bisection to 1e-4; runs that
/// touch the ends of the grid stop at the grid ends.
pub fn dynamical_range(rho: &DensityMatrix, decoherence: &Decoherence, alpha_grid: &[f64]) -> Result<Vec<Interval>> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidArgument("empty alpha grid".into()));
    }
    if alpha_grid.windows(2).any(|w| !(w[1] > w[0])) || !(alpha_grid[0] > 0.0) {
        return Err(Error::InvalidArgument("alpha grid must be positive and strictly increasing".into()));
    }
    let diag = decoherence.apply_diagonal(&rho.diagonal())?;
    let advantage = |a: f64| -> Result<bool> { Ok(gain(&diag, a)? > 1.0 + ADVANTAGE_MARGIN) };
    let flags = alpha_grid.iter().map(|&a| advantage(a)).collect::<Result<Vec<_>>>()?;

    // Bisection on [lo, hi] where advantage(lo) != advantage(hi).
    let refine = |mut lo: f64, mut hi: f64, lo_flag: bool| -> Result<f64> {
        while hi - lo > RANGE_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if advantage(mid)? == lo_flag {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = if i == 0 { alpha_grid[0] } else { refine(alpha_grid[i - 1], alpha_grid[i], false)? };
        let mut j = i;
        while j + 1 < flags.len() && flags[j + 1] {
            j += 1;
        }
        let end = if j + 1 == flags.len() { alpha_grid[j] } else { refine(alpha_grid[j], alpha_grid[j + 1], true)? };
        intervals.push(Interval { start, end });
        i = j + 1;
    }
    Ok(intervals)
}
