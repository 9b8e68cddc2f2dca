//! Probe-state families and solvers that tune each family to a target mean
//! occupation.
//!
//! Every family is a real pure state in the number basis. Amplitudes are
//! generated as a converged series, then cut to the smallest dimension whose
//! tail mass is inside the truncation budget.

mod gkp;

pub use gkp::{gkp_mean_approx, gkp_mean_exact, gkp_number_distribution, GkpGrid, GKP_K_MAX, GKP_POINTS, GKP_X_MAX};

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::special::{airy_ai, ln_factorial, AIRY_FIRST_ZERO};
use crate::fock::{DensityMatrix, NumberDistribution, TruncationPolicy};

/// Longest amplitude series any analytic family may need.
const MAX_SERIES_LEVELS: usize = 100_000;
/// A series stops once a term past the peak has ln(a^2 / a_max^2) below this.
const SERIES_CUTOFF: f64 = -42.0;
/// Number of levels projected when a GKP state is only used for its moments.
const GKP_MOMENT_DIM: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateSpec {
    Fock {
        n: usize,
    },
    /// Squeezed vacuum with the given mean occupation.
    GaussianSqueezed {
        mean_n: f64,
    },
    Cat {
        alpha: f64,
        #[serde(default)]
        parity: Parity,
    },
    /// Cat with a Gaussian envelope of strength `delta` in number space.
    Moon {
        delta: f64,
        alpha: f64,
        #[serde(default)]
        parity: Parity,
    },
    Gkp {
        delta: f64,
    },
    Compass {
        alpha: f64,
    },
    NumberPhase {
        mu: f64,
        spacing: usize,
        #[serde(default)]
        offset: usize,
    },
    /// Equal-weight superposition of the listed levels.
    FockSuperposition {
        levels: Vec<usize>,
    },
    Coherent {
        alpha: f64,
    },
}

fn finite_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} = {v} must be finite and >= 0")));
    }
    Ok(())
}

impl StateSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            StateSpec::Fock { .. } => "fock",
            StateSpec::GaussianSqueezed { .. } => "gaussian_squeezed",
            StateSpec::Cat { .. } => "cat",
            StateSpec::Moon { .. } => "moon",
            StateSpec::Gkp { .. } => "gkp",
            StateSpec::Compass { .. } => "compass",
            StateSpec::NumberPhase { .. } => "number_phase",
            StateSpec::FockSuperposition { .. } => "fock_superposition",
            StateSpec::Coherent { .. } => "coherent",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Fock { .. } => Ok(()),
            StateSpec::GaussianSqueezed { mean_n } => finite_nonneg("mean_n", *mean_n),
            StateSpec::Cat { alpha, parity } | StateSpec::Moon { alpha, parity, .. } => {
                finite_nonneg("alpha", *alpha)?;
                if let StateSpec::Moon { delta, .. } = self {
                    finite_nonneg("delta", *delta)?;
                }
                if *alpha == 0.0 && *parity == Parity::Odd {
                    return Err(Error::InvalidState("odd cat with alpha = 0 is the null vector".into()));
                }
                Ok(())
            }
            StateSpec::Gkp { delta } => {
                if !(*delta > 0.1 && *delta <= 2.0) {
                    return Err(Error::InvalidArgument(format!("GKP delta = {delta} outside (0.1, 2]")));
                }
                Ok(())
            }
            StateSpec::Compass { alpha } | StateSpec::Coherent { alpha } => finite_nonneg("alpha", *alpha),
            StateSpec::NumberPhase { mu, spacing, offset } => {
                if !(*mu > 0.0) || !mu.is_finite() {
                    return Err(Error::InvalidArgument(format!("mu = {mu} must be > 0")));
                }
                if *spacing == 0 || offset >= spacing {
                    return Err(Error::InvalidArgument(format!(
                        "number-phase spacing {spacing} and offset {offset} need 0 <= offset < spacing"
                    )));
                }
                Ok(())
            }
            StateSpec::FockSuperposition { levels } => {
                let mut sorted = levels.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if levels.is_empty() || sorted.len() != levels.len() {
                    return Err(Error::InvalidArgument("levels must be non-empty and distinct".into()));
                }
                Ok(())
            }
        }
    }

    /// Support spacing of the number distribution. `None` for GKP, whose
    /// support is only approximately structured beyond being even.
    pub fn declared_spacing(&self) -> Option<usize> {
        match self {
            StateSpec::GaussianSqueezed { .. } | StateSpec::Cat { .. } | StateSpec::Moon { .. } => Some(2),
            StateSpec::Compass { .. } => Some(4),
            StateSpec::NumberPhase { spacing, .. } => Some(*spacing),
            StateSpec::Coherent { .. } => Some(1),
            StateSpec::Gkp { .. } | StateSpec::Fock { .. } | StateSpec::FockSuperposition { .. } => None,
        }
    }
}

/// Normalized amplitudes from log-magnitudes on the lattice offset + k step.
///
/// The generator returns (ln|a_n|, sign); the series is unimodal for every
/// family that uses it, so it stops at the first post-peak term below cutoff.
fn log_series(offset: usize, step: usize, term: impl Fn(usize) -> Result<(f64, f64)>) -> Result<Vec<f64>> {
    let mut logs: Vec<(usize, f64, f64)> = Vec::new();
    let mut max_ln = f64::NEG_INFINITY;
    let mut n = offset;
    loop {
        if n > MAX_SERIES_LEVELS {
            return Err(Error::Truncation { lost: f64::NAN, budget: 0.0, dim: MAX_SERIES_LEVELS });
        }
        let (ln_a, sign) = term(n)?;
        if ln_a == f64::NEG_INFINITY {
            if max_ln > f64::NEG_INFINITY {
                break;
            }
        } else {
            let past_peak = ln_a < max_ln;
            max_ln = max_ln.max(ln_a);
            logs.push((n, ln_a, sign));
            if past_peak && 2.0 * (ln_a - max_ln) < SERIES_CUTOFF {
                break;
            }
        }
        n += step;
    }
    let len = logs.last().map_or(1, |l| l.0 + 1);
    let mut amps = vec![0.0; len];
    for (n, ln_a, sign) in logs {
        amps[n] = sign * (ln_a - max_ln).exp();
    }
    normalize(&mut amps)?;
    Ok(amps)
}

fn normalize(amps: &mut [f64]) -> Result<()> {
    let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidState("state has no weight".into()));
    }
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok(())
}

/// Converged, normalized amplitudes. GKP is projected onto `gkp_dim` levels
/// and also returns its missing mass.
fn series(spec: &StateSpec, gkp_dim: usize) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    let analytic = match spec {
        StateSpec::Fock { n } => {
            let mut a = vec![0.0; n + 1];
            a[*n] = 1.0;
            a
        }
        StateSpec::FockSuperposition { levels } => {
            let top = *levels.iter().max().unwrap();
            let mut a = vec![0.0; top + 1];
            let w = (levels.len() as f64).sqrt().recip();
            for l in levels {
                a[*l] = w;
            }
            a
        }
        StateSpec::GaussianSqueezed { mean_n } => {
            if *mean_n == 0.0 {
                vec![1.0]
            } else {
                let (nb, ln_nb, ln_1p) = (*mean_n, mean_n.ln(), mean_n.ln_1p());
                log_series(0, 2, |n| {
                    let m = n / 2;
                    let ln_rho = ln_factorial(n) - 2.0 * ln_factorial(m) + m as f64 * ln_nb
                        - n as f64 * std::f64::consts::LN_2
                        - 0.5 * (n as f64 + 1.0) * ln_1p;
                    let _ = nb;
                    Ok((0.5 * ln_rho, if m % 2 == 0 { 1.0 } else { -1.0 }))
                })?
            }
        }
        StateSpec::Coherent { alpha } => poisson_like(*alpha, 0, 1)?,
        StateSpec::Cat { alpha, parity } => poisson_like(*alpha, parity.offset(), 2)?,
        StateSpec::Compass { alpha } => poisson_like(*alpha, 0, 4)?,
        StateSpec::Moon { delta, alpha, parity } => {
            if *alpha == 0.0 {
                vec![1.0]
            } else {
                let a2 = alpha * alpha;
                let nc = a2 * a2.tanh();
                let ln_alpha = alpha.ln();
                log_series(parity.offset(), 2, |n| {
                    let d = n as f64 - nc;
                    Ok((-delta * d * d / (4.0 * nc) + n as f64 * ln_alpha - 0.5 * ln_factorial(n), 1.0))
                })?
            }
        }
        StateSpec::NumberPhase { mu, spacing, offset } => {
            let slope = (mu * *spacing as f64).cbrt();
            log_series(*offset, *spacing, |n| {
                let k = (n - offset) / spacing;
                let ai = airy_ai(slope * (k + 1) as f64 - AIRY_FIRST_ZERO)?;
                Ok((ai.abs().ln(), ai.signum()))
            })?
        }
        StateSpec::Gkp { delta } => return gkp::gkp_amplitudes(*delta, gkp_dim),
    };
    Ok((analytic, 0.0))
}

/// alpha^n / sqrt(n!) on the lattice offset + k step.
fn poisson_like(alpha: f64, offset: usize, step: usize) -> Result<Vec<f64>> {
    if alpha == 0.0 {
        return Ok(vec![1.0]);
    }
    let ln_alpha = alpha.ln();
    log_series(offset, step, |n| Ok((n as f64 * ln_alpha - 0.5 * ln_factorial(n), 1.0)))
}

/// Smallest prefix of `amps` whose tail, plus `extra_lost` already outside
/// the series, fits the budget.
fn truncated(amps: &[f64], extra_lost: f64, trunc: &TruncationPolicy) -> Result<Vec<f64>> {
    let mut tail = vec![0.0; amps.len() + 1];
    for n in (0..amps.len()).rev() {
        tail[n] = tail[n + 1] + amps[n] * amps[n];
    }
    let need = (1..=amps.len()).find(|&d| tail[d] + extra_lost <= trunc.tail_budget);
    match need {
        Some(d) if d <= trunc.dim => Ok(amps[..d].to_vec()),
        _ => {
            let d = trunc.dim.min(amps.len());
            Err(Error::Truncation { lost: tail[d] + extra_lost, budget: trunc.tail_budget, dim: trunc.dim })
        }
    }
}

/// Real amplitudes of the state, cut to the smallest admissible dimension
/// and renormalized.
pub fn amplitudes(spec: &StateSpec, trunc: &TruncationPolicy) -> Result<Vec<f64>> {
    let (amps, lost) = series(spec, trunc.dim)?;
    let mut kept = truncated(&amps, lost, trunc)?;
    normalize(&mut kept)?;
    Ok(kept)
}

/// Pure-state projector of the spec.
pub fn build(spec: &StateSpec, trunc: &TruncationPolicy) -> Result<DensityMatrix> {
    let amps = amplitudes(spec, trunc)?;
    DensityMatrix::pure(&DVector::from_iterator(amps.len(), amps.iter().map(|a| C64::new(*a, 0.0))))
}

/// Number distribution of the spec on the same window `build` would use.
pub fn number_distribution(spec: &StateSpec, trunc: &TruncationPolicy) -> Result<NumberDistribution> {
    let amps = amplitudes(spec, trunc)?;
    NumberDistribution::new(amps.iter().map(|a| a * a).collect(), trunc.tail_budget)
}

/// Mean occupation of the untruncated state.
pub fn mean_occupation(spec: &StateSpec) -> Result<f64> {
    if let StateSpec::Gkp { delta } = spec {
        return gkp::gkp_mean_exact(*delta);
    }
    let (amps, lost) = series(spec, GKP_MOMENT_DIM)?;
    if lost > 1e-8 {
        return Err(Error::Truncation { lost, budget: 1e-8, dim: GKP_MOMENT_DIM });
    }
    let kept: f64 = amps.iter().map(|a| a * a).sum();
    Ok(amps.iter().enumerate().map(|(n, a)| n as f64 * a * a).sum::<f64>() / kept)
}

/// Closed-form compass occupation.
pub fn compass_mean(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    a2 * (a2.sinh() - a2.sin()) / (a2.cosh() + a2.cos())
}

/// Bisection for f(x) = target with f monotone on [lo, hi].
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, target: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo)? - target, f(hi)? - target);
    if flo.abs() < tol {
        return Ok(lo);
    }
    if fhi.abs() < tol {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "target {target} not bracketed: f({lo}) = {}, f({hi}) = {}",
            flo + target,
            fhi + target
        )));
    }
    let rising = fhi > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)? - target;
        if v.abs() < tol {
            return Ok(mid);
        }
        if (v > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Bracket(format!("bisection for target {target} did not reach tol {tol}")))
}

/// Tunes the free parameter of `template` (alpha, mu or Delta; the squeezed
/// mean directly) so that the mean occupation is within `tol` of `target`.
/// Fixed parameters such as the moon Delta, parity and number-phase spacing
/// are taken from the template.
pub fn solve_for_occupation(template: &StateSpec, target: f64, tol: f64) -> Result<StateSpec> {
    if !(target >= 0.0) || !target.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("target {target} and tol {tol} must be >= 0 and > 0")));
    }
    let alpha_hi = target.sqrt() + 10.0;
    let solved = match template {
        StateSpec::Fock { .. } => {
            let n = target.round();
            if (n - target).abs() > tol {
                return Err(Error::Bracket(format!("no Fock state has mean {target}")));
            }
            StateSpec::Fock { n: n as usize }
        }
        StateSpec::GaussianSqueezed { .. } => StateSpec::GaussianSqueezed { mean_n: target },
        StateSpec::Coherent { .. } => StateSpec::Coherent { alpha: target.sqrt() },
        StateSpec::FockSuperposition { .. } => {
            let m = mean_occupation(template)?;
            if (m - target).abs() > tol {
                return Err(Error::Bracket(format!("superposition has fixed mean {m}, target {target}")));
            }
            template.clone()
        }
        StateSpec::Cat { parity, .. } => {
            let p = *parity;
            let lo = if p == Parity::Odd { 1e-3 } else { 0.0 };
            let a = bisect(|a| mean_occupation(&StateSpec::Cat { alpha: a, parity: p }), lo, alpha_hi, target, tol)?;
            StateSpec::Cat { alpha: a, parity: p }
        }
        StateSpec::Moon { delta, parity, .. } => {
            let (d, p) = (*delta, *parity);
            let lo = if p == Parity::Odd { 1e-3 } else { 0.0 };
            let make = |a: f64| StateSpec::Moon { delta: d, alpha: a, parity: p };
            let a = bisect(|a| mean_occupation(&make(a)), lo, alpha_hi, target, tol)?;
            make(a)
        }
        StateSpec::Compass { .. } => {
            let a = bisect(|a| Ok(compass_mean(a)), 0.0, alpha_hi, target, tol)?;
            StateSpec::Compass { alpha: a }
        }
        StateSpec::NumberPhase { spacing, offset, .. } => {
            let (s, q) = (*spacing, *offset);
            let make = |ln_mu: f64| StateSpec::NumberPhase { mu: ln_mu.exp(), spacing: s, offset: q };
            let ln_mu = bisect(|x| mean_occupation(&make(x)), (1e-7f64).ln(), (1e4f64).ln(), target, tol)?;
            make(ln_mu)
        }
        StateSpec::Gkp { .. } => {
            // The occupation turns around at Delta = 1; only the branch below
            // it is used.
            let d = bisect(|d| mean_occupation(&StateSpec::Gkp { delta: d }), 0.1 + 1e-9, 1.0, target, tol)?;
            StateSpec::Gkp { delta: d }
        }
    };
    Ok(solved)
}

/// Equal-weight |n - 2> + |n + 2> for an integer target n >= 2.
fn superposition_around(target: f64, tol: f64) -> Result<StateSpec> {
    let n = target.round();
    if (n - target).abs() > tol || n < 2.0 {
        return Err(Error::Bracket(format!("no |n-2> + |n+2> superposition has mean {target}")));
    }
    let n = n as usize;
    Ok(StateSpec::FockSuperposition { levels: vec![n - 2, n + 2] })
}

/// The twelve probe states compared at equal occupation, with short labels.
pub fn comparison_zoo(target: f64, tol: f64) -> Result<Vec<(String, StateSpec)>> {
    let templates: Vec<(&str, StateSpec)> = vec![
        ("squeezed_vacuum", StateSpec::GaussianSqueezed { mean_n: 0.0 }),
        ("even_cat", StateSpec::Cat { alpha: 0.0, parity: Parity::Even }),
        ("number_phase_2", StateSpec::NumberPhase { mu: 1.0, spacing: 2, offset: 0 }),
        ("gkp", StateSpec::Gkp { delta: 0.5 }),
        ("moon_1", StateSpec::Moon { delta: 1.0, alpha: 0.0, parity: Parity::Even }),
        ("moon_2", StateSpec::Moon { delta: 2.0, alpha: 0.0, parity: Parity::Even }),
        ("moon_3", StateSpec::Moon { delta: 3.0, alpha: 0.0, parity: Parity::Even }),
        ("moon_4", StateSpec::Moon { delta: 4.0, alpha: 0.0, parity: Parity::Even }),
        ("fock", StateSpec::Fock { n: 0 }),
        ("fock_superposition", superposition_around(target, tol)?),
        ("compass", StateSpec::Compass { alpha: 0.0 }),
        ("number_phase_4", StateSpec::NumberPhase { mu: 1.0, spacing: 4, offset: 0 }),
    ];
    templates
        .into_iter()
        .map(|(label, t)| Ok((label.to_string(), solve_for_occupation(&t, target, tol)?)))
        .collect()
}
