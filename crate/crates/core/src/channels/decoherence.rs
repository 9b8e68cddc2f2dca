//! Thermal decoherence of a single bosonic mode: the first-order small-time
//! map and the closed-form solution of the thermal master equation.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ladder::{lower_sandwich, number_anticommutator, raise_sandwich};
use crate::fock::{DensityMatrix, TruncationPolicy};

/// Above this value of the expansion parameter the first-order map is
/// reported as unreliable.
pub const SMALL_TIME_WARN: f64 = 0.1;

/// Mode coupled to a thermal bath: collapse operators sqrt(gamma (nbar + 1)) a
/// and sqrt(gamma nbar) a^dagger, plus free evolution omega a^dagger a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBathConfig {
    pub gamma: f64,
    pub nbar: f64,
    #[serde(default)]
    pub omega: f64,
}

impl ThermalBathConfig {
    pub fn new(gamma: f64, nbar: f64, omega: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !(nbar >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bath needs gamma >= 0 and nbar >= 0 (got gamma = {gamma}, nbar = {nbar})"
            )));
        }
        Ok(Self { gamma, nbar, omega })
    }

    pub fn loss(gamma: f64) -> Self {
        Self { gamma, nbar: 0.0, omega: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoherenceRegime {
    /// nbar = 0
    Loss,
    /// nbar >> 1 limit with eps_bar = tau * nbar as the only knob
    Heating,
    /// first-order map with both tau and nbar
    General,
}

/// Small-time map parameters: `tau` is the dimensionless time gamma * t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallTimeConfig {
    pub tau: f64,
    pub nbar: f64,
    pub regime: DecoherenceRegime,
}

impl SmallTimeConfig {
    pub fn loss(tau: f64) -> Self {
        Self { tau, nbar: 0.0, regime: DecoherenceRegime::Loss }
    }

    /// Heating with expansion parameter eps_bar = tau * nbar.
    pub fn heating(tau: f64, nbar: f64) -> Self {
        Self { tau, nbar, regime: DecoherenceRegime::Heating }
    }

    pub fn general(tau: f64, nbar: f64) -> Self {
        Self { tau, nbar, regime: DecoherenceRegime::General }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau = {} must be >= 0", self.tau)));
        }
        if !(self.nbar >= 0.0) || !self.nbar.is_finite() {
            return Err(Error::InvalidArgument(format!("nbar = {} must be >= 0", self.nbar)));
        }
        Ok(())
    }

    /// eps_bar = tau * nbar (heating knob).
    pub fn eps_bar(&self) -> f64 {
        self.tau * self.nbar
    }

    /// Coefficients (c0, c1, c_up, c_down) of
    /// rho (1 - c0) - c1 (rho N + N rho) + c_up a^dag rho a + c_down a rho a^dag.
    pub fn coefficients(&self) -> [f64; 4] {
        match self.regime {
            DecoherenceRegime::Loss => [0.0, 0.5 * self.tau, 0.0, self.tau],
            DecoherenceRegime::Heating => {
                let e = self.eps_bar();
                [e, e, e, e]
            }
            DecoherenceRegime::General => {
                let (t, n) = (self.tau, self.nbar);
                [t * n, t * (n + 0.5), t * n, t * (n + 1.0)]
            }
        }
    }

    /// Size of the first-order step used for the reliability warning.
    pub fn expansion_size(&self) -> f64 {
        match self.regime {
            DecoherenceRegime::Loss => self.tau,
            DecoherenceRegime::Heating => self.eps_bar(),
            DecoherenceRegime::General => self.tau * (self.nbar + 1.0),
        }
    }
}

/// First-order small-time decoherence map
/// rho (1 - eps n_-) - eps n_bar (rho N + N rho) + eps n_- a^dag rho a + eps n_+ a rho a^dag.
///
/// The output gains one level whenever the map can raise excitations. The
/// result is not guaranteed positive for large steps, so it is not validated.
pub fn small_time_map(rho: &DensityMatrix, cfg: &SmallTimeConfig) -> Result<DensityMatrix> {
    cfg.validate()?;
    if cfg.expansion_size() > SMALL_TIME_WARN {
        log::warn!("small-time map used outside its regime (step {:.3e})", cfg.expansion_size());
    }
    let [c0, c1, c_up, c_down] = cfg.coefficients();
    let d = rho.dim();
    let out_dim = if c_up > 0.0 { d + 1 } else { d };
    let src = rho.elems();
    let mut out = DMatrix::<C64>::zeros(out_dim, out_dim);
    {
        let anti = number_anticommutator(src);
        let lowered = lower_sandwich(src);
        let mut block = out.view_mut((0, 0), (d, d));
        block += src.scale(1.0 - c0) - anti.scale(c1) + lowered.scale(c_down);
    }
    if c_up > 0.0 {
        out += raise_sandwich(src, out_dim).scale(c_up);
    }
    let result = DensityMatrix::from_raw(out)?;
    let drift = (result.trace() - rho.trace()).abs();
    if drift > 1e-8 {
        return Err(Error::TraceDrift { drift, tol: 1e-8 });
    }
    Ok(result)
}

/// Diagonal-only version of [`small_time_map`]: the update rules
/// rho_n + tau [-n rho_n + (n+1) rho_{n+1}] (loss) and
/// rho_n + eps_bar [n rho_{n-1} - (2n+1) rho_n + (n+1) rho_{n+1}] (heating).
pub fn small_time_diagonal(diag: &[f64], cfg: &SmallTimeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let [c0, c1, c_up, c_down] = cfg.coefficients();
    let d = diag.len();
    let out_dim = if c_up > 0.0 { d + 1 } else { d };
    let get = |i: isize| if i >= 0 && (i as usize) < d { diag[i as usize] } else { 0.0 };
    Ok((0..out_dim)
        .map(|n| {
            let nf = n as f64;
            let i = n as isize;
            get(i) * (1.0 - c0 - 2.0 * c1 * nf) + c_up * nf * get(i - 1) + c_down * (nf + 1.0) * get(i + 1)
        })
        .collect())
}

/// Closed-form solution of the thermal master equation at time `t`, with the
/// default truncation policy.
pub fn exact_lindblad(rho: &DensityMatrix, t: f64, bath: &ThermalBathConfig) -> Result<DensityMatrix> {
    let policy = TruncationPolicy { dim: (rho.dim() * 4).max(crate::fock::state::DEFAULT_MAX_DIM), ..Default::default() };
    exact_lindblad_with(rho, t, bath, &policy)
}

/// Closed-form thermal-bath solution
///
/// ```text
/// rho(t) = e^{gt/2}/F sum_j G^j/j! a^dag^j e^{-(i w t + ln F) N}
///          [sum_k E^k/k! a^k rho a^dag^k] e^{(i w t - ln F) N} a^j
/// ```
///
/// evaluated by repeated ladder application. The output window grows until
/// the mass lost past the top level is within `policy.tail_budget`.
pub fn exact_lindblad_with(
    rho: &DensityMatrix,
    t: f64,
    bath: &ThermalBathConfig,
    policy: &TruncationPolicy,
) -> Result<DensityMatrix> {
    ThermalBathConfig::new(bath.gamma, bath.nbar, bath.omega)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time t = {t} must be >= 0")));
    }
    if t == 0.0 || (bath.gamma == 0.0 && bath.omega == 0.0) {
        return Ok(rho.clone());
    }
    let gt = bath.gamma * t;
    let x = (-gt).exp();
    // F e^{-gt/2}, written so that nothing overflows for large gt.
    let f_scaled = 0.5 * (1.0 + x) + (2.0 * bath.nbar + 1.0) * 0.5 * (1.0 - x);
    let ln_f = 0.5 * gt + f_scaled.ln();
    let prefactor = 1.0 / f_scaled;
    let sinh_over_f = 0.5 * (1.0 - x) / f_scaled;
    let e_coef = 2.0 * (bath.nbar + 1.0) * sinh_over_f;
    let g_coef = 2.0 * bath.nbar * sinh_over_f;

    let initial = rho.trace();
    let mut out_dim = if bath.nbar > 0.0 {
        rho.dim() + (4.0 * bath.nbar * (rho.dim() as f64).sqrt() + 8.0 * bath.nbar).ceil() as usize + 8
    } else {
        rho.dim()
    };
    let cap = policy.dim.max(rho.dim());
    loop {
        out_dim = out_dim.min(cap);
        let result = lindblad_terms(rho, out_dim, t, bath.omega, ln_f, e_coef, g_coef, prefactor);
        let lost = initial - result.trace().re;
        if lost <= policy.tail_budget {
            return DensityMatrix::from_raw(result);
        }
        if out_dim >= cap {
            return Err(Error::Truncation { lost, budget: policy.tail_budget, dim: out_dim });
        }
        out_dim += (out_dim / 2).max(8);
    }
}

#[allow(clippy::too_many_arguments)]
fn lindblad_terms(
    rho: &DensityMatrix,
    out_dim: usize,
    t: f64,
    omega: f64,
    ln_f: f64,
    e_coef: f64,
    g_coef: f64,
    prefactor: f64,
) -> DMatrix<C64> {
    const CUTOFF: f64 = 1e-14;
    let max_abs = |m: &DMatrix<C64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let start = rho.resized(out_dim).into_elems();
    let mut inner = start.clone();
    let mut term = start;
    let mut k = 1;
    while e_coef > 0.0 && k < out_dim {
        term = lower_sandwich(&term).scale(e_coef / k as f64);
        let size = max_abs(&term);
        if size == 0.0 {
            break;
        }
        inner += &term;
        if size < CUTOFF * max_abs(&inner) {
            break;
        }
        k += 1;
    }

    let middle = DMatrix::from_fn(out_dim, out_dim, |m, n| {
        let damp = (-((m + n) as f64) * ln_f).exp();
        inner[(m, n)] * C64::from_polar(damp, -omega * t * (m as f64 - n as f64))
    });

    let mut outer = middle.clone();
    let mut term = middle;
    let mut j = 1;
    while g_coef > 0.0 && j < 4 * out_dim {
        term = raise_sandwich(&term, out_dim).scale(g_coef / j as f64);
        let size = max_abs(&term);
        if size == 0.0 {
            break;
        }
        outer += &term;
        if size < CUTOFF * max_abs(&outer) {
            break;
        }
        j += 1;
    }
    outer.scale(prefactor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_on_fock_state() {
        let tau = 0.01;
        let rho = DensityMatrix::fock(4, 5).unwrap();
        let out = small_time_map(&rho, &SmallTimeConfig::loss(tau)).unwrap();
        let d = out.diagonal();
        assert!((d[4] - (1.0 - 4.0 * tau)).abs() < 1e-15);
        assert!((d[3] - 4.0 * tau).abs() < 1e-15);
    }

    #[test]
    fn zero_tau_is_identity() {
        let rho = DensityMatrix::thermal(1.0, 6).unwrap();
        let out = small_time_map(&rho, &SmallTimeConfig::general(0.0, 2.0)).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn heating_vacuum() {
        let eps_bar = 1e-3;
        let rho = DensityMatrix::vacuum(3).unwrap();
        let out = small_time_map(&rho, &SmallTimeConfig::heating(eps_bar / 50.0, 50.0)).unwrap();
        let d = out.diagonal();
        assert!((d[0] - (1.0 - eps_bar)).abs() < 1e-15);
        assert!((d[1] - eps_bar).abs() < 1e-15);
    }

    #[test]
    fn diagonal_rules_match_matrix_map() {
        let rho = DensityMatrix::thermal(0.8, 12).unwrap();
        for cfg in [SmallTimeConfig::loss(1e-3), SmallTimeConfig::heating(1e-4, 20.0), SmallTimeConfig::general(1e-3, 0.7)] {
            let full = small_time_map(&rho, &cfg).unwrap().diagonal();
            let fast = small_time_diagonal(&rho.diagonal(), &cfg).unwrap();
            assert_eq!(full.len(), fast.len());
            for (a, b) in full.iter().zip(&fast) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_zero_time_is_identity() {
        let rho = DensityMatrix::thermal(0.3, 5).unwrap();
        let out = exact_lindblad(&rho, 0.0, &ThermalBathConfig::new(1.0, 0.5, 0.0).unwrap()).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn exact_single_excitation_decay() {
        // Two-level rate equation d rho_11/dt = -gamma rho_11.
        let rho = DensityMatrix::fock(1, 2).unwrap();
        for t in [0.1, 0.7, 2.0] {
            let out = exact_lindblad(&rho, t, &ThermalBathConfig::loss(1.3)).unwrap();
            let d = out.diagonal();
            let p1 = (-1.3 * t).exp();
            assert!((d[1] - p1).abs() < 1e-14);
            assert!((d[0] - (1.0 - p1)).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_pure_loss_steady_state() {
        let rho = DensityMatrix::fock(6, 7).unwrap();
        let out = exact_lindblad(&rho, 40.0, &ThermalBathConfig::loss(1.0)).unwrap();
        assert!(out.trace_distance(&DensityMatrix::vacuum(7).unwrap()) < 1e-8);
    }

    #[test]
    fn exact_free_rotation_phases() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(0, 2)] = C64::new(0.5, 0.0);
        m[(2, 0)] = C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let bath = ThermalBathConfig::new(0.0, 0.0, 1.0).unwrap();
        let t = 0.4;
        let out = exact_lindblad(&rho, t, &bath).unwrap();
        let want = C64::from_polar(0.5, 2.0 * t);
        assert!((out.elems()[(0, 2)] - want).norm() < 1e-14);
    }

    #[test]
    fn heating_grows_window() {
        let rho = DensityMatrix::fock(2, 3).unwrap();
        let out = exact_lindblad(&rho, 1.0, &ThermalBathConfig::new(1.0, 2.0, 0.0).unwrap()).unwrap();
        assert!(out.dim() > 3);
        assert!((out.trace() - 1.0).abs() < 1e-10);
    }
}
