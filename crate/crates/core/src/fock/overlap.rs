//! Matrix elements <m| D(alpha e^{i phi}) |k> of the displacement operator.
//!
//! For real alpha >= 0 the element factorizes as c_km e^{i phi (m - k)} with
//!
//! ```text
//! c_km = e^{-alpha^2/2} sqrt(min!/max!) alpha^{|m-k|} L_min^{|m-k|}(alpha^2) (-1)^{(k-m) Theta(k-m)}
//! ```
//!
//! All magnitudes are accumulated in log space so that levels well past 30
//! neither overflow nor underflow prematurely.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::special::{laguerre_assoc, laguerre_sweep, ln_factorial};
use crate::error::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("displacement amplitude {alpha} must be finite and >= 0")));
    }
    Ok(())
}

/// sign(a) * exp(ln_mag + ln|a|), zero when a == 0.
#[inline]
fn signed_exp(ln_mag: f64, a: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.signum() * (ln_mag + a.abs().ln()).exp()
    }
}

#[inline]
fn ln_prefactor(mu: usize, d: usize, alpha: f64) -> f64 {
    let ln_alpha_pow = if d == 0 { 0.0 } else { d as f64 * alpha.ln() };
    0.5 * (ln_factorial(mu) - ln_factorial(mu + d)) + ln_alpha_pow - 0.5 * alpha * alpha
}

/// <m| D(alpha e^{i phi}) |k>.
pub fn displaced_fock_overlap(m: usize, k: usize, alpha: f64, phi: f64) -> Result<C64> {
    check_alpha(alpha)?;
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("phase {phi} is not finite")));
    }
    let mu = m.min(k);
    let d = m.abs_diff(k);
    let magnitude = if alpha == 0.0 {
        if m == k { 1.0 } else { 0.0 }
    } else {
        let lag = laguerre_assoc(mu, d, alpha * alpha)?;
        signed_exp(ln_prefactor(mu, d, alpha), lag)
    };
    let sign = if k > m && (k - m) % 2 == 1 { -1.0 } else { 1.0 };
    let phase = C64::from_polar(1.0, phi * (m as f64 - k as f64));
    Ok(phase * (sign * magnitude))
}

/// Real overlap magnitudes c_km for k < `in_dim`, m < `out_dim`, optionally
/// with d(c_km^2)/d alpha.
#[derive(Debug, Clone)]
pub struct OverlapKernel {
    alpha: f64,
    coeffs: DMatrix<f64>,
    sq_derivative: Option<DMatrix<f64>>,
}

impl OverlapKernel {
    pub fn new(alpha: f64, in_dim: usize, out_dim: usize) -> Result<Self> {
        Self::build(alpha, in_dim, out_dim, false)
    }

    /// Also tabulates d(c_km^2)/d alpha; requires alpha > 0.
    pub fn with_derivative(alpha: f64, in_dim: usize, out_dim: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(
                "derivative with respect to alpha is only defined for alpha > 0".into(),
            ));
        }
        Self::build(alpha, in_dim, out_dim, true)
    }

    fn build(alpha: f64, in_dim: usize, out_dim: usize, derivative: bool) -> Result<Self> {
        check_alpha(alpha)?;
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidArgument("kernel dimensions must be positive".into()));
        }
        if alpha == 0.0 {
            let coeffs = DMatrix::from_fn(in_dim, out_dim, |k, m| if k == m { 1.0 } else { 0.0 });
            return Ok(Self { alpha, coeffs, sq_derivative: None });
        }
        let x = alpha * alpha;
        let dmax = in_dim.max(out_dim) - 1;
        let pmax = in_dim.min(out_dim) - 1;
        // lag[d][p] = L_p^d(x), one extra order in d for the derivative.
        let lag: Vec<Vec<f64>> = (0..=dmax + 1).map(|d| laguerre_sweep(pmax, d, x)).collect();
        if lag.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Range(format!(
                "Laguerre table overflowed for alpha = {alpha}, dims ({in_dim}, {out_dim})"
            )));
        }
        let mut coeffs = DMatrix::zeros(in_dim, out_dim);
        let mut dsq = if derivative { Some(DMatrix::zeros(in_dim, out_dim)) } else { None };
        for k in 0..in_dim {
            for m in 0..out_dim {
                let mu = m.min(k);
                let d = m.abs_diff(k);
                let ln_s = ln_prefactor(mu, d, alpha);
                let l = lag[d][mu];
                let sign = if k > m && (k - m) % 2 == 1 { -1.0 } else { 1.0 };
                coeffs[(k, m)] = sign * signed_exp(ln_s, l);
                if let Some(dsq) = dsq.as_mut() {
                    let l_lower = if mu == 0 { 0.0 } else { lag[d + 1][mu - 1] };
                    let bracket = (d as f64 - x) * l - 2.0 * x * l_lower;
                    // 2 s^2 L [(d - x) L - 2 x L_{mu-1}^{d+1}] / alpha
                    dsq[(k, m)] = signed_exp(2.0 * ln_s + (2.0 / alpha).ln(), l * bracket);
                }
            }
        }
        Ok(Self { alpha, coeffs, sq_derivative: dsq })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn in_dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.coeffs.ncols()
    }

    /// c_km
    #[inline]
    pub fn coeff(&self, k: usize, m: usize) -> f64 {
        self.coeffs[(k, m)]
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn sq_derivative(&self) -> Option<&DMatrix<f64>> {
        self.sq_derivative.as_ref()
    }

    /// sum_m c_km^2 over the tabulated output levels.
    pub fn row_norm_sq(&self, k: usize) -> f64 {
        self.coeffs.row(k).iter().map(|c| c * c).sum()
    }
}
