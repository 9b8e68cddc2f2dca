//! Randomized-Fourier drive pulses.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_COMPONENTS: usize = 12;
pub const DEFAULT_AMP_CAP: f64 = 150.0;
pub const DEFAULT_SIGMA: f64 = 10.0;

/// Frequency cutoff 50 T / 2 pi.
pub fn default_nu_max(t_total: f64) -> f64 {
    50.0 * t_total / (2.0 * std::f64::consts::PI)
}

/// Envelope tanh[s sin(pi t / 2T)] tanh[s sin(pi (T - t) / 2T)], zero at both ends.
pub fn scaling_function(t: f64, t_total: f64, sigma: f64) -> f64 {
    let w = std::f64::consts::PI / (2.0 * t_total);
    (sigma * (w * t).sin()).tanh() * (sigma * (w * (t_total - t)).sin()).tanh()
}

/// One dressing block: a frequency set shared by both quadratures, with
/// cosine and sine coefficients for Re and Im of the drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseBlock {
    pub nu: Vec<f64>,
    pub re_a: Vec<f64>,
    pub re_b: Vec<f64>,
    pub im_a: Vec<f64>,
    pub im_b: Vec<f64>,
}

impl PulseBlock {
    pub fn zeros(nu: Vec<f64>) -> Self {
        let n = nu.len();
        PulseBlock { nu, re_a: vec![0.0; n], re_b: vec![0.0; n], im_a: vec![0.0; n], im_b: vec![0.0; n] }
    }

    /// Coefficients laid out as [re_a, re_b, im_a, im_b].
    pub fn from_flat(nu: Vec<f64>, x: &[f64]) -> Result<Self> {
        let n = nu.len();
        if x.len() != 4 * n {
            return Err(Error::InvalidArgument(format!("expected {} coefficients, got {}", 4 * n, x.len())));
        }
        Ok(PulseBlock {
            nu,
            re_a: x[..n].to_vec(),
            re_b: x[n..2 * n].to_vec(),
            im_a: x[2 * n..3 * n].to_vec(),
            im_b: x[3 * n..].to_vec(),
        })
    }

    pub fn flat(&self) -> Vec<f64> {
        [&self.re_a[..], &self.re_b, &self.im_a, &self.im_b].concat()
    }

    /// Unscaled sum at t.
    fn raw(&self, t: f64) -> C64 {
        let mut z = C64::new(0.0, 0.0);
        for k in 0..self.nu.len() {
            let (s, c) = (self.nu[k] * t).sin_cos();
            z.re += self.re_a[k] * c + self.re_b[k] * s;
            z.im += self.im_a[k] * c + self.im_b[k] * s;
        }
        z
    }

    fn validate(&self) -> Result<()> {
        let n = self.nu.len();
        if [self.re_a.len(), self.re_b.len(), self.im_a.len(), self.im_b.len()].iter().any(|l| *l != n) {
            return Err(Error::InvalidArgument("pulse block coefficient lengths differ".into()));
        }
        if self.nu.iter().chain(self.flat().iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite pulse parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub t_total: f64,
    pub amp_cap: f64,
    pub sigma: f64,
    pub blocks: Vec<PulseBlock>,
}

impl PulseParams {
    pub fn zero(t_total: f64) -> Self {
        PulseParams { t_total, amp_cap: DEFAULT_AMP_CAP, sigma: DEFAULT_SIGMA, blocks: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_total > 0.0) || !self.t_total.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse duration {} must be > 0", self.t_total)));
        }
        if !(self.amp_cap > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument("amp_cap and sigma must be > 0".into()));
        }
        self.blocks.iter().try_for_each(PulseBlock::validate)
    }

    /// Drive Omega(t) = u + i v before clipping.
    pub fn unclipped(&self, t: f64) -> C64 {
        let f = scaling_function(t, self.t_total, self.sigma);
        self.blocks.iter().map(|b| b.raw(t)).sum::<C64>() * f
    }

    /// Drive with each quadrature clipped to the amplitude cap.
    pub fn omega(&self, t: f64) -> C64 {
        clip(self.unclipped(t), self.amp_cap)
    }

    /// Clipped drive at the midpoints of `steps` equal steps.
    pub fn samples(&self, steps: usize) -> Vec<C64> {
        let dt = self.t_total / steps as f64;
        (0..steps).map(|j| self.omega((j as f64 + 0.5) * dt)).collect()
    }
}

pub fn clip(z: C64, cap: f64) -> C64 {
    C64::new(z.re.clamp(-cap, cap), z.im.clamp(-cap, cap))
}

/// Scaled basis functions of one block on the step midpoints, so that a new
/// coefficient vector can be turned into drive samples with a dot product.
#[derive(Debug, Clone)]
pub(crate) struct BlockBasis {
    /// For each step: f(t) cos(nu_k t) then f(t) sin(nu_k t), k = 0..n.
    rows: Vec<f64>,
    n: usize,
}

impl BlockBasis {
    pub(crate) fn new(nu: &[f64], t_total: f64, sigma: f64, steps: usize) -> Self {
        let n = nu.len();
        let dt = t_total / steps as f64;
        let mut rows = Vec::with_capacity(steps * 2 * n);
        for j in 0..steps {
            let t = (j as f64 + 0.5) * dt;
            let f = scaling_function(t, t_total, sigma);
            rows.extend(nu.iter().map(|v| f * (v * t).cos()));
            rows.extend(nu.iter().map(|v| f * (v * t).sin()));
        }
        BlockBasis { rows, n }
    }

    /// base + block(x), clipped, with x laid out as in [`PulseBlock::from_flat`].
    pub(crate) fn samples(&self, base: &[C64], x: &[f64], cap: f64, out: &mut Vec<C64>) {
        let n = self.n;
        let (ra, rb, ia, ib) = (&x[..n], &x[n..2 * n], &x[2 * n..3 * n], &x[3 * n..]);
        out.clear();
        for (j, b) in base.iter().enumerate() {
            let row = &self.rows[j * 2 * n..(j + 1) * 2 * n];
            let (cs, sn) = row.split_at(n);
            let mut re = b.re;
            let mut im = b.im;
            for k in 0..n {
                re += ra[k] * cs[k] + rb[k] * sn[k];
                im += ia[k] * cs[k] + ib[k] * sn[k];
            }
            out.push(clip(C64::new(re, im), cap));
        }
    }
}

/// Unclipped midpoint samples of a pulse, the base onto which a new block is added.
pub(crate) fn unclipped_samples(pulse: &PulseParams, steps: usize) -> Vec<C64> {
    let dt = pulse.t_total / steps as f64;
    (0..steps).map(|j| pulse.unclipped((j as f64 + 0.5) * dt)).collect()
}
