//! Qubit coupled to a truncated boson by H = s- a^dagger + Omega(t) s+ + h.c.
//!
//! Joint index is s * D + n with s = 0 for the ground and s = 1 for the
//! excited qubit level. Coherent steps are Strang-split into exact 2x2
//! rotations: a drive half-step on every (g n, e n) pair, the coupling on
//! every (e n, g n+1) pair, then the second drive half-step. Each factor is
//! unitary, so the norm is conserved to roundoff whatever the drive amplitude.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::pulse::PulseParams;
use crate::channels::ThermalBathConfig;
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

/// Norm or trace drift tolerated over a run.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Default number of time steps per pulse.
pub const DEFAULT_STEPS: usize = 2000;
/// Default boson truncation for control runs.
pub const DEFAULT_CONTROL_DIM: usize = 32;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense H at time t, for checks.
pub fn hamiltonian_at(t: f64, pulse: &PulseParams, dim: usize) -> DMatrix<C64> {
    hamiltonian_with_drive(pulse.omega(t), dim)
}

pub fn hamiltonian_with_drive(omega: C64, dim: usize) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(2 * dim, 2 * dim);
    for n in 0..dim {
        // <e n| H |g n> = Omega
        h[(dim + n, n)] = omega;
        h[(n, dim + n)] = omega.conj();
        if n + 1 < dim {
            // <g n+1| H |e n> = sqrt(n + 1)
            let c = C64::new(((n + 1) as f64).sqrt(), 0.0);
            h[(n + 1, dim + n)] = c;
            h[(dim + n, n + 1)] = c;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub enum JointState {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonState {
    pub dim: usize,
    pub joint: JointState,
}

impl SpinBosonState {
    pub fn ground(dim: usize) -> Self {
        let mut psi = DVector::zeros(2 * dim);
        psi[0] = C64::new(1.0, 0.0);
        SpinBosonState { dim, joint: JointState::Pure(psi) }
    }

    /// Boson state with the qubit traced out.
    pub fn boson(&self) -> Result<DensityMatrix> {
        let d = self.dim;
        let m = match &self.joint {
            JointState::Pure(psi) => DMatrix::from_fn(d, d, |a, b| {
                psi[a] * psi[b].conj() + psi[d + a] * psi[d + b].conj()
            }),
            JointState::Mixed(rho) => DMatrix::from_fn(d, d, |a, b| rho[(a, b)] + rho[(d + a, d + b)]),
        };
        DensityMatrix::from_raw(m)
    }

    pub fn boson_diagonal(&self) -> Vec<f64> {
        let d = self.dim;
        match &self.joint {
            JointState::Pure(psi) => boson_diagonal(psi.as_slice(), d),
            JointState::Mixed(rho) => (0..d).map(|n| rho[(n, n)].re + rho[(d + n, d + n)].re).collect(),
        }
    }

    /// Population of the excited qubit level.
    pub fn excited_population(&self) -> f64 {
        let d = self.dim;
        match &self.joint {
            JointState::Pure(psi) => psi.as_slice()[d..].iter().map(|z| z.norm_sqr()).sum(),
            JointState::Mixed(rho) => (d..2 * d).map(|i| rho[(i, i)].re).sum(),
        }
    }
}

pub(crate) fn boson_diagonal(psi: &[C64], d: usize) -> Vec<f64> {
    (0..d).map(|n| psi[n].norm_sqr() + psi[d + n].norm_sqr()).collect()
}

/// Fixed-step propagator for a given truncation and step count.
#[derive(Debug, Clone)]
pub struct SpinBoson {
    dim: usize,
    steps: usize,
}

/// Precomputed coupling rotations for one step length.
struct Coupling {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Coupling {
    fn new(dim: usize, dt: f64) -> Self {
        let (sin, cos) = (0..dim.saturating_sub(1)).map(|n| (((n + 1) as f64).sqrt() * dt).sin_cos()).unzip();
        Coupling { cos, sin }
    }

    fn apply(&self, v: &mut [C64], d: usize) {
        for n in 0..self.cos.len() {
            let (c, s) = (self.cos[n], self.sin[n]);
            let e = v[d + n];
            let g = v[n + 1];
            v[d + n] = e * c - I * g * s;
            v[n + 1] = g * c - I * e * s;
        }
    }
}

fn drive(v: &mut [C64], d: usize, omega: C64, h: f64) {
    let r = omega.norm();
    if r == 0.0 {
        return;
    }
    let (s, c) = (r * h).sin_cos();
    let k = s / r;
    for n in 0..d {
        let g = v[n];
        let e = v[d + n];
        v[n] = g * c - I * k * omega.conj() * e;
        v[d + n] = e * c - I * k * omega * g;
    }
}

/// Boson dissipator on the joint matrix, with the boson frequency rotation.
fn dissipator(rho: &DMatrix<C64>, d: usize, bath: &ThermalBathConfig) -> DMatrix<C64> {
    let n2 = 2 * d;
    let down = bath.gamma * (bath.nbar + 1.0);
    let up = bath.gamma * bath.nbar;
    let level = |i: usize| i % d;
    let aad = |m: usize| if m + 1 < d { (m + 1) as f64 } else { 0.0 };
    DMatrix::from_fn(n2, n2, |i, j| {
        let (m, k) = (level(i), level(j));
        let mut acc = rho[(i, j)] * (-0.5 * down * (m + k) as f64 - 0.5 * up * (aad(m) + aad(k)));
        if m + 1 < d && k + 1 < d {
            acc += rho[(i + 1, j + 1)] * (down * (((m + 1) * (k + 1)) as f64).sqrt());
        }
        if m >= 1 && k >= 1 {
            acc += rho[(i - 1, j - 1)] * (up * ((m * k) as f64).sqrt());
        }
        if bath.omega != 0.0 {
            acc -= I * rho[(i, j)] * (bath.omega * (m as f64 - k as f64));
        }
        acc
    })
}

fn rk4_dissipator(rho: &mut DMatrix<C64>, d: usize, bath: &ThermalBathConfig, h: f64) {
    let k1 = dissipator(rho, d, bath);
    let k2 = dissipator(&(&*rho + k1.scale(0.5 * h)), d, bath);
    let k3 = dissipator(&(&*rho + k2.scale(0.5 * h)), d, bath);
    let k4 = dissipator(&(&*rho + k3.scale(h)), d, bath);
    *rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
}

/// rho -> U rho U^dagger for a column operation U.
fn conjugate_by(rho: &mut DMatrix<C64>, op: impl Fn(&mut [C64])) {
    for mut col in rho.column_iter_mut() {
        op(col.as_mut_slice());
    }
    *rho = rho.adjoint();
    for mut col in rho.column_iter_mut() {
        op(col.as_mut_slice());
    }
}

impl SpinBoson {
    pub fn new(dim: usize, steps: usize) -> Result<Self> {
        if dim < 2 || steps == 0 {
            return Err(Error::InvalidArgument(format!("need dim >= 2 and steps >= 1, got {dim}, {steps}")));
        }
        Ok(SpinBoson { dim, steps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Evolves |g, 0> under the pulse, with the boson bath if given.
    pub fn evolve(&self, pulse: &PulseParams, bath: Option<&ThermalBathConfig>) -> Result<SpinBosonState> {
        pulse.validate()?;
        let samples = pulse.samples(self.steps);
        self.evolve_samples(SpinBosonState::ground(self.dim), &samples, pulse.t_total / self.steps as f64, bath)
    }

    /// Evolves `init` with one drive sample per step of length dt.
    pub fn evolve_samples(
        &self,
        init: SpinBosonState,
        samples: &[C64],
        dt: f64,
        bath: Option<&ThermalBathConfig>,
    ) -> Result<SpinBosonState> {
        if init.dim != self.dim {
            return Err(Error::InvalidArgument(format!("state dim {} != simulator dim {}", init.dim, self.dim)));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("step dt = {dt} must be > 0")));
        }
        let d = self.dim;
        let coupling = Coupling::new(d, dt);
        let bath = match bath {
            Some(b) => {
                ThermalBathConfig::new(b.gamma, b.nbar, b.omega)?;
                (b.gamma > 0.0 || b.omega != 0.0).then_some(b)
            }
            None => None,
        };
        let joint = match (init.joint, bath) {
            (JointState::Pure(mut psi), None) => {
                self.run_pure(psi.as_mut_slice(), samples, dt, &coupling)?;
                JointState::Pure(psi)
            }
            (joint, bath) => {
                let mut rho = match joint {
                    JointState::Pure(psi) => &psi * psi.adjoint(),
                    JointState::Mixed(rho) => rho,
                };
                let trace0: f64 = (0..2 * d).map(|i| rho[(i, i)].re).sum();
                for &omega in samples {
                    if let Some(b) = bath {
                        rk4_dissipator(&mut rho, d, b, 0.5 * dt);
                    }
                    conjugate_by(&mut rho, |v| {
                        drive(v, d, omega, 0.5 * dt);
                        coupling.apply(v, d);
                        drive(v, d, omega, 0.5 * dt);
                    });
                    if let Some(b) = bath {
                        rk4_dissipator(&mut rho, d, b, 0.5 * dt);
                    }
                    rho = (&rho + rho.adjoint()).scale(0.5);
                    let trace: f64 = (0..2 * d).map(|i| rho[(i, i)].re).sum();
                    if (trace - trace0).abs() > NORM_DRIFT_TOL || !trace.is_finite() {
                        return Err(Error::TraceDrift { drift: (trace - trace0).abs(), tol: NORM_DRIFT_TOL });
                    }
                }
                JointState::Mixed(rho)
            }
        };
        Ok(SpinBosonState { dim: d, joint })
    }

    fn run_pure(&self, psi: &mut [C64], samples: &[C64], dt: f64, coupling: &Coupling) -> Result<()> {
        let d = self.dim;
        let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        for &omega in samples {
            drive(psi, d, omega, 0.5 * dt);
            coupling.apply(psi, d);
            drive(psi, d, omega, 0.5 * dt);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - norm0).abs() > NORM_DRIFT_TOL || !norm.is_finite() {
            return Err(Error::TraceDrift { drift: (norm - norm0).abs(), tol: NORM_DRIFT_TOL });
        }
        Ok(())
    }

    /// Final boson diagonal from |g, 0> for the given samples, without
    /// allocating a state record. Used inside the optimizer loop.
    pub(crate) fn final_diagonal(&self, samples: &[C64], dt: f64, scratch: &mut Vec<C64>) -> Result<Vec<f64>> {
        let d = self.dim;
        scratch.clear();
        scratch.resize(2 * d, C64::new(0.0, 0.0));
        scratch[0] = C64::new(1.0, 0.0);
        let coupling = Coupling::new(d, dt);
        self.run_pure(scratch, samples, dt, &coupling)?;
        Ok(boson_diagonal(scratch, d))
    }
}
