//! Fixed-step RK4 integration of the thermal Lindblad master equation with an
//! optional time-dependent Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::decoherence::ThermalBathConfig;
use crate::error::{Error, Result};
use crate::fock::ladder::{lower_sandwich, raise_sandwich};
use crate::fock::DensityMatrix;

/// Trace drift tolerated over a whole run.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Time-dependent Hermitian generator H(t).
pub type Generator<'a> = &'a dyn Fn(f64) -> DMatrix<C64>;

/// Lindblad right-hand side with collapse operators sqrt(g(n+1)) a and
/// sqrt(g n) a^dagger on the truncated space.
pub fn lindblad_rhs(rho: &DMatrix<C64>, h: Option<&DMatrix<C64>>, bath: &ThermalBathConfig) -> DMatrix<C64> {
    let d = rho.nrows();
    let i = C64::new(0.0, 1.0);
    let mut out = match h {
        Some(h) => (h * rho - rho * h) * (-i),
        None => DMatrix::zeros(d, d),
    };
    let down = bath.gamma * (bath.nbar + 1.0);
    let up = bath.gamma * bath.nbar;
    if down > 0.0 {
        out += lower_sandwich(rho).scale(down);
        out -= DMatrix::from_fn(d, d, |m, n| rho[(m, n)] * (0.5 * down * (m + n) as f64));
    }
    if up > 0.0 {
        out += raise_sandwich(rho, d).scale(up);
        // a a^dagger on the truncated space is diag(1, ..., D-1, 0).
        let w = |n: usize| if n + 1 < d { (n + 1) as f64 } else { 0.0 };
        out -= DMatrix::from_fn(d, d, |m, n| rho[(m, n)] * (0.5 * up * (w(m) + w(n))));
    }
    out
}

/// Integrates d rho/dt = -i[H(t), rho] + L[rho] from 0 to `t_final` with RK4 on
/// the dimension of `rho0`. The step is shrunk so that it divides `t_final`.
pub fn integrate_master(
    rho0: &DensityMatrix,
    h_of_t: Option<Generator<'_>>,
    bath: &ThermalBathConfig,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    ThermalBathConfig::new(bath.gamma, bath.nbar, bath.omega)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step dt = {dt} must be > 0")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final = {t_final} must be >= 0")));
    }
    let steps = (t_final / dt).ceil() as usize;
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t_final / steps as f64;
    let d = rho0.dim();
    let free = (bath.omega != 0.0).then(|| crate::fock::ladder::number(d).scale(bath.omega));
    let gen = |t: f64| -> Option<DMatrix<C64>> {
        match (h_of_t, &free) {
            (Some(f), Some(n)) => Some(f(t) + n),
            (Some(f), None) => Some(f(t)),
            (None, Some(n)) => Some(n.clone()),
            (None, None) => None,
        }
    };

    let trace0 = rho0.trace();
    let mut rho = rho0.elems().clone();
    for s in 0..steps {
        let t = s as f64 * h;
        let h_start = gen(t);
        let h_mid = gen(t + 0.5 * h);
        let h_end = gen(t + h);
        let k1 = lindblad_rhs(&rho, h_start.as_ref(), bath);
        let k2 = lindblad_rhs(&(&rho + k1.scale(0.5 * h)), h_mid.as_ref(), bath);
        let k3 = lindblad_rhs(&(&rho + k2.scale(0.5 * h)), h_mid.as_ref(), bath);
        let k4 = lindblad_rhs(&(&rho + k3.scale(h)), h_end.as_ref(), bath);
        rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        rho = (&rho + rho.adjoint()).scale(0.5);

        let trace: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
        let drift = (trace - trace0).abs();
        let blown = rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > 1.0 + 1e-6);
        if drift > TRACE_DRIFT_TOL || blown {
            return Err(Error::TraceDrift { drift: if blown { f64::INFINITY } else { drift }, tol: TRACE_DRIFT_TOL });
        }
    }
    DensityMatrix::from_raw(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::decoherence::exact_lindblad;
    use crate::fock::ladder::number;

    fn superposition(dim: usize) -> DensityMatrix {
        let psi = nalgebra::DVector::from_fn(dim, |n, _| C64::new(1.0 / (n + 1) as f64, 0.1 * n as f64));
        DensityMatrix::pure(&psi).unwrap()
    }

    #[test]
    fn no_dynamics_is_identity() {
        let rho = superposition(5);
        let out = integrate_master(&rho, None, &ThermalBathConfig::loss(0.0), 1.0, 0.1).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn single_excitation_matches_exact() {
        let rho = DensityMatrix::fock(1, 4).unwrap();
        let bath = ThermalBathConfig::loss(1.0);
        let num = integrate_master(&rho, None, &bath, 0.8, 1e-3).unwrap();
        let exact = exact_lindblad(&rho, 0.8, &bath).unwrap();
        assert!(num.trace_distance(&exact) < 1e-7);
    }

    #[test]
    fn number_generator_rotates_coherences() {
        let rho = superposition(6);
        let n = number(6);
        let h = |_t: f64| n.clone();
        let t = 0.9;
        let out = integrate_master(&rho, Some(&h), &ThermalBathConfig::loss(0.0), t, 1e-3).unwrap();
        for m in 0..6 {
            for k in 0..6 {
                let want = rho.elems()[(m, k)] * C64::from_polar(1.0, -(m as f64 - k as f64) * t);
                assert!((out.elems()[(m, k)] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn trace_preserved_with_heating() {
        let rho = DensityMatrix::fock(3, 12).unwrap();
        let bath = ThermalBathConfig::new(0.5, 1.0, 0.0).unwrap();
        let out = integrate_master(&rho, None, &bath, 1.0, 1e-3).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unstable_step_is_reported() {
        let rho = DensityMatrix::fock(20, 30).unwrap();
        let bath = ThermalBathConfig::loss(50.0);
        let err = integrate_master(&rho, None, &bath, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::TraceDrift { .. }));
    }

    #[test]
    fn rejects_bad_step() {
        let rho = DensityMatrix::vacuum(2).unwrap();
        assert!(integrate_master(&rho, None, &ThermalBathConfig::loss(1.0), 1.0, 0.0).is_err());
    }
}
