//! Finite-energy grid states, projected from position space onto number states.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{NumberDistribution, TruncationPolicy};

/// Half-width of the default position grid.
pub const GKP_X_MAX: f64 = 12.0;
/// Points of the default position grid.
pub const GKP_POINTS: usize = 4001;
/// Default comb half-width.
pub const GKP_K_MAX: i64 = 8;

const ROOT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Quadrature grid for a given Delta. Narrow peaks and a wide envelope need a
/// finer and longer grid than the default, so the default only applies for
/// Delta >= 0.54.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpGrid {
    pub x_max: f64,
    pub points: usize,
    pub k_max: i64,
}

impl GkpGrid {
    pub fn for_delta(delta: f64) -> Self {
        let default_dx = 2.0 * GKP_X_MAX / (GKP_POINTS - 1) as f64;
        // Envelope exp(-Delta^2 x^2 / 2) squared drops below 1e-18 here.
        let x_max = GKP_X_MAX.max(6.5 / delta);
        let dx = default_dx.min(delta / 25.0);
        let half = (x_max / dx).ceil() as usize;
        let k_max = GKP_K_MAX.max((x_max / ROOT_TWO_PI).ceil() as i64 + 2);
        GkpGrid { x_max, points: 2 * half + 1, k_max }
    }

    fn dx(&self) -> f64 {
        2.0 * self.x_max / (self.points - 1) as f64
    }
}

/// Unnormalized comb wavefunction.
fn comb(x: f64, delta: f64, k_max: i64) -> f64 {
    let d2 = delta * delta;
    (-k_max..=k_max)
        .map(|k| {
            let kf = k as f64;
            let shift = x - ROOT_TWO_PI * kf;
            (-kf * kf * PI * d2 - shift * shift / (2.0 * d2)).exp()
        })
        .sum()
}

/// Hermite functions psi_0..psi_{n-1} at x, with the Gaussian factor carried
/// as a separate log scale so that large |x| does not underflow the recurrence
/// before the functions grow back.
fn scaled_hermite(x: f64, out: &mut [f64]) {
    let n = out.len();
    let mut ln_scale = -0.5 * x * x;
    let mut scale = ln_scale.exp();
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out[0] = cur * scale;
    for k in 1..n {
        let kf = (k - 1) as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            ln_scale += 150.0 * std::f64::consts::LN_10;
            scale = ln_scale.exp();
        }
        out[k] = cur * scale;
    }
}

/// Normalized number-state amplitudes c_0..c_{dim-1} of the grid state and
/// the mass missing beyond `dim`.
pub(crate) fn gkp_amplitudes(delta: f64, dim: usize) -> Result<(Vec<f64>, f64)> {
    if !(delta > 0.1 && delta <= 2.0) {
        return Err(Error::InvalidArgument(format!("GKP delta = {delta} outside (0.1, 2]")));
    }
    let grid = GkpGrid::for_delta(delta);
    let dx = grid.dx();
    let mut coeffs = vec![0.0; dim];
    let mut herm = vec![0.0; dim];
    let mut norm = 0.0;
    for i in 0..grid.points {
        let x = -grid.x_max + i as f64 * dx;
        let psi = comb(x, delta, grid.k_max);
        if psi == 0.0 {
            continue;
        }
        norm += psi * psi;
        scaled_hermite(x, &mut herm);
        for (c, h) in coeffs.iter_mut().zip(&herm) {
            *c += psi * h;
        }
    }
    norm *= dx;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Quadrature(format!("GKP norm {norm} at delta = {delta}")));
    }
    let s = dx / norm.sqrt();
    for c in coeffs.iter_mut() {
        *c *= s;
    }
    let kept: f64 = coeffs.iter().map(|c| c * c).sum();
    if !kept.is_finite() || kept > 1.0 + 1e-8 {
        return Err(Error::Quadrature(format!("projected mass {kept} exceeds 1 at delta = {delta}")));
    }
    Ok((coeffs, (1.0 - kept).max(0.0)))
}

/// Exact mean occupation from position-space moments,
/// (<x^2> + <p^2> - 1) / 2, with no number-space truncation.
pub fn gkp_mean_exact(delta: f64) -> Result<f64> {
    if !(delta > 0.1 && delta <= 2.0) {
        return Err(Error::InvalidArgument(format!("GKP delta = {delta} outside (0.1, 2]")));
    }
    let grid = GkpGrid::for_delta(delta);
    let dx = grid.dx();
    let d2 = delta * delta;
    let (mut norm, mut x2, mut p2) = (0.0, 0.0, 0.0);
    for i in 0..grid.points {
        let x = -grid.x_max + i as f64 * dx;
        let (mut psi, mut dpsi) = (0.0, 0.0);
        for k in -grid.k_max..=grid.k_max {
            let kf = k as f64;
            let shift = x - ROOT_TWO_PI * kf;
            let t = (-kf * kf * PI * d2 - shift * shift / (2.0 * d2)).exp();
            psi += t;
            dpsi -= shift / d2 * t;
        }
        norm += psi * psi;
        x2 += x * x * psi * psi;
        p2 += dpsi * dpsi;
    }
    Ok(0.5 * ((x2 + p2) / norm - 1.0))
}

/// Number distribution of the finite-energy grid state.
pub fn gkp_number_distribution(delta: f64, trunc: &TruncationPolicy) -> Result<NumberDistribution> {
    let (c, lost) = gkp_amplitudes(delta, trunc.dim)?;
    if lost > trunc.tail_budget {
        return Err(Error::Truncation { lost, budget: trunc.tail_budget, dim: trunc.dim });
    }
    NumberDistribution::new(c.iter().map(|c| c * c).collect(), trunc.tail_budget)
}

/// theta_3(0, q) = 1 + 2 sum q^{k^2}
fn theta3(q: f64) -> f64 {
    1.0 + 2.0 * (1..200).map(|k| q.powi(k * k)).take_while(|t| *t > 0.0).sum::<f64>()
}

/// Closed-form approximation of the grid-state occupation.
pub fn gkp_mean_approx(delta: f64) -> f64 {
    let q = (-2.0 * PI * delta * delta).exp();
    let comb: f64 = (1..200)
        .map(|k| {
            let kf = k as f64;
            kf * kf * (-2.0 * kf * kf * PI * delta * delta).exp()
        })
        .sum();
    delta.ln().sinh().powi(2) + 2.0 * PI * comb / theta3(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::special::hermite_functions;

    #[test]
    fn scaled_hermite_matches_plain_recurrence() {
        let mut buf = vec![0.0; 60];
        for x in [-3.0, 0.2, 5.5] {
            scaled_hermite(x, &mut buf);
            let plain = hermite_functions(59, x);
            for (a, b) in buf.iter().zip(&plain) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn scaled_hermite_survives_large_x() {
        let mut buf = vec![0.0; 1200];
        scaled_hermite(42.0, &mut buf);
        assert_eq!(buf[0], 0.0);
        // psi_1199 has its turning point near 49, so it is O(0.1) in magnitude here.
        assert!(buf[1199].is_finite() && buf[1199].abs() > 1e-3);
    }

    #[test]
    fn default_grid_for_moderate_delta() {
        let g = GkpGrid::for_delta(0.8);
        assert_eq!((g.points, g.k_max), (GKP_POINTS, GKP_K_MAX));
        assert_eq!(g.x_max, GKP_X_MAX);
    }

    #[test]
    fn grid_state_is_even() {
        let p = gkp_number_distribution(0.5, &TruncationPolicy::default()).unwrap();
        let odd: f64 = p.probs().iter().skip(1).step_by(2).sum();
        assert!(odd < 1e-20);
    }

    #[test]
    fn projection_mean_matches_moments() {
        for delta in [0.2, 0.3, 0.5, 0.6, 1.0, 1.7] {
            let p = gkp_number_distribution(delta, &TruncationPolicy::default()).unwrap();
            let exact = gkp_mean_exact(delta).unwrap();
            assert!((p.mean() - exact).abs() < 1e-8, "delta={delta}: {} vs {exact}", p.mean());
        }
    }

    #[test]
    fn moments_match_independent_values() {
        // Direct position-space integration on a wide, fine grid.
        for (delta, want) in [(0.2, 12.009_999_999_999_98), (0.5, 1.484_598_148_971_901_6), (0.8, 0.106_663_788_856_666_6)] {
            assert!((gkp_mean_exact(delta).unwrap() - want).abs() < 1e-9, "delta={delta}");
        }
    }

    #[test]
    fn closed_form_holds_for_narrow_peaks() {
        // The approximation drifts by 2% at delta = 0.5 and 9% at 0.6.
        for delta in [0.15, 0.2, 0.3, 0.4, 0.45] {
            let exact = gkp_mean_exact(delta).unwrap();
            let approx = gkp_mean_approx(delta);
            assert!(((exact - approx) / approx).abs() < 0.02, "delta={delta}: {exact} vs {approx}");
        }
    }

    #[test]
    fn small_delta_is_nearly_four_spaced() {
        let p = gkp_number_distribution(0.4, &TruncationPolicy::default()).unwrap();
        let probs = p.probs();
        let odd: f64 = probs.iter().skip(1).step_by(2).sum();
        let four: f64 = probs.iter().step_by(4).sum();
        let two: f64 = probs.iter().skip(2).step_by(4).sum();
        assert!(odd < 1e-6);
        assert!(two < 0.05 * four, "{two} vs {four}");
    }

    #[test]
    fn large_delta_tends_to_vacuum() {
        let p = gkp_number_distribution(2.0, &TruncationPolicy::default()).unwrap();
        let q = gkp_number_distribution(1.0, &TruncationPolicy::default()).unwrap();
        assert!(p.probs()[0] > 0.5);
        assert!(q.probs()[0] > 0.9);
    }

    #[test]
    fn rejects_out_of_range_delta() {
        let t = TruncationPolicy::default();
        assert!(gkp_number_distribution(0.1, &t).is_err());
        assert!(gkp_number_distribution(2.5, &t).is_err());
    }

    #[test]
    fn tiny_window_reports_truncation() {
        let t = TruncationPolicy::with_dim(10).unwrap();
        assert!(matches!(gkp_number_distribution(0.3, &t), Err(Error::Truncation { .. })));
    }
}
