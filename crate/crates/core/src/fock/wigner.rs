use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::overlap::OverlapKernel;
use super::state::{DensityMatrix, DEFAULT_TAIL_BUDGET};
use crate::error::Result;

const MAX_EXTRA_LEVELS: usize = 600;

/// Wigner value together with the displaced-support mass that fell outside
/// the summation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub value: f64,
    pub lost_mass: f64,
}

/// W(beta) = (2/pi) Tr[D(beta) (-1)^N D^dagger(beta) rho].
pub fn wigner_at(rho: &DensityMatrix, beta: C64) -> Result<f64> {
    Ok(wigner_sample(rho, beta, DEFAULT_TAIL_BUDGET)?.value)
}

pub fn wigner_sample(rho: &DensityMatrix, beta: C64, tail_budget: f64) -> Result<WignerSample> {
    let d = rho.dim();
    let r = beta.norm();
    let theta = beta.arg();
    let diag = rho.diagonal();

    // Phases e^{-i theta (m - n)} absorb the complex argument of beta.
    let twisted = DMatrix::from_fn(d, d, |m, n| {
        rho.elems()[(m, n)] * C64::from_polar(1.0, -theta * (m as f64 - n as f64))
    });

    let mut k_dim = d + 8 + (4.0 * r * r + 6.0 * r).ceil() as usize;
    let (kernel, lost) = loop {
        let kernel = OverlapKernel::new(r, k_dim, d)?;
        let lost: f64 = (0..d)
            .map(|m| {
                let col: f64 = (0..k_dim).map(|k| kernel.coeff(k, m).powi(2)).sum();
                diag[m].max(0.0) * (1.0 - col).max(0.0)
            })
            .sum();
        if lost <= tail_budget || k_dim >= d + MAX_EXTRA_LEVELS {
            break (kernel, lost);
        }
        k_dim += 16;
    };
    if lost > tail_budget {
        log::warn!("Wigner evaluation at {beta}: displaced support lost {lost:e} > {tail_budget:e}");
    }

    let c = kernel.coeffs().map(|v| C64::new(v, 0.0));
    let sandwich = &c * &twisted;
    let mut acc = 0.0;
    for k in 0..k_dim {
        let mut row = C64::new(0.0, 0.0);
        for n in 0..d {
            row += sandwich[(k, n)] * kernel.coeff(k, n);
        }
        acc += if k % 2 == 0 { row.re } else { -row.re };
    }
    Ok(WignerSample { value: 2.0 / PI * acc, lost_mass: lost })
}

/// W on the Cartesian grid beta = x + i p, returned row-major in `ps` then `xs`.
pub fn wigner_grid(rho: &DensityMatrix, xs: &[f64], ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    ps.iter()
        .map(|&p| xs.iter().map(|&x| wigner_at(rho, C64::new(x, p))).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn even_cat(a: f64, dim: usize) -> DensityMatrix {
        let psi = DVector::from_iterator(
            dim,
            (0..dim).map(|n| {
                let v = if n % 2 == 0 {
                    2.0 * (n as f64 * a.ln() - 0.5 * crate::fock::special::ln_factorial(n)).exp()
                } else {
                    0.0
                };
                C64::new(v, 0.0)
            }),
        );
        DensityMatrix::pure(&psi).unwrap()
    }

    /// Dense oracle: D(beta) by matrix exponential on a larger space, parity, trace.
    fn wigner_dense(rho: &DensityMatrix, beta: C64, big: usize) -> f64 {
        let mut gen = DMatrix::<C64>::zeros(big, big);
        for n in 0..big - 1 {
            let s = ((n + 1) as f64).sqrt();
            gen[(n + 1, n)] += beta * s;
            gen[(n, n + 1)] -= beta.conj() * s;
        }
        let disp = gen.exp();
        let parity = DMatrix::from_fn(big, big, |i, j| {
            if i == j { C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let op = &disp * parity * disp.adjoint();
        let r = rho.resized(big);
        2.0 / PI * (op * r.elems()).trace().re
    }

    #[test]
    fn vacuum_and_single_photon_at_origin() {
        let vac = DensityMatrix::vacuum(10).unwrap();
        assert!((wigner_at(&vac, C64::new(0.0, 0.0)).unwrap() - 2.0 / PI).abs() < 1e-14);
        let one = DensityMatrix::fock(1, 10).unwrap();
        assert!((wigner_at(&one, C64::new(0.0, 0.0)).unwrap() + 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn vacuum_is_gaussian() {
        let vac = DensityMatrix::vacuum(6).unwrap();
        let beta = C64::new(0.7, -0.4);
        let w = wigner_at(&vac, beta).unwrap();
        assert!((w - 2.0 / PI * (-2.0 * beta.norm_sqr()).exp()).abs() < 1e-12);
    }

    #[test]
    fn even_cat_matches_dense_oracle() {
        let rho = even_cat(1.5, 40);
        for beta in [C64::new(0.0, 0.0), C64::new(0.3, 0.2), C64::new(-1.0, 0.6), C64::new(0.0, 1.2)] {
            let ours = wigner_at(&rho, beta).unwrap();
            let oracle = wigner_dense(&rho, beta, 90);
            assert!((ours - oracle).abs() < 1e-9, "beta={beta}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn grid_shape() {
        let rho = DensityMatrix::fock(2, 5).unwrap();
        let g = wigner_grid(&rho, &[-1.0, 0.0, 1.0], &[0.0, 0.5]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 3);
        assert!((g[0][1] - 2.0 / PI).abs() < 1e-13);
    }
}
