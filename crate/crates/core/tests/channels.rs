mod common;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use phasesense::channels::{
    phase_randomized_diagonals, phase_randomized_diagonals_at, phase_randomized_full, ChannelVariant,
};
use phasesense::fock::ladder::{annihilation, creation};
use phasesense::DensityMatrix;
use proptest::prelude::*;

use common::random_density;

/// D(alpha) on a large truncated space via the matrix exponential.
fn displacement_expm(alpha: f64, dim: usize) -> DMatrix<C64> {
    let gen = (creation(dim) - annihilation(dim)).scale(alpha);
    gen.exp()
}

/// Output diagonal averaged over `points` equally spaced phases, using
/// D(alpha e^{i phi}) = R(phi) D(alpha) R(phi)^dag with R = exp(-i phi N).
fn quadrature_diagonal(rho: &DensityMatrix, alpha: f64, big: usize, out: usize, points: usize) -> Vec<f64> {
    let d = displacement_expm(alpha, big);
    let k = rho.dim();
    let mut acc = vec![0.0; out];
    for j in 0..points {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
        for (n, slot) in acc.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..k {
                let left = d[(n, a)] * C64::from_polar(1.0, (a as f64 - n as f64) * phi);
                for b in 0..k {
                    let right = (d[(n, b)] * C64::from_polar(1.0, (b as f64 - n as f64) * phi)).conj();
                    s += left * rho.elems()[(a, b)] * right;
                }
            }
            *slot += s.re / points as f64;
        }
    }
    acc
}

#[test]
fn analytic_diagonal_matches_phase_quadrature() {
    let raw: Vec<f64> = (0..2 * 8 * 2).map(|i| ((i * 37 % 23) as f64 - 11.0) / 7.0).collect();
    let rho = common::density_from_raw(8, 2, &raw);
    for alpha in [0.4, 1.3] {
        let oracle = quadrature_diagonal(&rho, alpha, 90, 30, 4096);
        let analytic = phase_randomized_diagonals_at(&rho.diagonal(), alpha, 30).unwrap();
        for (a, b) in analytic.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "alpha {alpha}: {a} vs {b}");
        }
    }
}

#[test]
fn fock_one_against_quadrature() {
    let rho = DensityMatrix::fock(1, 2).unwrap();
    let oracle = quadrature_diagonal(&rho, 0.4, 60, 12, 4096);
    let analytic = phase_randomized_diagonals_at(&rho.diagonal(), 0.4, 12).unwrap();
    for (a, b) in analytic.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn vacuum_gives_poisson() {
    let p = phase_randomized_diagonals(&DensityMatrix::vacuum(1).unwrap(), 0.5).unwrap();
    let mut term = (-0.25f64).exp();
    for (n, pn) in p.probs().iter().enumerate() {
        assert!((pn - term).abs() < 1e-15);
        term *= 0.25 / (n + 1) as f64;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn variants_agree(rho in random_density(20), alpha in 0.05f64..1.5) {
        let u1 = phase_randomized_full(&rho, alpha, ChannelVariant::Displace).unwrap();
        let u2 = phase_randomized_full(&rho, alpha, ChannelVariant::RotatedDisplace).unwrap();
        let u3 = phase_randomized_full(&rho, alpha, ChannelVariant::DisplaceRotate).unwrap();
        prop_assert!(u1.max_abs_diff(&u2) < 1e-10);
        let d3 = u3.diagonal();
        for (a, b) in u1.diagonal().iter().zip(&d3) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let fast = phase_randomized_diagonals(&rho, alpha).unwrap();
        for (a, b) in fast.probs().iter().zip(u1.diagonal()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn output_is_a_state(rho in random_density(10), alpha in 0.0f64..2.0) {
        let out = phase_randomized_full(&rho, alpha, ChannelVariant::Displace).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        prop_assert!(out.min_eigenvalue() > -1e-10);
        prop_assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn channel_ignores_coherences(rho in random_density(12), alpha in 0.01f64..1.0) {
        let a = phase_randomized_diagonals(&rho, alpha).unwrap();
        let b = phase_randomized_diagonals(&rho.dephased(), alpha).unwrap();
        prop_assert_eq!(a, b);
    }
}
