mod common;

use phasesense::channels::{SmallTimeConfig, ThermalBathConfig};
use phasesense::metrology::{
    detect_spacing, dynamical_range, expansion_spacing, fisher_from_diagonal, fisher_information, gain, gain_under,
    perturbative_gain, Decoherence,
};
use phasesense::zoo::{build, Parity, StateSpec};
use phasesense::{DensityMatrix, TruncationPolicy};
use proptest::prelude::*;

use common::{log_log_slope, random_density, random_diagonal};

fn state(spec: StateSpec) -> DensityMatrix {
    build(&spec, &TruncationPolicy::default()).unwrap()
}

#[test]
fn fock_states_saturate_the_bound() {
    for n in [1usize, 5, 10] {
        let g = gain(&DensityMatrix::fock(n, n + 1).unwrap().diagonal(), 1e-3).unwrap();
        assert!((g - (1.0 + 2.0 * n as f64)).abs() < 1e-3, "n = {n}: {g}");
    }
}

#[test]
fn thermal_gain_vanishes_quadratically() {
    let diag = DensityMatrix::thermal(2.0, 120).unwrap().diagonal();
    let alphas = [0.02, 0.04, 0.08, 0.16];
    let gains: Vec<f64> = alphas.iter().map(|&a| gain(&diag, a).unwrap()).collect();
    assert!((log_log_slope(&alphas, &gains) - 2.0).abs() < 0.2);
}

#[test]
fn residual_order_follows_spacing() {
    let alphas = [0.02, 0.04, 0.08, 0.16];
    for (spacing, mu, order) in [(2usize, 0.3, 2.0), (4, 0.3, 4.0)] {
        let rho = state(StateSpec::NumberPhase { mu, spacing, offset: 0 });
        let bound = 1.0 + 2.0 * rho.mean_number();
        let res: Vec<f64> = alphas.iter().map(|&a| bound - gain(&rho.diagonal(), a).unwrap()).collect();
        let slope = log_log_slope(&alphas, &res);
        assert!((slope - order).abs() < 0.2, "spacing {spacing}: slope {slope}");
    }
}

#[test]
fn two_spaced_correction_matches() {
    let rho = state(StateSpec::Cat { alpha: 2.0, parity: Parity::Even });
    let alphas = [0.01, 0.02, 0.04];
    let errs: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            let pred = expansion_spacing(&rho, a).unwrap().prediction().unwrap();
            (gain(&rho.diagonal(), a).unwrap() - pred).abs()
        })
        .collect();
    assert!((log_log_slope(&alphas, &errs) - 4.0).abs() < 0.2);
}

#[test]
fn perturbative_gain_close_to_direct() {
    let rho = DensityMatrix::fock(5, 6).unwrap();
    let alpha = 0.25;
    for zeta in [0.01, 0.05, 0.1] {
        let cfg = SmallTimeConfig::loss(zeta * alpha * alpha);
        let direct = gain_under(&rho.diagonal(), &Decoherence::SmallTime(cfg), alpha).unwrap();
        let approx = perturbative_gain(&rho, alpha, &cfg).unwrap();
        assert!((approx / direct - 1.0).abs() < 0.05, "zeta {zeta}");
    }
}

#[test]
fn fixed_tau_expansion_for_fock() {
    let rho = DensityMatrix::fock(5, 6).unwrap();
    let tau = 1e-2;
    for alpha in [0.01, 0.02, 0.03] {
        let direct = gain_under(&rho.diagonal(), &Decoherence::SmallTime(SmallTimeConfig::loss(tau)), alpha).unwrap();
        let approx = phasesense::metrology::perturbative_gain_fixed_tau(&rho, alpha, tau).unwrap();
        assert!((approx / direct - 1.0).abs() < 0.05, "alpha {alpha}: {approx} vs {direct}");
    }
}

#[test]
fn squeezed_range_shrinks_with_loss() {
    let rho = state(StateSpec::GaussianSqueezed { mean_n: 5.0 });
    let grid: Vec<f64> = (1..=100).map(|i| 0.01 * i as f64).collect();
    let mut prev = f64::INFINITY;
    for tau in [1e-4, 1e-3, 1e-2] {
        let loss = Decoherence::Exact { bath: ThermalBathConfig::loss(1.0), t: tau };
        let r = dynamical_range(&rho, &loss, &grid).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].length() <= prev + 1e-12);
        prev = r[0].length();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn gain_never_beats_the_bound(diag in random_diagonal(14), alpha in 0.005f64..2.0) {
        let n: f64 = diag.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        prop_assert!(gain(&diag, alpha).unwrap() <= 1.0 + 2.0 * n + 1e-6);
    }

    #[test]
    fn vacuum_is_the_baseline(alpha in 0.001f64..3.0) {
        prop_assert!((gain(&[1.0], alpha).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gain_depends_only_on_the_diagonal(rho in random_density(8), alpha in 0.01f64..1.0) {
        let a = fisher_information(&rho, alpha).unwrap();
        let b = fisher_from_diagonal(&rho.diagonal(), alpha).unwrap();
        prop_assert_eq!(a.fisher, b.fisher);
    }

    #[test]
    fn spacing_is_detected(spacing in 1usize..6, offset in 0usize..3, count in 2usize..6) {
        let mut diag = vec![0.0; offset + spacing * count];
        for k in 0..count {
            diag[offset + k * spacing] = 1.0 / count as f64;
        }
        let s = detect_spacing(&diag);
        prop_assert_eq!(s.spacing, spacing);
        prop_assert_eq!(s.offset, offset % spacing);
    }
}
