mod common;

use phasesense::channels::{
    exact_lindblad, integrate_master, small_time_map, SmallTimeConfig, ThermalBathConfig,
};
use phasesense::zoo::{build, Parity, StateSpec};
use phasesense::{DensityMatrix, TruncationPolicy};
use proptest::prelude::*;

use common::{log_log_slope, random_density};

fn even_states() -> Vec<DensityMatrix> {
    let p = TruncationPolicy::default();
    vec![
        DensityMatrix::fock(4, 5).unwrap(),
        build(&StateSpec::Cat { alpha: 2.0, parity: Parity::Even }, &p).unwrap(),
        build(&StateSpec::GaussianSqueezed { mean_n: 3.0 }, &p).unwrap(),
        build(&StateSpec::Compass { alpha: 2.2 }, &p).unwrap(),
    ]
}

#[test]
fn parity_loss_law() {
    let tau = 1e-5;
    for rho in even_states() {
        let out = small_time_map(&rho, &SmallTimeConfig::loss(tau)).unwrap();
        let eta = 1.0 - out.parity().abs();
        let want = 2.0 * rho.mean_number() * tau;
        assert!((eta / want - 1.0).abs() < 1e-4, "{eta} vs {want}");
    }
}

#[test]
fn parity_heating_law() {
    let (tau, nbar) = (1e-5, 3.0);
    for rho in even_states() {
        let out = small_time_map(&rho, &SmallTimeConfig::heating(tau, nbar)).unwrap();
        let eta = 1.0 - out.parity().abs();
        let want = 2.0 * (2.0 * rho.mean_number() + 1.0) * tau * nbar;
        assert!((eta / want - 1.0).abs() < 1e-4, "{eta} vs {want}");
    }
}

#[test]
fn small_time_error_is_second_order() {
    let rho = DensityMatrix::fock(3, 4).unwrap();
    let bath = ThermalBathConfig::new(1.0, 0.7, 0.0).unwrap();
    let taus = [4e-3, 2e-3, 1e-3, 5e-4];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let approx = small_time_map(&rho, &SmallTimeConfig::general(t, 0.7)).unwrap();
            let exact = exact_lindblad(&rho, t, &bath).unwrap();
            let d = approx.dim().max(exact.dim());
            approx.resized(d).max_abs_diff(&exact.resized(d))
        })
        .collect();
    let slope = log_log_slope(&taus, &errs);
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn thermal_steady_state_is_gibbs() {
    let rho = DensityMatrix::fock(3, 4).unwrap();
    let bath = ThermalBathConfig::new(1.0, 0.5, 0.0).unwrap();
    let out = exact_lindblad(&rho, 40.0, &bath).unwrap();
    let gibbs = DensityMatrix::thermal(0.5, out.dim()).unwrap();
    let tv: f64 = 0.5 * out.diagonal().iter().zip(gibbs.diagonal()).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(tv < 1e-6, "tv {tv}");
}

#[test]
fn master_equation_matches_closed_form() {
    let rho = DensityMatrix::fock(5, 6).unwrap().resized(30);
    for nbar in [0.0, 0.5] {
        let bath = ThermalBathConfig::new(1.0, nbar, 0.0).unwrap();
        let exact = exact_lindblad(&rho, 0.5, &bath).unwrap();
        let num = integrate_master(&rho, None, &bath, 0.5, 1e-3).unwrap();
        let d = exact.dim().max(num.dim());
        assert!(num.resized(d).trace_distance(&exact.resized(d)) < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn small_time_map_keeps_trace(rho in random_density(8), tau in 0.0f64..0.05, nbar in 0.0f64..2.0) {
        for cfg in [SmallTimeConfig::loss(tau), SmallTimeConfig::heating(tau, nbar), SmallTimeConfig::general(tau, nbar)] {
            let out = small_time_map(&rho, &cfg).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_solution_stays_physical(rho in random_density(6), t in 0.0f64..3.0, nbar in 0.0f64..1.0) {
        let bath = ThermalBathConfig::new(1.0, nbar, 0.3).unwrap();
        let out = exact_lindblad(&rho, t, &bath).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        prop_assert!(out.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn loss_lowers_occupation(rho in random_density(8), t in 0.01f64..2.0) {
        let out = exact_lindblad(&rho, t, &ThermalBathConfig::loss(1.0)).unwrap();
        let want = rho.mean_number() * (-t).exp();
        prop_assert!((out.mean_number() - want).abs() < 1e-9);
    }
}
