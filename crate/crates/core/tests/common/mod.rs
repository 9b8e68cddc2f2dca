#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use phasesense::DensityMatrix;
use proptest::prelude::*;

/// rho = A A^dag / tr with A a dim x rank matrix built from `raw`.
pub fn density_from_raw(dim: usize, rank: usize, raw: &[f64]) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, rank, |i, j| {
        let k = 2 * (i * rank + j);
        C64::new(raw[k], raw[k + 1])
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).unwrap()
}

pub fn random_density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (1..=3usize).prop_flat_map(move |rank| {
        prop::collection::vec(-1.0f64..1.0, 2 * dim * rank)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(move |raw| density_from_raw(dim, rank, &raw))
    })
}

pub fn random_diagonal(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, dim)
        .prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
