//! Ladder-operator actions on truncated Fock-space matrices.
//!
//! The sandwich products are written elementwise so that they cost O(D^2)
//! instead of a dense matrix product.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Annihilation operator a on `dim` levels.
pub fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Creation operator a^dagger on `dim` levels.
pub fn creation(dim: usize) -> DMatrix<C64> {
    annihilation(dim).transpose()
}

/// Number operator N on `dim` levels.
pub fn number(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) })
}

/// a rho a^dagger
pub fn lower_sandwich(rho: &DMatrix<C64>) -> DMatrix<C64> {
    let d = rho.nrows();
    DMatrix::from_fn(d, d, |m, n| {
        if m + 1 < d && n + 1 < d {
            rho[(m + 1, n + 1)] * (((m + 1) * (n + 1)) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// a^dagger rho a, on `out_dim` levels (pass `rho.nrows() + 1` to keep the
/// raised top level).
pub fn raise_sandwich(rho: &DMatrix<C64>, out_dim: usize) -> DMatrix<C64> {
    let d = rho.nrows();
    DMatrix::from_fn(out_dim, out_dim, |m, n| {
        if m >= 1 && n >= 1 && m - 1 < d && n - 1 < d {
            rho[(m - 1, n - 1)] * ((m * n) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// rho N + N rho
pub fn number_anticommutator(rho: &DMatrix<C64>) -> DMatrix<C64> {
    let d = rho.nrows();
    DMatrix::from_fn(d, d, |m, n| rho[(m, n)] * (m + n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize) -> DMatrix<C64> {
        DMatrix::from_fn(d, d, |i, j| C64::new((i * 7 + j * 3) as f64 * 0.1, (i as f64 - j as f64) * 0.05))
    }

    #[test]
    fn sandwiches_match_dense_products() {
        let d = 9;
        let rho = sample(d);
        let a = annihilation(d);
        let ad = creation(d);
        assert!((lower_sandwich(&rho) - &a * &rho * &ad).norm() < 1e-12);
        assert!((raise_sandwich(&rho, d) - &ad * &rho * &a).norm() < 1e-12);
        let n = number(d);
        assert!((number_anticommutator(&rho) - (&rho * &n + &n * &rho)).norm() < 1e-12);
    }

    #[test]
    fn raise_keeps_top_level_when_grown() {
        let d = 4;
        let mut rho = DMatrix::zeros(d, d);
        rho[(3, 3)] = C64::new(1.0, 0.0);
        let raised = raise_sandwich(&rho, d + 1);
        assert!((raised[(4, 4)].re - 4.0).abs() < 1e-14);
    }
}
