//! Special functions used throughout the Fock-space code: log-factorials,
//! associated Laguerre polynomials, Hermite functions and the Airy function.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest polynomial degree accepted by [`laguerre_assoc`].
pub const MAX_LAGUERRE_DEGREE: usize = 100_000;

/// Absolute value of the first zero of Ai(x).
pub const AIRY_FIRST_ZERO: f64 = 2.338_107_410_459_767;

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for i in 1..LN_FACT_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// ln(n!)
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        return table[n];
    }
    let mut acc = table[table.len() - 1];
    for i in table.len()..=n {
        acc += (i as f64).ln();
    }
    acc
}

/// Associated Laguerre polynomial L_p^q(x) by the three-term recurrence in `p`.
pub fn laguerre_assoc(p: usize, q: usize, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Range(format!("non-finite argument x = {x}")));
    }
    if p > MAX_LAGUERRE_DEGREE || q > MAX_LAGUERRE_DEGREE {
        return Err(Error::Range(format!("degree p = {p}, q = {q} too large")));
    }
    let qf = q as f64;
    let mut prev = 1.0;
    if p == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + qf - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + qf - x) * cur - (kf + qf) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    if cur.is_finite() {
        Ok(cur)
    } else {
        Err(Error::Range(format!("L_{p}^{q}({x}) overflowed")))
    }
}

/// All of L_0^q(x), ..., L_pmax^q(x).
pub fn laguerre_sweep(pmax: usize, q: usize, x: f64) -> Vec<f64> {
    let qf = q as f64;
    let mut out = Vec::with_capacity(pmax + 1);
    out.push(1.0);
    if pmax == 0 {
        return out;
    }
    out.push(1.0 + qf - x);
    for k in 1..pmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + qf - x) * out[k] - (kf + qf) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Normalized Hermite functions psi_0(x), ..., psi_nmax(x) (harmonic-oscillator
/// eigenfunctions with x = (a + a^dagger)/sqrt 2).
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if nmax == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * out[0]);
    for n in 1..nmax {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

const AI0: f64 = 0.355_028_053_887_817_24;
const MINUS_AIP0: f64 = 0.258_819_403_792_806_8;

/// Airy function Ai(x) for x >= -8.
///
/// Maclaurin series below x = 2, otherwise the Laplace-type integral
/// Ai(x) = e^{-zeta}/pi * int_0^inf exp(-sqrt(x) t^2) cos(t^3/3) dt with
/// zeta = 2/3 x^{3/2}.
pub fn airy_ai(x: f64) -> Result<f64> {
    if !x.is_finite() || x < -8.0 {
        return Err(Error::Range(format!("Ai({x}) outside supported domain")));
    }
    if x <= 2.0 {
        return Ok(airy_series(x));
    }
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    if zeta > 740.0 {
        return Ok(0.0);
    }
    let sx = x.sqrt();
    let t_max = (42.0 / sx).sqrt();
    let n = 6000;
    let h = t_max / n as f64;
    let f = |t: f64| (-sx * t * t).exp() * (t * t * t / 3.0).cos();
    let mut acc = f(0.0) + f(t_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    Ok((-zeta).exp() / PI * acc * h / 3.0)
}

fn airy_series(x: f64) -> f64 {
    let x3 = x * x * x;
    let mut f = 1.0;
    let mut g = x;
    let mut tf = 1.0;
    let mut tg = x;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        if tf.abs() < 1e-18 * f.abs().max(1e-300) && tg.abs() < 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    AI0 * f - MINUS_AIP0 * g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> i128 {
        let mut acc: i128 = 1;
        for i in 0..k as i128 {
            acc = acc * (n as i128 - i) / (i + 1);
        }
        acc
    }

    // Explicit finite series L_p^q(x) = sum_i (-1)^i C(p+q, p-i) x^i / i!, with
    // x = num/den evaluated exactly in integers after scaling by p! den^p.
    fn laguerre_series(p: usize, q: usize, num: i128, den: i128) -> f64 {
        let fact = |n: usize| (1..=n as i128).product::<i128>();
        let mut acc: i128 = 0;
        for i in 0..=p {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let term = binom(p + q, p - i) * num.pow(i as u32) * den.pow((p - i) as u32) * (fact(p) / fact(i));
            acc += sign * term;
        }
        acc as f64 / (fact(p) as f64 * (den as f64).powi(p as i32))
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre_assoc(0, 3, 5.0).unwrap(), 1.0);
        assert!((laguerre_assoc(1, 2, 0.5).unwrap() - 2.5).abs() < 1e-15);
        let expected = laguerre_series(3, 2, 2, 1);
        assert!((laguerre_assoc(3, 2, 2.0).unwrap() - expected).abs() < 1e-12);
        // C(5,3) - 2 C(5,2) + 4/2 C(5,1) - 8/6 C(5,0)
        assert!((expected - (10.0 - 20.0 + 10.0 - 8.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn laguerre_matches_series_grid() {
        for p in 0..=15 {
            for q in 0..=15 {
                for (num, den) in [(1, 10), (1, 1), (5, 1)] {
                    let x = num as f64 / den as f64;
                    let a = laguerre_assoc(p, q, x).unwrap();
                    let b = laguerre_series(p, q, num, den);
                    let scale = b.abs().max(1e-300);
                    assert!(
                        (a - b).abs() / scale < 1e-10 || (a - b).abs() < 1e-12,
                        "p={p} q={q} x={x}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn laguerre_sweep_agrees() {
        let sweep = laguerre_sweep(20, 4, 0.7);
        for (p, v) in sweep.iter().enumerate() {
            assert!((v - laguerre_assoc(p, 4, 0.7).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn laguerre_rejects_non_finite() {
        assert!(matches!(laguerre_assoc(2, 1, f64::NAN), Err(Error::Range(_))));
        assert!(matches!(laguerre_assoc(3, 0, f64::INFINITY), Err(Error::Range(_))));
    }

    #[test]
    fn ln_factorial_beyond_table() {
        let n = LN_FACT_TABLE + 10;
        let direct: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(n) - direct).abs() < 1e-8);
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let nmax = 30;
        let h = 0.01;
        let mut gram = vec![vec![0.0; nmax + 1]; nmax + 1];
        let mut x = -15.0;
        while x <= 15.0 {
            let psi = hermite_functions(nmax, x);
            for i in 0..=nmax {
                for j in 0..=nmax {
                    gram[i][j] += psi[i] * psi[j] * h;
                }
            }
            x += h;
        }
        for i in 0..=nmax {
            for j in 0..=nmax {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - target).abs() < 1e-9, "{i} {j} {}", gram[i][j]);
            }
        }
    }

    #[test]
    fn airy_reference_values() {
        // Reference values from scipy.special.airy.
        let cases = [
            (-2.0, 0.227_407_428_201_685_64),
            (-1.0, 0.535_560_883_292_352_2),
            (0.0, 0.355_028_053_887_817_2),
            (0.5, 0.231_693_606_480_833_43),
            (1.0, 0.135_292_416_312_881_47),
            (2.5, 0.015_725_923_380_470_484),
            (4.0, 0.000_951_563_851_204_802_4),
            (8.0, 4.692_207_616_099_223_6e-8),
            (15.0, 2.164_962_520_737_994e-18),
        ];
        for (x, expected) in cases {
            let got = airy_ai(x).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-9, "Ai({x}) = {got}, want {expected}");
        }
    }

    #[test]
    fn airy_first_zero() {
        assert!(airy_ai(-AIRY_FIRST_ZERO).unwrap().abs() < 1e-12);
    }
}
