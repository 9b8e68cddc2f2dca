use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance for validated density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for validated density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;
/// Negative probabilities above this value are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-12;
/// Default declared truncation loss.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-10;
/// Default upper bound on the Fock-space dimension.
pub const DEFAULT_MAX_DIM: usize = 400;

/// How far the Fock basis may be truncated.
///
/// `dim` is the largest dimension any automatically sized object may reach;
/// `tail_budget` is the probability mass allowed to leak past the cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub dim: usize,
    pub tail_budget: f64,
}

impl TruncationPolicy {
    pub fn new(dim: usize, tail_budget: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("truncation dim {dim} < 2")));
        }
        if !(tail_budget > 0.0 && tail_budget <= 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "tail budget {tail_budget:e} outside (0, 1e-6]"
            )));
        }
        Ok(Self { dim, tail_budget })
    }

    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_TAIL_BUDGET)
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { dim: DEFAULT_MAX_DIM, tail_budget: DEFAULT_TAIL_BUDGET }
    }
}

/// Occupation-number probabilities p_n on a truncated Fock basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberDistribution {
    probs: Vec<f64>,
}

impl NumberDistribution {
    /// Validates and clamps: entries in [-1e-12, 0) become 0, the total must lie in
    /// [1 - tail_budget, 1 + 1e-10].
    pub fn new(mut probs: Vec<f64>, tail_budget: f64) -> Result<Self> {
        clamp_probabilities(&mut probs)?;
        let total: f64 = probs.iter().sum();
        if total < 1.0 - tail_budget || total > 1.0 + TRACE_TOL {
            return Err(Error::Truncation {
                lost: 1.0 - total,
                budget: tail_budget,
                dim: probs.len(),
            });
        }
        Ok(Self { probs })
    }

    /// Wraps without checking the total (entries are still clamped).
    pub fn unnormalized(mut probs: Vec<f64>) -> Result<Self> {
        clamp_probabilities(&mut probs)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| p * (n as f64).powi(k)).sum()
    }

    /// Tr[(-1)^N rho]
    pub fn parity(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
            .sum()
    }

    pub fn total_variation(&self, other: &NumberDistribution) -> f64 {
        let len = self.len().max(other.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        0.5 * (0..len).map(|i| (get(&self.probs, i) - get(&other.probs, i)).abs()).sum::<f64>()
    }
}

fn clamp_probabilities(probs: &mut [f64]) -> Result<()> {
    for (index, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidState(format!("non-finite probability at n = {index}")));
        }
        if *p < 0.0 {
            if *p < NEGATIVE_CLAMP {
                return Err(Error::NegativeProbability { index, value: *p });
            }
            *p = 0.0;
        }
    }
    Ok(())
}

/// Density matrix on a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elems: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace and positive semidefinite.
    pub fn new(elems: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_raw(elems)?;
        rho.validate(1.0)?;
        Ok(rho)
    }

    /// Square-shape check only. Used for intermediate results (small-time maps,
    /// integrator stages) whose trace or positivity is not guaranteed.
    pub fn from_raw(elems: DMatrix<C64>) -> Result<Self> {
        if elems.nrows() != elems.ncols() || elems.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                elems.nrows(),
                elems.ncols()
            )));
        }
        Ok(Self { elems })
    }

    pub fn validate(&self, expected_trace: f64) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm >= HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr - expected_trace).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != {expected_trace}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// |psi><psi|, normalizing psi.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Self::from_raw(&v * v.adjoint())
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidArgument(format!("Fock level {n} >= dim {dim}")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self { elems: m })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Diagonal state with the given occupations (not renormalized).
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidState("empty diagonal".into()));
        }
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|p| C64::new(*p, 0.0)));
        Ok(Self { elems: DMatrix::from_diagonal(&v) })
    }

    /// Thermal state p_n = nbar^n / (nbar + 1)^(n+1), renormalized on `dim` levels.
    pub fn thermal(nbar: f64, dim: usize) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::InvalidArgument(format!("nbar = {nbar} < 0")));
        }
        let x = nbar / (nbar + 1.0);
        let mut p: Vec<f64> = (0..dim).map(|n| x.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        Self::from_diagonal(&p)
    }

    /// Convex combination sum_i w_i rho_i on the largest dimension among the inputs.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.iter().map(|(_, r)| r.dim()).max().ok_or_else(|| {
            Error::InvalidArgument("empty mixture".into())
        })?;
        let mut m = DMatrix::zeros(dim, dim);
        for (w, r) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidArgument(format!("negative mixture weight {w}")));
            }
            let d = r.dim();
            let mut view = m.view_mut((0, 0), (d, d));
            view += r.elems.scale(*w);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.elems.nrows()
    }

    pub fn elems(&self) -> &DMatrix<C64> {
        &self.elems
    }

    pub fn into_elems(self) -> DMatrix<C64> {
        self.elems
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.elems[(i, i)].re).collect()
    }

    /// Diagonal as a validated distribution.
    pub fn number_distribution(&self, tail_budget: f64) -> Result<NumberDistribution> {
        NumberDistribution::new(self.diagonal(), tail_budget)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.elems[(i, i)].re).sum()
    }

    pub fn mean_number(&self) -> f64 {
        self.number_moment(1)
    }

    pub fn number_moment(&self, k: i32) -> f64 {
        (0..self.dim()).map(|n| self.elems[(n, n)].re * (n as f64).powi(k)).sum()
    }

    pub fn parity(&self) -> f64 {
        (0..self.dim())
            .map(|n| if n % 2 == 0 { self.elems[(n, n)].re } else { -self.elems[(n, n)].re })
            .sum()
    }

    pub fn purity(&self) -> f64 {
        self.elems.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.elems[(i, j)] - self.elems[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = self.hermitian_part();
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.elems + self.elems.adjoint()).scale(0.5)
    }

    /// Symmetrizes rho <- (rho + rho^dagger)/2.
    pub fn symmetrize(&mut self) {
        self.elems = self.hermitian_part();
    }

    /// Zero-pads or truncates to `dim` levels.
    pub fn resized(&self, dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        let d = self.dim().min(dim);
        m.view_mut((0, 0), (d, d)).copy_from(&self.elems.view((0, 0), (d, d)));
        Self { elems: m }
    }

    /// Only the diagonal, as a density matrix (dephased copy).
    pub fn dephased(&self) -> Self {
        let v = DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| self.elems[(i, i)]));
        Self { elems: DMatrix::from_diagonal(&v) }
    }

    /// Trace distance 1/2 ||rho - sigma||_1, zero-padding to a common dimension.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim().max(other.dim());
        let diff = self.resized(d).elems - other.resized(d).elems;
        let herm = (&diff + diff.adjoint()).scale(0.5);
        0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Largest entrywise deviation, zero-padding to a common dimension.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim().max(other.dim());
        let diff = self.resized(d).elems - other.resized(d).elems;
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Probability mass on levels >= `from`.
    pub fn tail_mass(&self, from: usize) -> f64 {
        (from..self.dim()).map(|n| self.elems[(n, n)].re).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_policy_bounds() {
        assert!(TruncationPolicy::new(1, 1e-10).is_err());
        assert!(TruncationPolicy::new(10, 0.0).is_err());
        assert!(TruncationPolicy::new(10, 1e-5).is_err());
        assert!(TruncationPolicy::new(10, 1e-6).is_ok());
    }

    #[test]
    fn distribution_clamps_small_negatives() {
        let d = NumberDistribution::new(vec![1.0, -5e-13, 0.0], 1e-10).unwrap();
        assert_eq!(d.probs()[1], 0.0);
        let err = NumberDistribution::new(vec![1.0 + 1e-6, -1e-6], 1e-10).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { index: 1, .. }));
    }

    #[test]
    fn distribution_rejects_lost_mass() {
        let err = NumberDistribution::new(vec![0.5, 0.4], 1e-10).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.9, 0.0);
        m[(1, 0)] = C64::new(0.9, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn thermal_moments() {
        let rho = DensityMatrix::thermal(0.5, 80).unwrap();
        assert!((rho.mean_number() - 0.5).abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::fock(1, 4).unwrap();
        let b = DensityMatrix::fock(2, 6).unwrap();
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-12);
        assert!(a.trace_distance(&a.resized(9)) < 1e-15);
    }

    #[test]
    fn mixture_and_parity() {
        let a = DensityMatrix::fock(15, 16).unwrap();
        let b = DensityMatrix::fock(11, 12).unwrap();
        let mix = DensityMatrix::mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
        assert_eq!(mix.dim(), 16);
        assert!((mix.mean_number() - (0.3 * 15.0 + 0.7 * 11.0)).abs() < 1e-12);
        assert!((mix.parity() + 1.0).abs() < 1e-15);
        assert!((mix.purity() - (0.09 + 0.49)).abs() < 1e-12);
    }
}
