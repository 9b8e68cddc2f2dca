//! Nelder–Mead direct search (minimization) with restarts on simplex collapse.

use rand::Rng;

pub const REFLECTION: f64 = 1.0;
pub const EXPANSION: f64 = 2.0;
pub const CONTRACTION: f64 = 0.5;
pub const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// The simplex counts as collapsed when both the value spread and the
    /// vertex spread fall below these.
    pub f_tol: f64,
    pub x_tol: f64,
}

impl NelderMeadOptions {
    pub fn new(max_evals: usize, initial_step: f64) -> Self {
        NelderMeadOptions { max_evals, initial_step, f_tol: 1e-12, x_tol: 1e-9 * initial_step.abs().max(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Best value seen after each evaluation.
    pub trace: Vec<f64>,
    pub restarts: usize,
}

struct Counter<'a, F> {
    f: F,
    evals: usize,
    max: usize,
    best_x: Vec<f64>,
    best_f: f64,
    trace: &'a mut Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Counter<'_, F> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        self.evals += 1;
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        self.trace.push(self.best_f);
        v
    }
}

fn simplex_around<R: Rng>(center: &[f64], step: f64, rng: Option<&mut R>) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut out = vec![center.to_vec()];
    let mut scales: Vec<f64> = vec![1.0; n];
    if let Some(rng) = rng {
        for s in scales.iter_mut() {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            *s = sign * rng.random_range(0.5..1.5);
        }
    }
    for i in 0..n {
        let mut v = center.to_vec();
        v[i] += step * scales[i];
        out.push(v);
    }
    out
}

/// Minimizes `f` from `x0` within `opts.max_evals` evaluations. When the
/// simplex collapses before the budget is spent, it is rebuilt around the
/// best point with jittered axis offsets drawn from `rng`.
pub fn minimize<F, R>(f: F, x0: &[f64], opts: &NelderMeadOptions, rng: &mut R) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
    R: Rng,
{
    let n = x0.len();
    let mut trace = Vec::with_capacity(opts.max_evals);
    let mut c = Counter { f, evals: 0, max: opts.max_evals, best_x: x0.to_vec(), best_f: f64::INFINITY, trace: &mut trace };
    let mut restarts = 0;
    let mut pts = simplex_around::<R>(x0, opts.initial_step, None);

    'outer: while !c.exhausted() {
        let mut vals = Vec::with_capacity(n + 1);
        for p in &pts {
            if c.exhausted() {
                break 'outer;
            }
            vals.push(c.eval(p));
        }
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let f_spread = (vals[n] - vals[0]).abs();
            let x_spread = pts[1..]
                .iter()
                .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if n == 0 || (f_spread <= opts.f_tol && x_spread <= opts.x_tol) || !vals[0].is_finite() && x_spread == 0.0 {
                restarts += 1;
                let center = c.best_x.clone();
                pts = simplex_around(&center, opts.initial_step, Some(rng));
                continue 'outer;
            }
            if c.exhausted() {
                break 'outer;
            }

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (ci, pi) in centroid.iter_mut().zip(p) {
                    *ci += pi / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(ci, wi)| ci + t * (ci - wi)).collect() };

            let xr = along(REFLECTION);
            let fr = c.eval(&xr);
            if fr < vals[0] {
                if c.exhausted() {
                    pts[n] = xr;
                    vals[n] = fr;
                    break 'outer;
                }
                let xe = along(REFLECTION * EXPANSION);
                let fe = c.eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            if c.exhausted() {
                break 'outer;
            }
            // Outside contraction when the reflection beat the worst point,
            // inside contraction otherwise.
            let (xc, fc) = if fr < vals[n] {
                let xc = along(REFLECTION * CONTRACTION);
                let fc = c.eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACTION);
                let fc = c.eval(&xc);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            let best = pts[0].clone();
            for i in 1..=n {
                if c.exhausted() {
                    break 'outer;
                }
                pts[i] = best.iter().zip(&pts[i]).map(|(b, p)| b + SHRINK * (p - b)).collect();
                vals[i] = c.eval(&pts[i]);
            }
        }
    }
    NelderMeadResult { x: c.best_x, f: c.best_f, evals: c.evals, trace, restarts }
}
