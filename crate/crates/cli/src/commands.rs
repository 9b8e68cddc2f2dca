use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::info;
use phasesense::channels::{phase_randomized_diagonals, phase_randomized_full, ChannelVariant};
use phasesense::control::{
    dcrab_optimize, evaluate_under_preparation_noise, reward, DcrabOptions, DcrabResult, PulseParams, PulseRecord,
    RewardConfig, SpinBoson,
};
use phasesense::fock::wigner_grid;
use phasesense::metrology::{detect_spacing, dynamical_range, gain};
use phasesense::zoo::{build, comparison_zoo, StateSpec};
use phasesense::{DensityMatrix, TruncationPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::{BudgetArgs, ChannelArgs, Cli, DecohereArgs, FisherScanArgs, OptimizeArgs, RewardArgs, ZooArgs};
use crate::grid::{linspace, parse_grid};
use crate::records::{write_all, GainRow, Model, RangeRow, Sink, StateRecord};
use crate::statearg::{label, parse_state};

pub fn policy(cli: &Cli) -> Result<TruncationPolicy> {
    match cli.dim {
        Some(d) => Ok(TruncationPolicy::with_dim(d)?),
        None => Ok(TruncationPolicy::default()),
    }
}

/// Seed from the first 8 bytes of SHA-256 over the JSON form of `config`.
pub fn derive_seed<T: Serialize>(config: &T) -> u64 {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    let digest = Sha256::digest(&bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Grid points that failed, reported on stderr. Any failure makes the
/// command exit nonzero after all other records are written.
#[derive(Debug, Default)]
pub struct Failures(Vec<String>);

impl Failures {
    pub fn push(&mut self, what: String, err: impl std::fmt::Display) {
        eprintln!("failed: {what}: {err}");
        self.0.push(what);
    }

    pub fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            bail!("{} grid point(s) failed", self.0.len())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelRow {
    n: usize,
    p_in: f64,
    p_out: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixRow {
    m: usize,
    n: usize,
    re: f64,
    im: f64,
}

pub fn channel(cli: &Cli, args: &ChannelArgs) -> Result<()> {
    let spec = parse_state(&args.state)?;
    let rho = build(&spec, &policy(cli)?)?;
    let out = phase_randomized_diagonals(&rho, args.alpha)?;
    let p_in = rho.diagonal();
    let mut sink = Sink::open(cli.out.as_deref(), cli.format)?;
    for (n, p) in out.probs().iter().enumerate() {
        sink.write(&ChannelRow { n, p_in: p_in.get(n).copied().unwrap_or(0.0), p_out: *p })?;
    }
    sink.finish()?;
    if let Some(path) = &args.full {
        let full = phase_randomized_full(&rho, args.alpha, ChannelVariant::from(args.variant))?;
        let mut rows = Vec::new();
        for m in 0..full.dim() {
            for n in 0..full.dim() {
                let z = full.elems()[(m, n)];
                if z.norm() > 0.0 {
                    rows.push(MatrixRow { m, n, re: z.re, im: z.im });
                }
            }
        }
        write_all(path, &rows)?;
    }
    Ok(())
}

/// Gain rows for one probe diagonal over an alpha grid, in grid order.
pub fn gain_rows(
    label: &str,
    diag: &[f64],
    model: Model,
    tau: f64,
    nbar: f64,
    alphas: &[f64],
    failures: &mut Failures,
) -> Vec<GainRow> {
    let bound = 1.0 + 2.0 * diag.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>();
    let noisy = match model.decoherence(tau, nbar).and_then(|d| Ok(d.apply_diagonal(diag)?)) {
        Ok(d) => d,
        Err(e) => {
            failures.push(format!("{label} {model:?} tau={tau} nbar={nbar}"), e);
            return Vec::new();
        }
    };
    let results: Vec<_> = alphas.par_iter().map(|&a| (a, gain(&noisy, a))).collect();
    let mut rows = Vec::with_capacity(alphas.len());
    for (alpha, g) in results {
        match g {
            Ok(gain) => rows.push(GainRow { label: label.to_string(), alpha, model, tau, nbar, gain, bound }),
            Err(e) => failures.push(format!("{label} alpha={alpha} tau={tau}"), e),
        }
    }
    rows
}

pub fn range_rows(label: &str, rho: &DensityMatrix, model: Model, tau: f64, nbar: f64, grid: &str) -> Result<Vec<RangeRow>> {
    let alphas = parse_grid(grid)?;
    let alphas = &alphas[..];
    let intervals = dynamical_range(rho, &model.decoherence(tau, nbar)?, alphas)?;
    let base = RangeRow {
        label: label.to_string(),
        model,
        tau,
        nbar,
        grid: grid.to_string(),
        interval: -1,
        start: None,
        end: None,
    };
    if intervals.is_empty() {
        return Ok(vec![base]);
    }
    Ok(intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| RangeRow { interval: i as i64, start: Some(iv.start), end: Some(iv.end), ..base.clone() })
        .collect())
}

pub fn fisher_scan(cli: &Cli, args: &FisherScanArgs) -> Result<()> {
    let alphas = parse_grid(&args.grid)?;
    if alphas[0] <= 0.0 {
        bail!("alpha grid must be positive");
    }
    let policy = policy(cli)?;
    let (model, tau, nbar) = (args.decoherence.resolved(), args.decoherence.tau, args.decoherence.nbar);
    let mut failures = Failures::default();
    let mut sink = Sink::open(cli.out.as_deref(), cli.format)?;
    let mut ranges = Vec::new();
    for text in &args.state {
        let spec = parse_state(text)?;
        let name = label(&spec);
        let rho = match build(&spec, &policy) {
            Ok(r) => r,
            Err(e) => {
                failures.push(name, e);
                continue;
            }
        };
        for row in gain_rows(&name, &rho.diagonal(), model, tau, nbar, &alphas, &mut failures) {
            sink.write(&row)?;
        }
        if args.ranges.is_some() {
            match range_rows(&name, &rho, model, tau, nbar, &args.grid) {
                Ok(r) => ranges.extend(r),
                Err(e) => failures.push(format!("{name} dynamical range"), e),
            }
        }
    }
    sink.finish()?;
    if let Some(path) = &args.ranges {
        write_all(path, &ranges)?;
    }
    failures.finish()
}

#[derive(Debug, Serialize, Deserialize)]
struct DecohereRow {
    n: usize,
    before: f64,
    after: f64,
}

pub fn decohere(cli: &Cli, args: &DecohereArgs) -> Result<()> {
    let spec = parse_state(&args.state)?;
    let rho = build(&spec, &policy(cli)?)?;
    let dec = args.decoherence.resolved().decoherence(args.decoherence.tau, args.decoherence.nbar)?;
    let before = rho.diagonal();
    let after = dec.apply_diagonal(&before)?;
    let parity = |d: &[f64]| d.iter().enumerate().map(|(n, p)| if n % 2 == 0 { *p } else { -p }).sum::<f64>();
    info!("parity {:.12} -> {:.12}", parity(&before), parity(&after));
    let mut sink = Sink::open(cli.out.as_deref(), cli.format)?;
    for n in 0..before.len().max(after.len()) {
        let row = DecohereRow {
            n,
            before: before.get(n).copied().unwrap_or(0.0),
            after: after.get(n).copied().unwrap_or(0.0),
        };
        sink.write(&row)?;
    }
    sink.finish()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ZooRow {
    pub label: String,
    pub family: String,
    pub mean_n: f64,
    pub spacing: usize,
    pub offset: usize,
    pub dim: usize,
    pub file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WignerRow {
    x: f64,
    p: f64,
    w: f64,
}

pub fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().context("--out <dir> is required")?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub fn zoo(cli: &Cli, args: &ZooArgs) -> Result<()> {
    let dir = out_dir(cli)?;
    let policy = policy(cli)?;
    let members: Vec<(String, StateSpec)> = if args.state.is_empty() {
        comparison_zoo(args.target, args.tol)?
    } else {
        args.state.iter().map(|s| parse_state(s).map(|spec| (label(&spec).replace([':', '=', ',', '/'], "_"), spec))).collect::<Result<_>>()?
    };
    let axis = linspace(-args.wigner_extent, args.wigner_extent, args.wigner_points);
    let mut summary = Vec::new();
    let mut failures = Failures::default();
    for (name, spec) in members {
        let rho = match build(&spec, &policy) {
            Ok(r) => r,
            Err(e) => {
                failures.push(name, e);
                continue;
            }
        };
        let diag = rho.diagonal();
        let file = format!("{name}.json");
        let record = StateRecord::new(&name, Some(spec.clone()), diag.clone());
        fs::write(dir.join(&file), serde_json::to_string(&record)? + "\n")?;
        if !axis.is_empty() {
            let rows: Vec<Vec<f64>> = axis
                .par_iter()
                .map(|&p| wigner_grid(&rho, &axis, &[p]).map(|mut g| g.swap_remove(0)))
                .collect::<phasesense::Result<_>>()?;
            let mut out = Vec::with_capacity(axis.len() * axis.len());
            for (row, &p) in rows.iter().zip(&axis) {
                for (w, &x) in row.iter().zip(&axis) {
                    out.push(WignerRow { x, p, w: *w });
                }
            }
            write_all(&dir.join(format!("{name}_wigner.csv")), &out)?;
        }
        let sp = detect_spacing(&diag);
        summary.push(ZooRow {
            label: name,
            family: spec.family_name().to_string(),
            mean_n: record.mean_n,
            spacing: sp.spacing,
            offset: sp.offset,
            dim: diag.len(),
            file,
        });
    }
    write_all(&dir.join("zoo.csv"), &summary)?;
    failures.finish()
}

pub fn reward_config(args: &RewardArgs) -> Result<RewardConfig> {
    let cfg = RewardConfig {
        alpha: args.alpha,
        zeta: args.zeta,
        ntilde: args.ntilde,
        lambda: args.lambda,
        noise: args.noise.into(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// dCRAB options for one run; T = 0 is handled by [`run_control`].
pub fn control_options(t_total: f64, seed: u64, dim: usize, budget: &BudgetArgs, defaults: (usize, usize)) -> DcrabOptions {
    let mut opts = DcrabOptions::new(t_total, seed);
    opts.dim = dim;
    opts.super_iterations = budget.super_iterations.unwrap_or(defaults.0);
    opts.evals_per_super = budget.evals.unwrap_or(defaults.1);
    if let Some(s) = budget.steps {
        opts.steps = s;
    }
    opts
}

/// Runs dCRAB; a zero duration gives the undriven vacuum.
pub fn run_control(cfg: &RewardConfig, opts: &DcrabOptions) -> Result<DcrabResult> {
    if opts.t_total == 0.0 {
        let boson = DensityMatrix::vacuum(opts.dim)?;
        let best = reward(&boson, cfg)?;
        return Ok(DcrabResult {
            pulse: PulseParams { t_total: 0.0, ..PulseParams::zero(1.0) },
            boson,
            best,
            trace: vec![best.reward],
            seed: opts.seed,
        });
    }
    Ok(dcrab_optimize(cfg, opts)?)
}

pub fn minority_mass(diag: &[f64]) -> f64 {
    let even: f64 = diag.iter().step_by(2).sum();
    let odd: f64 = diag.iter().skip(1).step_by(2).sum();
    even.min(odd)
}

/// Gain of the squeezed vacuum with the given occupation under the reward's decoherence.
pub fn gaussian_reference(mean_n: f64, cfg: &RewardConfig, policy: &TruncationPolicy) -> Result<f64> {
    let diag = build(&StateSpec::GaussianSqueezed { mean_n }, policy)?.diagonal();
    Ok(phasesense::control::reward_from_diagonal(&diag, cfg)?.gain)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub t_over_2pi: f64,
    pub seed: u64,
    pub reward: f64,
    pub gain: f64,
    pub mean_n: f64,
    pub penalty: f64,
    pub minority_mass: f64,
    pub gaussian_gain: f64,
    pub reeval_gamma: Option<f64>,
    pub reeval_gain: Option<f64>,
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| Ok(s.trim().parse::<T>()?)).collect()
}

pub fn optimize(cli: &Cli, args: &OptimizeArgs) -> Result<()> {
    let cfg = reward_config(&args.reward)?;
    let durations: Vec<f64> = parse_list(&args.t_over_2pi)?;
    if durations.is_empty() || durations.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        bail!("pulse durations must be finite and >= 0");
    }
    let dim = cli.dim.unwrap_or(phasesense::control::spin_boson::DEFAULT_CONTROL_DIM);
    let seeds: Vec<u64> = match (&args.seeds, cli.seed) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(s)) => vec![s],
        (None, None) => vec![derive_seed(&(&cfg, &durations, dim))],
    };
    let gammas: Vec<f64> = args.reeval_gamma.as_deref().map(parse_list).transpose()?.unwrap_or_default();
    let jobs: Vec<(f64, u64)> = durations.iter().flat_map(|&t| seeds.iter().map(move |&s| (t, s))).collect();
    let results: Vec<Result<DcrabResult>> = jobs
        .par_iter()
        .map(|&(t, seed)| {
            let opts = control_options(2.0 * std::f64::consts::PI * t, seed, dim, &args.budget, (5, 10_000));
            info!("optimizing T/2pi = {t}, seed {seed}");
            run_control(&cfg, &opts)
        })
        .collect();

    // --dim is the boson dimension here; comparators get the default truncation
    let policy = TruncationPolicy::default();
    let mut failures = Failures::default();
    let mut sink = Sink::open(cli.out.as_deref(), cli.format)?;
    let mut records = Vec::new();
    for (&(t, seed), res) in jobs.iter().zip(results) {
        let r = match res {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("T/2pi={t} seed={seed}"), e);
                continue;
            }
        };
        let base = OptimizeRow {
            t_over_2pi: t,
            seed,
            reward: r.best.reward,
            gain: r.best.gain,
            mean_n: r.best.mean_n,
            penalty: r.best.penalty,
            minority_mass: minority_mass(&r.boson.diagonal()),
            gaussian_gain: gaussian_reference(r.best.mean_n, &cfg, &policy)?,
            reeval_gamma: None,
            reeval_gain: None,
        };
        if gammas.is_empty() {
            sink.write(&base)?;
        }
        for &g in &gammas {
            let alpha = args.reeval_alpha.unwrap_or(cfg.alpha);
            let gain = if t == 0.0 {
                phasesense::metrology::fisher_information(&r.boson, alpha)?.gain
            } else {
                let sim = SpinBoson::new(dim, control_steps(&args.budget))?;
                let bath = phasesense::channels::ThermalBathConfig::loss(g);
                evaluate_under_preparation_noise(&r.pulse, &bath, &RewardConfig { alpha, ..cfg }, &sim)?.gain
            };
            sink.write(&OptimizeRow { reeval_gamma: Some(g), reeval_gain: Some(gain), ..base.clone() })?;
        }
        records.push(PulseRecord::from_result(&r, phasesense::control::pulse::DEFAULT_COMPONENTS));
    }
    sink.finish()?;
    if let Some(path) = &args.pulses {
        write_pulses(path, &records)?;
    }
    failures.finish()
}

pub fn control_steps(budget: &BudgetArgs) -> usize {
    budget.steps.unwrap_or(phasesense::control::spin_boson::DEFAULT_STEPS)
}

/// Pulse records are nested, so they are always written as JSON lines.
pub fn write_pulses(path: &std::path::Path, records: &[PulseRecord]) -> Result<()> {
    let mut sink = Sink::create(path, crate::records::Format::Jsonl)?;
    for r in records {
        sink.write(r)?;
    }
    sink.finish()
}
