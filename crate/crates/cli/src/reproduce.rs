//! Data sets behind the published comparisons, written to one directory.
//!
//! Every directory gets `manifest.json`, `states.jsonl`, `gains.csv` and
//! `ranges.csv`; the control data set also gets `pulses.jsonl` and
//! `prep_noise.csv`. `verify` recomputes all of them.

use std::fs;
use std::path::Path;

use anyhow::Result;
use log::info;
use phasesense::channels::ThermalBathConfig;
use phasesense::control::spin_boson::{DEFAULT_CONTROL_DIM, DEFAULT_STEPS};
use phasesense::control::{evaluate_under_preparation_noise, RewardConfig, RewardNoise, SpinBoson};
use phasesense::metrology::detect_spacing;
use phasesense::zoo::{build, comparison_zoo, StateSpec};
use phasesense::{DensityMatrix, TruncationPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::{Cli, Figure, ReproduceArgs};
use crate::commands::{
    control_options, gain_rows, minority_mass, out_dir, policy, range_rows, run_control, write_pulses, Failures,
};
use crate::grid::linspace;
use crate::records::{write_all, ControlSettings, GainRow, Manifest, Model, RangeRow, StateRecord};
use crate::statearg::label;

pub const STATES: &str = "states.jsonl";
pub const GAINS: &str = "gains.csv";
pub const RANGES: &str = "ranges.csv";
pub const PULSES: &str = "pulses.jsonl";
pub const PREP_NOISE: &str = "prep_noise.csv";
pub const MANIFEST: &str = "manifest.json";

/// Gain of a stored pulse after preparation under boson loss at rate `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepNoiseRow {
    pub label: String,
    /// Line of the pulse in `pulses.jsonl`, from 0.
    pub pulse: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub gain: f64,
}

#[derive(Default)]
struct Tables {
    states: Vec<StateRecord>,
    gains: Vec<GainRow>,
    ranges: Vec<RangeRow>,
}

impl Tables {
    fn add_state(&mut self, name: &str, spec: Option<StateSpec>, rho: &DensityMatrix) {
        self.states.push(StateRecord::new(name, spec, rho.diagonal()));
    }

    fn write(&self, dir: &Path, figure: Figure, extra: impl FnOnce(&mut Manifest)) -> Result<()> {
        write_all(&dir.join(STATES), &self.states)?;
        write_all(&dir.join(GAINS), &self.gains)?;
        write_all(&dir.join(RANGES), &self.ranges)?;
        let mut manifest = Manifest {
            figure: figure.name().to_string(),
            states: STATES.into(),
            gains: vec![GAINS.into()],
            ranges: vec![RANGES.into()],
            pulses: None,
            prep_noise: None,
            control: None,
        };
        extra(&mut manifest);
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

pub fn reproduce(cli: &Cli, args: &ReproduceArgs) -> Result<()> {
    let dir = out_dir(cli)?;
    let policy = policy(cli)?;
    let mut failures = Failures::default();
    match args.figure {
        Figure::Fig2 => number_vs_gaussian(&dir, &policy, &mut failures)?,
        Figure::Fig3 => control(cli, args, &dir, &TruncationPolicy::default(), &mut failures)?,
        Figure::FigS4 => zoo_panels(&dir, &policy, Model::Loss, args.figure, &mut failures)?,
        Figure::FigS5 => zoo_panels(&dir, &policy, Model::Heating, args.figure, &mut failures)?,
    }
    info!("wrote {}", dir.display());
    failures.finish()
}

/// Exact thermal decoherence, or none at tau = 0.
fn exact_or_none(tau: f64) -> Model {
    if tau == 0.0 {
        Model::None
    } else {
        Model::Exact
    }
}

/// Fock |5> against the squeezed vacuum with the same occupation.
fn number_vs_gaussian(dir: &Path, policy: &TruncationPolicy, failures: &mut Failures) -> Result<()> {
    const GRID: &str = "log:0.01:1:60";
    let alphas = crate::grid::parse_grid(GRID)?;
    let mut t = Tables::default();
    for spec in [StateSpec::Fock { n: 5 }, StateSpec::GaussianSqueezed { mean_n: 5.0 }] {
        let name = label(&spec);
        let rho = build(&spec, policy)?;
        let diag = rho.diagonal();
        t.add_state(&name, Some(spec), &rho);
        for nbar in [0.0, 1.0] {
            for tau in [0.0, 1e-4, 1e-3, 1e-2] {
                if nbar > 0.0 && tau == 0.0 {
                    continue;
                }
                let model = exact_or_none(tau);
                t.gains.extend(gain_rows(&name, &diag, model, tau, nbar, &alphas, failures));
                match range_rows(&name, &rho, model, tau, nbar, GRID) {
                    Ok(r) => t.ranges.extend(r),
                    Err(e) => failures.push(format!("{name} range tau={tau}"), e),
                }
            }
        }
        for tau in linspace(0.0, 1e-2, 21) {
            t.gains.extend(gain_rows(&name, &diag, exact_or_none(tau), tau, 0.0, &[0.005], failures));
        }
    }
    t.write(dir, Figure::Fig2, |_| {})
}

/// The comparison zoo at <N> = 8 under small-time loss or heating, at
/// alpha = 0.005 over tau up to 2 alpha^2 and at alpha = 0.2.
///
/// At alpha = 0.2 the 4-spaced members go to tau = 0.005 and the rest to
/// 0.001; further out the first-order map turns negative on their tails.
fn zoo_panels(dir: &Path, policy: &TruncationPolicy, model: Model, figure: Figure, failures: &mut Failures) -> Result<()> {
    let nbar = if model == Model::Heating { 1.0 } else { 0.0 };
    let mut t = Tables::default();
    for (name, spec) in comparison_zoo(8.0, 1e-6)? {
        let rho = match build(&spec, policy) {
            Ok(r) => r,
            Err(e) => {
                failures.push(name, e);
                continue;
            }
        };
        let diag = rho.diagonal();
        let four_spaced = detect_spacing(&diag).spacing % 4 == 0;
        t.add_state(&name, Some(spec), &rho);
        for (alpha, tau_max) in [(0.005, 2.0 * 0.005 * 0.005), (0.2, if four_spaced { 0.005 } else { 0.001 })] {
            for tau in linspace(0.0, tau_max, 21) {
                let m = if tau == 0.0 { Model::None } else { model };
                t.gains.extend(gain_rows(&name, &diag, m, tau, nbar, &[alpha], failures));
            }
        }
        let grid = "log:0.001:1:60";
        match range_rows(&name, &rho, model, 1e-3, nbar, grid) {
            Ok(r) => t.ranges.extend(r),
            Err(e) => failures.push(format!("{name} range"), e),
        }
    }
    t.write(dir, figure, |_| {})
}

/// Optimized preparations against equal-occupation Gaussian states.
fn control(cli: &Cli, args: &ReproduceArgs, dir: &Path, policy: &TruncationPolicy, failures: &mut Failures) -> Result<()> {
    let reward = RewardConfig { noise: RewardNoise::Loss, ..RewardConfig::new(0.005, 0.01, 4.0)? };
    let dim = cli.dim.unwrap_or(DEFAULT_CONTROL_DIM);
    let steps = args.budget.steps.unwrap_or(DEFAULT_STEPS);
    let seed = cli.seed.unwrap_or_else(|| crate::commands::derive_seed(&(&reward, dim, steps)));
    let durations: Vec<f64> = args
        .t_over_2pi
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()?;
    let runs: Vec<_> = durations
        .par_iter()
        .map(|&t| {
            let opts = control_options(2.0 * std::f64::consts::PI * t, seed, dim, &args.budget, (5, 10_000));
            (t, run_control(&reward, &opts))
        })
        .collect();

    let alphas = crate::grid::parse_grid("log:0.001:1:40")?;
    let sim = SpinBoson::new(dim, steps)?;
    let mut t = Tables::default();
    let mut pulses = Vec::new();
    let mut prep = Vec::new();
    for (dur, run) in runs {
        let r = match run {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("T/2pi={dur}"), e);
                continue;
            }
        };
        let name = format!("optimized_T{dur}");
        info!(
            "{name}: gain {:.4}, <N> {:.4}, minority mass {:.2e}",
            r.best.gain,
            r.best.mean_n,
            minority_mass(&r.boson.diagonal())
        );
        let gauss_spec = StateSpec::GaussianSqueezed { mean_n: r.best.mean_n.max(1e-9) };
        let gauss = build(&gauss_spec, policy)?;
        let gauss_name = format!("gaussian_T{dur}");
        t.add_state(&name, None, &r.boson);
        t.add_state(&gauss_name, Some(gauss_spec), &gauss);
        for (n, diag) in [(&name, r.boson.diagonal()), (&gauss_name, gauss.diagonal())] {
            t.gains.extend(gain_rows(n, &diag, Model::None, 0.0, 0.0, &alphas, failures));
            for &alpha in &alphas {
                let tau = reward.zeta * alpha * alpha;
                t.gains.extend(gain_rows(n, &diag, Model::Loss, tau, 0.0, &[alpha], failures));
            }
        }
        if dur > 0.0 {
            for gamma in [0.0, 0.01, 0.1] {
                match evaluate_under_preparation_noise(&r.pulse, &ThermalBathConfig::loss(gamma), &reward, &sim) {
                    Ok(f) => prep.push(PrepNoiseRow { label: name.clone(), pulse: pulses.len(), gamma, alpha: reward.alpha, gain: f.gain }),
                    Err(e) => failures.push(format!("{name} gamma={gamma}"), e),
                }
            }
            pulses.push(phasesense::control::PulseRecord::from_result(&r, phasesense::control::pulse::DEFAULT_COMPONENTS));
        }
    }
    write_pulses(&dir.join(PULSES), &pulses)?;
    write_all(&dir.join(PREP_NOISE), &prep)?;
    t.write(dir, Figure::Fig3, |m| {
        m.pulses = Some(PULSES.into());
        m.prep_noise = Some(PREP_NOISE.into());
        m.control = Some(ControlSettings { dim, steps, reward });
    })
}
