//! Re-ingests a `reproduce` directory and recomputes every number in it.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use phasesense::channels::ThermalBathConfig;
use phasesense::control::{evaluate_under_preparation_noise, reward, PulseRecord, SpinBoson};
use phasesense::DensityMatrix;

use crate::cli::VerifyArgs;
use crate::commands::{gain_rows, range_rows, Failures};
use crate::records::{read_rows, GainRow, Manifest, RangeRow, StateRecord};
use crate::reproduce::{PrepNoiseRow, MANIFEST};

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct Report {
    pub checked: usize,
    /// Largest |stored - recomputed| / max(1, |recomputed|).
    pub max_deviation: f64,
}

impl Report {
    fn compare(&mut self, stored: f64, fresh: f64) {
        self.checked += 1;
        let d = (stored - fresh).abs() / fresh.abs().max(1.0);
        self.max_deviation = self.max_deviation.max(if d.is_nan() { f64::INFINITY } else { d });
    }

    fn compare_opt(&mut self, stored: Option<f64>, fresh: Option<f64>) {
        match (stored, fresh) {
            (Some(a), Some(b)) => self.compare(a, b),
            (None, None) => self.checked += 1,
            _ => self.compare(0.0, f64::INFINITY),
        }
    }
}

pub fn verify_dir(dir: &Path) -> Result<Report> {
    let text = fs::read_to_string(dir.join(MANIFEST)).with_context(|| format!("reading {MANIFEST}"))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let states: Vec<StateRecord> = read_rows(&dir.join(&manifest.states))?;
    let diags: HashMap<&str, &[f64]> = states.iter().map(|s| (s.label.as_str(), s.diagonal.as_slice())).collect();
    let lookup = |label: &str| diags.get(label).copied().with_context(|| format!("no stored state {label:?}"));
    let mut report = Report::default();
    let mut failures = Failures::default();

    for s in &states {
        let mean: f64 = s.diagonal.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        report.compare(s.mean_n, mean);
    }

    for file in &manifest.gains {
        let rows: Vec<GainRow> = read_rows(&dir.join(file))?;
        for row in rows {
            let fresh = gain_rows(&row.label, lookup(&row.label)?, row.model, row.tau, row.nbar, &[row.alpha], &mut failures);
            match fresh.first() {
                Some(f) => {
                    report.compare(row.gain, f.gain);
                    report.compare(row.bound, f.bound);
                }
                None => report.compare(row.gain, f64::INFINITY),
            }
        }
    }

    for file in &manifest.ranges {
        let rows: Vec<RangeRow> = read_rows(&dir.join(file))?;
        let mut groups: BTreeMap<(String, String, String), Vec<RangeRow>> = BTreeMap::new();
        for row in rows {
            let key = (row.label.clone(), format!("{:?} {:e} {:e}", row.model, row.tau, row.nbar), row.grid.clone());
            groups.entry(key).or_default().push(row);
        }
        for ((label, _, grid), stored) in groups {
            let first = &stored[0];
            let rho = DensityMatrix::from_diagonal(lookup(&label)?)?;
            let fresh = range_rows(&label, &rho, first.model, first.tau, first.nbar, &grid)?;
            if fresh.len() != stored.len() {
                bail!("{label}: {} stored intervals, {} recomputed", stored.len(), fresh.len());
            }
            for (a, b) in stored.iter().zip(&fresh) {
                report.compare_opt(a.start, b.start);
                report.compare_opt(a.end, b.end);
            }
        }
    }

    if let (Some(file), Some(ctl)) = (&manifest.pulses, &manifest.control) {
        let pulses: Vec<PulseRecord> = read_rows(&dir.join(file))?;
        let sim = SpinBoson::new(ctl.dim, ctl.steps)?;
        for rec in &pulses {
            let boson = sim.evolve(&rec.pulse(), None)?.boson()?;
            let diag = boson.diagonal();
            for (a, b) in rec.final_diagonal.iter().zip(&diag) {
                report.compare(*a, *b);
            }
            report.compare(rec.final_reward, reward(&boson, &ctl.reward)?.reward);
        }
        if let Some(file) = &manifest.prep_noise {
            let rows: Vec<PrepNoiseRow> = read_rows(&dir.join(file))?;
            for row in rows {
                let rec = pulses.get(row.pulse).with_context(|| format!("no pulse {}", row.pulse))?;
                let cfg = phasesense::control::RewardConfig { alpha: row.alpha, ..ctl.reward };
                let f = evaluate_under_preparation_noise(&rec.pulse(), &ThermalBathConfig::loss(row.gamma), &cfg, &sim)?;
                report.compare(row.gain, f.gain);
            }
        }
    }
    failures.finish()?;
    Ok(report)
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let report = verify_dir(&args.dir)?;
    println!("checked {} values, max deviation {:e}", report.checked, report.max_deviation);
    if !(report.max_deviation <= args.tol) {
        bail!("max deviation {:e} exceeds {:e}", report.max_deviation, args.tol);
    }
    Ok(())
}
