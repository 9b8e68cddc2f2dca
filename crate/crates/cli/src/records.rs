//! Row types shared by the writers, `reproduce` and `verify`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use phasesense::channels::{SmallTimeConfig, ThermalBathConfig};
use phasesense::control::RewardConfig;
use phasesense::metrology::Decoherence;
use phasesense::zoo::StateSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            Some("jsonl") | Some("json") => Ok(Format::Jsonl),
            _ => bail!("cannot tell the format of {} from its extension", path.display()),
        }
    }
}

/// Decoherence applied before the channel, as stored in a row.
///
/// `tau` is gamma t. For `exact` the closed-form thermal solution is used
/// with gamma = 1 and the row's `nbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    None,
    Loss,
    Heating,
    General,
    Exact,
}

impl Model {
    pub fn decoherence(self, tau: f64, nbar: f64) -> Result<Decoherence> {
        Ok(match self {
            Model::None => Decoherence::None,
            Model::Loss => Decoherence::SmallTime(SmallTimeConfig::loss(tau)),
            Model::Heating => Decoherence::SmallTime(SmallTimeConfig::heating(tau, nbar)),
            Model::General => Decoherence::SmallTime(SmallTimeConfig::general(tau, nbar)),
            Model::Exact => Decoherence::Exact { bath: ThermalBathConfig::new(1.0, nbar, 0.0)?, t: tau },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub label: String,
    pub spec: Option<StateSpec>,
    pub mean_n: f64,
    pub diagonal: Vec<f64>,
}

impl StateRecord {
    pub fn new(label: impl Into<String>, spec: Option<StateSpec>, diagonal: Vec<f64>) -> Self {
        let mean_n = diagonal.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        StateRecord { label: label.into(), spec, mean_n, diagonal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub label: String,
    pub alpha: f64,
    pub model: Model,
    pub tau: f64,
    pub nbar: f64,
    pub gain: f64,
    /// 1 + 2 <N> of the probe before decoherence.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub label: String,
    pub model: Model,
    pub tau: f64,
    pub nbar: f64,
    /// Alpha grid in the `--grid` syntax.
    pub grid: String,
    /// Index of the interval; -1 with empty endpoints when there is none.
    pub interval: i64,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

/// Index of the files written by `reproduce`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: String,
    pub states: String,
    pub gains: Vec<String>,
    #[serde(default)]
    pub ranges: Vec<String>,
    #[serde(default)]
    pub pulses: Option<String>,
    #[serde(default)]
    pub prep_noise: Option<String>,
    #[serde(default)]
    pub control: Option<ControlSettings>,
}

/// What is needed to re-simulate stored pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSettings {
    pub dim: usize,
    pub steps: usize,
    pub reward: RewardConfig,
}

/// Row sink in CSV (header, '.' decimals, shortest round-trip floats) or
/// line-delimited JSON.
pub enum Sink {
    Csv(csv::Writer<Box<dyn Write>>),
    Jsonl(Box<dyn Write>),
}

impl Sink {
    pub fn new(out: Box<dyn Write>, format: Format) -> Self {
        match format {
            Format::Csv => Sink::Csv(csv::Writer::from_writer(out)),
            Format::Jsonl => Sink::Jsonl(out),
        }
    }

    pub fn create(path: &Path, format: Format) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self::new(Box::new(BufWriter::new(file)), format))
    }

    /// A file when `path` is given, stdout otherwise.
    pub fn open(path: Option<&Path>, format: Format) -> Result<Self> {
        match path {
            Some(p) => Self::create(p, format),
            None => Ok(Self::new(Box::new(BufWriter::new(std::io::stdout())), format)),
        }
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> Result<()> {
        match self {
            Sink::Csv(w) => w.serialize(row)?,
            Sink::Jsonl(w) => {
                serde_json::to_writer(&mut *w, row)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        match self {
            Sink::Csv(mut w) => w.flush()?,
            Sink::Jsonl(mut w) => w.flush()?,
        }
        Ok(())
    }
}

pub fn write_all<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut sink = Sink::create(path, Format::from_path(path)?)?;
    for r in rows {
        sink.write(r)?;
    }
    sink.finish()
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    match Format::from_path(path)? {
        Format::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .enumerate()
            .map(|(i, r)| r.with_context(|| format!("{} row {}", path.display(), i + 1)))
            .collect(),
        Format::Jsonl => BufReader::new(file)
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|l| !l.trim().is_empty()).unwrap_or(true))
            .map(|(i, l)| {
                let l = l?;
                serde_json::from_str(&l).with_context(|| format!("{} line {}", path.display(), i + 1))
            })
            .collect(),
    }
}
