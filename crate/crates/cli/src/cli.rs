use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasesense::channels::ChannelVariant;
use phasesense::control::RewardNoise;

use crate::records::{Format, Model};

#[derive(Debug, Parser)]
#[command(name = "phasesense", version, about = "Force sensing with phase-randomized displacements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Truncation dimension: largest Fock space for built states, boson
    /// dimension for control runs.
    #[arg(long, global = true, env = "PHASESENSE_DIM")]
    pub dim: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Output file, or directory for `zoo` and `reproduce`. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized steps; derived from the configuration when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output number distribution of the phase-randomized displacement channel.
    Channel(ChannelArgs),
    /// Gain against alpha for one or more states.
    FisherScan(FisherScanArgs),
    /// Number distribution before and after decoherence.
    Decohere(DecohereArgs),
    /// Probe states at a common mean occupation, with Wigner samples.
    Zoo(ZooArgs),
    /// dCRAB state preparation in the spin-boson model.
    Optimize(OptimizeArgs),
    /// Data files behind one of the standard figures.
    Reproduce(ReproduceArgs),
    /// Re-ingest a reproduce directory and recompute every stored value.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Displace,
    RotatedDisplace,
    DisplaceRotate,
}

impl From<Variant> for ChannelVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Displace => ChannelVariant::Displace,
            Variant::RotatedDisplace => ChannelVariant::RotatedDisplace,
            Variant::DisplaceRotate => ChannelVariant::DisplaceRotate,
        }
    }
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "displace")]
    pub variant: Variant,
    /// Also write the full output matrix (m, n, re, im) here.
    #[arg(long)]
    pub full: Option<PathBuf>,
}

/// Decoherence before the channel. Without --model: none at tau = 0, loss
/// at nbar = 0, the general map otherwise.
#[derive(Debug, Clone, Args)]
pub struct DecoherenceArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// gamma t (or the heating parameter with --model heating).
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
}

impl DecoherenceArgs {
    pub fn resolved(&self) -> Model {
        match self.model {
            Some(m) => m,
            None if self.tau == 0.0 => Model::None,
            None if self.nbar == 0.0 => Model::Loss,
            None => Model::General,
        }
    }
}

#[derive(Debug, Args)]
pub struct FisherScanArgs {
    /// Repeat for several states.
    #[arg(long, required = true)]
    pub state: Vec<String>,
    /// Alpha grid: start:stop:count, log:start:stop:count or a comma list.
    #[arg(long, default_value = "log:0.005:1:40")]
    pub grid: String,
    #[command(flatten)]
    pub decoherence: DecoherenceArgs,
    /// Also write dynamical-range intervals here.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecohereArgs {
    #[arg(long)]
    pub state: String,
    #[command(flatten)]
    pub decoherence: DecoherenceArgs,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    /// Common mean occupation.
    #[arg(long, default_value_t = 8.0)]
    pub target: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Build these states instead of the standard twelve.
    #[arg(long)]
    pub state: Vec<String>,
    /// Wigner samples per axis; 0 skips the Wigner files.
    #[arg(long, default_value_t = 21)]
    pub wigner_points: usize,
    /// Wigner grid covers [-extent, extent] on both axes.
    #[arg(long, default_value_t = 5.0)]
    pub wigner_extent: f64,
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    #[arg(long, default_value_t = 0.005)]
    pub alpha: f64,
    /// Reward decoherence tau / alpha^2.
    #[arg(long, default_value_t = 0.01)]
    pub zeta: f64,
    /// Occupation target of the penalty.
    #[arg(long, default_value_t = 4.0)]
    pub ntilde: f64,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "loss")]
    pub noise: Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Loss,
    Heating,
}

impl From<Noise> for RewardNoise {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Loss => RewardNoise::Loss,
            Noise::Heating => RewardNoise::Heating,
        }
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub super_iterations: Option<usize>,
    /// Nelder–Mead evaluations per super-iteration.
    #[arg(long)]
    pub evals: Option<usize>,
    /// Time steps per pulse.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub reward: RewardArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Pulse durations in units of 2 pi.
    #[arg(long, default_value = "0.4")]
    pub t_over_2pi: String,
    /// Seeds, comma separated; one run per (T, seed). Overrides --seed.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Write pulse records (JSONL) here.
    #[arg(long)]
    pub pulses: Option<PathBuf>,
    /// Re-evaluate each pulse with boson loss at these rates.
    #[arg(long)]
    pub reeval_gamma: Option<String>,
    /// Alpha for the re-evaluation; defaults to the reward alpha.
    #[arg(long)]
    pub reeval_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Fock against squeezed vacuum at <N> = 5 under loss and heating.
    Fig2,
    /// Optimized spin-boson preparations against Gaussian states.
    Fig3,
    /// State zoo at <N> = 8 under small-time loss.
    #[value(name = "figS4", alias = "figs4")]
    FigS4,
    /// State zoo at <N> = 8 under small-time heating.
    #[value(name = "figS5", alias = "figs5")]
    FigS5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::FigS4 => "figS4",
            Figure::FigS5 => "figS5",
        }
    }
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// fig3 only: pulse durations in units of 2 pi.
    #[arg(long, default_value = "0.1,0.2,0.4")]
    pub t_over_2pi: String,
    /// fig3 only; defaults to 5 super-iterations of 10000 evaluations.
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub dir: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}
