//! `qcoh`: command-line front end for the qudit coherence teleportation simulator.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 usage or input error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qudit_coherence::channels::ChannelKind;
use qudit_coherence::montecarlo::{ROBUSTNESS_DELTAS, ROBUSTNESS_DIMS};

use output::Format;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "qcoh", version, about = "Qudit coherence teleportation simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random draw (default 42).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file, written atomically (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant checks and report the deviation of each.
    Validate(ValidateArgs),
    /// Efficiency versus noise strength: closed form, simulation, classical bound.
    Sweep(SweepArgs),
    /// Average efficiency under phase-engineering error (Monte Carlo).
    Robustness(RobustnessArgs),
    /// Single-shot teleportation of one target state.
    Teleport(TeleportArgs),
    /// Noise thresholds where the efficiency meets the classical bound.
    Thresholds(ThresholdsArgs),
    /// Teleportation through a noisy singlet pair.
    Classical(ClassicalArgs),
    /// Whether a measurement family is perfect for a noise channel.
    PerfectBasis(PerfectBasisArgs),
    /// Measurement outcomes and classical bits per teleportation.
    Resources(ResourcesArgs),
}

fn parse_kind(s: &str) -> Result<ChannelKind, String> {
    match ChannelKind::from_label(s) {
        Some(ChannelKind::Custom) | None => Err(format!("unknown noise kind `{s}` (expected AD, PF, DP or DF)")),
        Some(k) => Ok(k),
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Largest dimension covered by the POVM, channel and transpose checks (at most 16).
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    /// Extra Kraus channel (JSON) to check for completeness and the transpose identity.
    #[arg(long)]
    pub channel_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Noise kind: AD, PF, DP or DF.
    #[arg(long, value_parser = parse_kind)]
    pub noise: ChannelKind,
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 8])]
    pub d: Vec<usize>,
    /// Number of evenly spaced points on [0, 1].
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Explicit noise strengths (overrides --points).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Measurement family.
    #[arg(long, default_value_t = 1)]
    pub x: usize,
    /// Measurement outcome used for the simulated column.
    #[arg(long, default_value_t = 0)]
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    PureHaar,
    MixedHs,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Keep,
    Reject,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ROBUSTNESS_DIMS)]
    pub d: Vec<usize>,
    /// Phase errors, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ROBUSTNESS_DELTAS)]
    pub delta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Both)]
    pub ensemble: EnsembleArg,
    /// Stop once the standard error drops below this (default 1e-5, or 1e-4 with --fast).
    #[arg(long)]
    pub sem_target: Option<f64>,
    /// Cap on drawn samples per cell.
    #[arg(long)]
    pub max_samples: Option<usize>,
    /// Looser SEM target for a quick run.
    #[arg(long)]
    pub fast: bool,
    /// Treatment of perturbed samples that are not positive semidefinite.
    #[arg(long, value_enum, default_value_t = PolicyArg::Keep)]
    pub policy: PolicyArg,
    /// Average over every outcome y instead of y = 0.
    #[arg(long)]
    pub sweep_outcomes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Uniform magnitudes 1/d, phase engineered for family x.
    MaxCoherent,
    /// Random populations, no coherence.
    Diagonal,
    /// Haar-random pure state.
    RandomHaar,
    /// Hilbert-Schmidt random mixed state.
    RandomHs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Brute,
    Cjks,
    Both,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    /// Built-in target state (requires --d).
    #[arg(long, value_enum, conflicts_with = "state", required_unless_present = "state")]
    pub preset: Option<Preset>,
    /// Target state file (JSON with `d` and `matrix`).
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Dimension for presets.
    #[arg(long)]
    pub d: Option<usize>,
    /// Replace the target's phases with the engineered profile for family x.
    #[arg(long)]
    pub engineer: bool,
    /// Noise on Alice's half of the pair.
    #[arg(long, value_parser = parse_kind)]
    pub noise: Option<ChannelKind>,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Noise on Bob's half (default: same as Alice's).
    #[arg(long, value_parser = parse_kind)]
    pub noise_b: Option<ChannelKind>,
    #[arg(long)]
    pub p_b: Option<f64>,
    /// Custom Kraus channel (JSON) applied to both halves.
    #[arg(long, conflicts_with_all = ["noise", "noise_b"])]
    pub channel_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub x: usize,
    #[arg(long, default_value_t = 0)]
    pub y: usize,
    #[arg(long, value_enum, default_value_t = Engine::Cjks)]
    pub engine: Engine,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: ChannelKind,
    #[arg(long, default_value_t = 32)]
    pub d_max: usize,
    /// Smallest dimension (default: 3 for AD, 2 otherwise).
    #[arg(long)]
    pub d_min: Option<usize>,
    /// Measurement family (DF only).
    #[arg(long, default_value_t = 1)]
    pub x: usize,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Singlet weights, comma separated (default 0, 0.1, ..., 1).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PerfectBasisArgs {
    #[arg(long, value_parser = parse_kind)]
    pub noise: ChannelKind,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub p: f64,
    /// Measurement family (default: every family).
    #[arg(long)]
    pub x: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    #[arg(long, default_value_t = 16)]
    pub d_max: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
