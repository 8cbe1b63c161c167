//! Argument definitions and the process entry point.
//!
//! Every long flag of a subcommand doubles as a key of its JSON config
//! file. Flags win over the file, and the file wins over defaults.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::commands;

#[derive(Debug, Parser)]
#[command(name = "sagqg", version, about = "Simulate superadiabatic geometric quantum gates on a driven qubit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the driving field of one gate.
    Schedule(ScheduleArgs),
    /// Bloch trajectory of |0⟩, its stroboscopic readout and the phase split.
    Trajectory(TrajectoryArgs),
    /// Process tomography of one gate.
    Qpt(QptArgs),
    /// Randomized benchmarking of a gate set.
    Rb(RbArgs),
    /// |0⟩ population after the gate and a (π/2)_ȳ readout, against γ.
    GammaSweep(GammaSweepArgs),
    /// Minimal segment duration over a grid of drive parameters.
    TauMinMap(TauMinMapArgs),
    /// Pauli-X process fidelity against segment duration with Ω_S clipped.
    FidelityVsTau(FidelityVsTauArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Schedule(_) => "schedule",
            Command::Trajectory(_) => "trajectory",
            Command::Qpt(_) => "qpt",
            Command::Rb(_) => "rb",
            Command::GammaSweep(_) => "gamma-sweep",
            Command::TauMinMap(_) => "tau-min-map",
            Command::FidelityVsTau(_) => "fidelity-vs-tau",
        }
    }
}

/// Options every subcommand takes.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunArgs {
    /// JSON config file keyed by long flag names.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory receiving every artifact.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed [default: $SAGQG_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateName {
    Identity,
    PauliX,
    PauliY,
    PauliZ,
    /// Pauli-Z followed by a π/2 flip about y.
    Hadamard,
    /// Phase gate; needs --gamma.
    Phase,
    /// Flip gate; needs --gamma, axis from --axis-phase.
    Flip,
}

impl GateName {
    pub fn as_str(self) -> &'static str {
        match self {
            GateName::Identity => "identity",
            GateName::PauliX => "pauli-x",
            GateName::PauliY => "pauli-y",
            GateName::PauliZ => "pauli-z",
            GateName::Hadamard => "hadamard",
            GateName::Phase => "phase",
            GateName::Flip => "flip",
        }
    }
}

/// Gate selection and drive parameters.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GateArgs {
    #[arg(long, value_enum)]
    pub gate: Option<GateName>,
    /// Geometric phase γ (rad); overrides the named gate's phase offsets.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Azimuth of a flip gate's rotation axis (rad) [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub axis_phase: Option<f64>,
    /// Ω₀ (MHz) [default: 3.5]
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Δ₀ (MHz) [default: 1]
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Segment duration τ (µs) [default: 0.8/(2Ω₀)]
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScheduleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub gate: GateArgs,
    /// Number of uniform samples over the gate [default: 1001].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Hard cap on Ω_S (MHz).
    #[arg(long)]
    pub clip: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrajectoryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub gate: GateArgs,
    /// Number of uniform samples over the gate [default: 401].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integrator steps per segment [default: 1024].
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct QptArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub gate: GateArgs,
    /// Shots per setting; 0 uses exact probabilities [default: 1000].
    #[arg(long)]
    pub shots: Option<u64>,
    /// Quasi-static noise, e.g. `detuning:0.05,amplitude:0.01,timing:0.01,clip:7` or `t2star:4.25` [default: none].
    #[arg(long)]
    pub noise: Option<String>,
    /// Noise realizations averaged per probability [default: 32].
    #[arg(long)]
    pub noise_draws: Option<usize>,
    /// Integrator steps per segment [default: 1024].
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateSetName {
    Sagqg,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModelName {
    /// Fit the survival probability.
    Survival,
    /// Fit one minus the survival probability.
    Complement,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RbArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// [default: sagqg]
    #[arg(long, value_enum)]
    pub gateset: Option<GateSetName>,
    /// Quasi-static noise, as for `qpt` [default: none].
    #[arg(long)]
    pub noise: Option<String>,
    /// Base sequences per length [default: 4].
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Pauli randomizations per base sequence [default: 8].
    #[arg(long)]
    pub randomizations: Option<usize>,
    /// Comma-separated sequence lengths [default: 2,4,6,8,10,14,18,22,26,30,34,40,48].
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    /// Shots per sequence; 0 uses exact probabilities [default: 1000].
    #[arg(long)]
    pub shots: Option<u64>,
    /// Integrator steps per segment [default: 256].
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Ω₀ of the geometric gates (MHz) [default: 3.5]
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Δ₀ of the geometric gates (MHz) [default: 1]
    #[arg(long)]
    pub delta0: Option<f64>,
    /// τ of the geometric gates (µs) [default: 0.8/(2Ω₀)]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Rabi frequency of the rectangular pulses (MHz) [default: 7].
    #[arg(long)]
    pub dynamic_rabi: Option<f64>,
    /// [default: survival]
    #[arg(long, value_enum)]
    pub fit_model: Option<FitModelName>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GammaSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub gate: GateArgs,
    /// γ values: `lo:hi:n` or a comma list, inside (0, 2π) [default: 64 interior points].
    #[arg(long)]
    pub gammas: Option<String>,
    /// Integrator steps per segment [default: 512].
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TauMinMapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Ω₀ grid `lo:hi:n` (MHz) [default: 0.5:3.5:64].
    #[arg(long)]
    pub omega0_range: Option<String>,
    /// Δ₀ grid `lo:hi:n` (MHz) [default: 0.5:8:64].
    #[arg(long)]
    pub delta0_range: Option<String>,
    /// Largest achievable Rabi frequency (MHz) [default: 7].
    #[arg(long)]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "UPPER")]
pub enum ParameterSetName {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FidelityVsTauArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Named (Ω₀, Δ₀): A = (1.5, 1.5), B = (1.5, 6), C = (2, 8) MHz [default: A].
    #[arg(long, value_enum)]
    pub set: Option<ParameterSetName>,
    /// Ω₀ (MHz); overrides the set.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Δ₀ (MHz); overrides the set.
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Clip level for Ω_S (MHz) [default: 7].
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// τ values (µs): `lo:hi:n` or a comma list [default: 41 points over 0.5 to 1.5 t_π].
    #[arg(long)]
    pub taus: Option<String>,
    /// Integrator steps per segment [default: 1024].
    #[arg(long)]
    pub substeps: Option<usize>,
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("sagqg: error: {e}");
            e.exit_code()
        }
    }
}
