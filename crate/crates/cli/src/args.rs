use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qfi",
    version,
    about = "QFI of noisy GHZ metrology schemes, preservation checks and figure data"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Total number of physical qubits N.
    #[arg(long, global = true)]
    pub n_total: Option<usize>,
    /// Phase-flip code block size n (odd).
    #[arg(long, global = true)]
    pub block_size: Option<usize>,
    /// Transverse (bit-flip) dephasing rate.
    #[arg(long, global = true)]
    pub gamma_x: Option<f64>,
    /// Parallel (phase-flip) dephasing rate.
    #[arg(long, global = true)]
    pub gamma_z: Option<f64>,
    /// Signal frequency ω.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Accumulation time t.
    #[arg(long, global = true)]
    pub time: Option<f64>,
    /// Number of repetitions ν.
    #[arg(long, global = true)]
    pub nu: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Add brute-force density-matrix columns (N ≤ 9).
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw and logical QFI/CRB of the GHZ scheme, at one point or over a sweep.
    Qfi(QfiArgs),
    /// Decide whether an error set preserves the QFI of a probe.
    Check(CheckArgs),
    /// List the error set a (2t+1)-qubit phase-flip scheme is immune to.
    ImmuneSet(ImmuneArgs),
    /// Data behind the CRB-vs-time (3) or CRB-vs-N (4) figure.
    Figure(FigureArgs),
    /// Monte Carlo check that maximum likelihood attains the CRB.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    None,
    Time,
    Size,
}

#[derive(Debug, Args)]
pub struct QfiArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub sweep: Sweep,
    /// Block sizes to tabulate; defaults to --block-size.
    #[arg(long, value_delimiter = ',')]
    pub block_sizes: Vec<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builder {
    /// |+…+> with generator Z⊗…⊗Z.
    Theorem3,
    /// (|0…0> + |1…1>)/√2 with generator Σ Z_i/2.
    Ghz,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, conflicts_with = "probe_file")]
    pub builder: Option<Builder>,
    /// Probe amplitudes, one `re [im]` pair per line.
    #[arg(long)]
    pub probe_file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    /// Generator as a sum of Pauli strings, e.g. `ZZZ` or `0.5*ZII+0.5*IZI`.
    #[arg(long)]
    pub generator: Option<String>,
    /// Comma-separated Pauli strings.
    #[arg(long, conflicts_with = "errors_file")]
    pub errors: Option<String>,
    /// One Pauli string per line (commas also accepted).
    #[arg(long)]
    pub errors_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub theta: f64,
    /// Do not add the identity to the error set.
    #[arg(long)]
    pub no_identity: bool,
}

#[derive(Debug, Args)]
pub struct ImmuneArgs {
    /// Code length n = 2t+1.
    #[arg(long)]
    pub qubits: usize,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// 3 (CRB vs t) or 4 (CRB vs N).
    #[arg(value_parser = clap::value_parser!(u8).range(3..=4))]
    pub which: u8,
    #[arg(long, value_delimiter = ',')]
    pub block_sizes: Vec<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Noise pairs `gx:gz,gx:gz` for figure 4.
    #[arg(long)]
    pub noise: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// |+> under e^{-iθZ}, measured in the X basis.
    SingleQubit,
    /// |+…+> under e^{-iθZ⊗…⊗Z} with immune-set mixing, X-basis readout.
    Theorem3,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, value_enum, default_value = "single-qubit")]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub theta: f64,
    /// Total probability of a non-identity immune error.
    #[arg(long, default_value_t = 0.1)]
    pub mix: f64,
}
