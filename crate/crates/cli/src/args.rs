use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "coreset", version, about = "Sensitivity-sampling coresets for k-means")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random choice.
    #[arg(long, global = true, env = "CORESET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Data artifact format; inferred from the `--out` extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Data artifact path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON report path; defaults to `<out>.json`, or stdout when there is no
    /// data artifact on stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Build a coreset.
    Build(BuildCmd),
    /// Per-point sensitivity upper bounds.
    Sensitivity(SensitivityCmd),
    /// Solve k-means on the data or through a coreset.
    Solve(SolveCmd),
    /// Measure coreset error on a query suite.
    Check(CheckCmd),
    /// Merge-reduce coreset over a row stream.
    Stream(StreamCmd),
    /// Simulated distributed construction.
    Distribute(DistributeCmd),
    /// Compare samplers over repeated builds.
    Bench(BenchCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Adversarial,
    Gmm,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Planted clusters (gmm only).
    #[arg(long = "clusters", default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Sensitivity,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Number of draws; the sample-size calculator decides when omitted.
    #[arg(long)]
    pub m: Option<usize>,
    /// Leading constant of the sample-size calculator.
    #[arg(long, default_value_t = 1.0)]
    pub c_size: f64,
    #[arg(long, value_enum, default_value_t = DistributionArg::Sensitivity)]
    pub distribution: DistributionArg,
    /// Fixed number of D²-seeding runs for the bicriteria step.
    #[arg(long)]
    pub bicriteria_runs: Option<usize>,
    /// Halve the two cost coefficients of the sensitivity bound.
    #[arg(long)]
    pub alg2_constants: bool,
    /// Allow non-uniform input weights.
    #[arg(long)]
    pub generalized_weights: bool,
    /// Keep repeated draws as separate rows.
    #[arg(long)]
    pub no_merge: bool,
}

#[derive(Debug, Args)]
pub struct BuildCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct SensitivityCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub bicriteria_runs: Option<usize>,
    #[arg(long)]
    pub alg2_constants: bool,
    #[arg(long)]
    pub generalized_weights: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lloyd,
    Ptas,
}

#[derive(Debug, Args)]
pub struct SolveCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Lloyd)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Maximum number of partitions the exhaustive solver may enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
    /// Solve on a coreset and evaluate the centers on the full data.
    #[arg(long)]
    pub via_coreset: bool,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct CheckCmd {
    #[arg(long)]
    pub full: PathBuf,
    #[arg(long)]
    pub coreset: PathBuf,
    /// `default`, or a JSON file holding a list of queries.
    #[arg(long, default_value = "default")]
    pub suite: String,
    /// Number of centers of the default suite.
    #[arg(long)]
    pub k: Option<usize>,
    /// Exit with status 3 when the measured error exceeds this value.
    #[arg(long)]
    pub epsilon_budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StreamCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub block_size: usize,
    #[arg(long, default_value_t = 0.1)]
    pub level_epsilon: f64,
    /// Compress the finalized union once more at this error.
    #[arg(long)]
    pub final_epsilon: Option<f64>,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Rr,
    Contig,
}

#[derive(Debug, Args)]
pub struct DistributeCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = PartitionArg::Rr)]
    pub partition: PartitionArg,
    #[command(flatten)]
    pub build: BuildArgs,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// Dataset file; a generated dataset is used when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "clusters", default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated samplers to compare.
    #[arg(long, value_delimiter = ',', default_value = "sensitivity,uniform")]
    pub compare: Vec<DistributionArg>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[command(flatten)]
    pub build: BuildArgs,
}
