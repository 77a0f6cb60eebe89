use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridgrowth::fitting::FitMode;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gridgrowth", version, about = "Spatial growth model for power-grid topologies")]
pub struct Cli {
    /// Directory for every artifact and the run manifest.
    #[arg(long, global = true, env = "GRIDGROWTH_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Grow a network and write its edge list, positions and degree tables.
    Generate(GenerateArgs),
    /// Degree histogram, diameter or betweenness of an existing network.
    Analyze(AnalyzeArgs),
    /// Fit an exponential mixture to a network's degree distribution.
    Fit(FitArgs),
    /// Monte Carlo SIS or SIR traces on a network.
    Epidemic(EpidemicArgs),
    /// Fit a real network, grow its twin and compare the two.
    Compare(CompareArgs),
    /// Mean diameter of grown networks against network size.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct KArgs {
    /// Constant number of links per new node.
    #[arg(long, conflicts_with = "k_support")]
    pub k: Option<usize>,
    /// Values K may take, e.g. 3,4,5.
    #[arg(long, value_delimiter = ',')]
    pub k_support: Vec<usize>,
    /// Probabilities aligned with --k-support; uniform when omitted.
    #[arg(long, value_delimiter = ',', requires = "k_support")]
    pub k_probs: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Growth document (radius, nodes|density, k_support, k_probs, seed);
    /// replaces the flags below.
    #[arg(long, conflicts_with_all = ["nodes", "density", "k", "k_support"])]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "density")]
    pub nodes: Option<usize>,
    /// Births per unit area; the node count is Poisson.
    #[arg(long)]
    pub density: Option<f64>,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, default_value_t = 20.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list path; defaults to graph.edges in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Matrix Market files (.mtx) as admittance, anything else as edge list.
    Auto,
    Edgelist,
    Mtx,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Admittance magnitude above which an entry counts as a line.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Degree,
    Diameter,
    Betweenness,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Histogram bins for betweenness pdfs.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FitOptions {
    #[arg(long, default_value_t = 3)]
    pub max_components: usize,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    /// Largest shift considered; defaults to the maximum observed degree.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = FitMode::Model)]
    pub mode: FitMode,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sis,
    Sir,
}

#[derive(Debug, Args, Serialize)]
pub struct EpidemicOptions {
    #[arg(long, value_enum, default_value_t = ModelKind::Sis)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.3)]
    pub beta: f64,
    /// SIS recovery probability.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// SIR removal probability.
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Fraction of nodes infected at random at step 0 (at least one).
    #[arg(long, default_value_t = 0.01, conflicts_with = "initial_nodes")]
    pub initial_fraction: f64,
    /// Node labels infected at step 0, as written in the input file.
    #[arg(long, value_delimiter = ',')]
    pub initial_nodes: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct EpidemicArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub epidemic: EpidemicOptions,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// The real network.
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub epidemic: EpidemicOptions,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Disk radius of the grown twin.
    #[arg(long, default_value_t = 20.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000,4000,8000")]
    pub sizes: Vec<usize>,
    /// Seeds per size, starting at --seed.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20.0)]
    pub radius: f64,
}
