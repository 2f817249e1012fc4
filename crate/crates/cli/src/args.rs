use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "flicker", version, about = "Expected and local emergence measures for discrete Markov systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Prior over past states (default depends on the subcommand).
    #[arg(long, global = true, value_enum)]
    pub prior: Option<PriorArg>,
    /// Output path; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for walks and label propagation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Uniform,
    Stationary,
}

impl From<PriorArg> for flicker_core::Prior {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Uniform => flicker_core::Prior::Uniform,
            PriorArg::Stationary => flicker_core::Prior::Stationary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum WeightingArg {
    #[default]
    Uniform,
    Stationary,
}

impl From<WeightingArg> for flicker_core::Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Uniform => flicker_core::Weighting::UniformWithinGroup,
            WeightingArg::Stationary => flicker_core::Weighting::StationaryWithinGroup,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coarse-graining analysis of a transition matrix (default prior: uniform).
    Analyze(AnalyzeArgs),
    /// Integrated information decomposition of a two-element system (default prior: stationary).
    Phiid(PhiidArgs),
    /// Seeded annotated random walk (default prior: stationary).
    Walk(WalkArgs),
    /// Random-walker emergence on a weighted graph (default prior: uniform).
    Network(NetworkArgs),
    /// Search for the partition with the most effective macro scale.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Transition matrix CSV.
    pub tpm: PathBuf,
    /// Partition CSV `micro_label,macro_label`.
    #[arg(long, conflicts_with = "aggregation")]
    pub partition: Option<PathBuf>,
    /// Boolean element-aggregation JSON, as an alternative to a partition file.
    #[arg(long)]
    pub aggregation: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub weighting: WeightingArg,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("scope").required(true).args(["realization", "expected"])))]
pub struct PhiidArgs {
    /// Factorized-system JSON.
    pub system: PathBuf,
    /// Realized transition `a1,a2->b1,b2`.
    #[arg(long)]
    pub realization: Option<String>,
    /// Decompose the expected excess entropy instead.
    #[arg(long)]
    pub expected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("dynamics").required(true).multiple(true).args(["tpm", "system"])))]
pub struct WalkArgs {
    /// Transition matrix CSV; optional when --system supplies the dynamics.
    pub tpm: Option<PathBuf>,
    /// Number of transitions to simulate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    /// Partition CSV enabling macro-scale annotation.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub weighting: WeightingArg,
    /// Factorized-system JSON enabling causal-decoupling annotation.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Initial state label, or `draw` to sample it from the prior (default: the first state).
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    pub format: TraceFormat,
    /// Write the flicker summary as JSON here instead of to standard error.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("grouping").required(true).args(["communities", "label_prop"])))]
pub struct NetworkArgs {
    /// Edge-list CSV `src,dst[,weight]`.
    pub edges: PathBuf,
    /// Treat edges as directed (default: each edge is added both ways).
    #[arg(long)]
    pub directed: bool,
    /// Community CSV `node,community`.
    #[arg(long)]
    pub communities: Option<PathBuf>,
    /// Detect communities by label propagation seeded with --seed.
    #[arg(long)]
    pub label_prop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ModeArg {
    #[default]
    Exhaustive,
    Greedy,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Transition matrix CSV.
    pub tpm: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
}
