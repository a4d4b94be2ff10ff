//! The `madsketch` command line.
//!
//! Every flag can also be set through an environment variable named
//! `MADSKETCH_<FLAG>` (upper case, dashes as underscores).

mod commands;
mod input;

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

pub use commands::execute;

#[derive(Debug, Parser)]
#[command(name = "madsketch", version, about = "Label propagation with exact and count-min-sketch label stores")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Run label propagation and write the top labels per node.
    Propagate(PropagateArgs),
    /// Print the sketch width and depth for a sizing regime.
    Size(SizeArgs),
    /// Mean reciprocal rank of a labels file against gold labels.
    Eval(EvalArgs),
    /// Rank/score profile and fitted Zipf exponent of exact MAD scores.
    Skew(SkewArgs),
    /// Max-conductance and conductance of node sets.
    Conductance(ConductanceArgs),
    /// Run exact and sketch backends on one dataset and compare.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mad,
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Sketch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Entropy,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Sparse,
    Zipf,
    Community,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    #[default]
    Tsv,
    Csv,
}

impl FormatArg {
    pub fn sep(self) -> char {
        match self {
            FormatArg::Tsv => '\t',
            FormatArg::Csv => ',',
        }
    }
}

/// Dataset files. `--dataset DIR` supplies the names written by `gen`
/// (`edges.tsv`, `seeds.tsv`, `gold.tsv`, `eval.txt`); explicit paths win.
#[derive(Clone, Debug, Args)]
pub struct InputArgs {
    #[arg(long, env = "MADSKETCH_DATASET")]
    pub dataset: Option<PathBuf>,
    #[arg(long, env = "MADSKETCH_EDGES")]
    pub edges: Option<PathBuf>,
    #[arg(long, env = "MADSKETCH_SEEDS")]
    pub seeds: Option<PathBuf>,
    #[arg(long, env = "MADSKETCH_GOLD")]
    pub gold: Option<PathBuf>,
    #[arg(long, env = "MADSKETCH_EVAL_NODES")]
    pub eval_nodes: Option<PathBuf>,
    /// Treat edges as directed instead of symmetrizing them.
    #[arg(long, env = "MADSKETCH_DIRECTED")]
    pub directed: bool,
}

#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Mad, env = "MADSKETCH_METHOD")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 10, env = "MADSKETCH_ITERS")]
    pub iters: usize,
    #[arg(long, default_value_t = 0.98, env = "MADSKETCH_MU1")]
    pub mu1: f64,
    #[arg(long, default_value_t = 0.01, env = "MADSKETCH_MU2")]
    pub mu2: f64,
    #[arg(long, default_value_t = 0.01, env = "MADSKETCH_MU3")]
    pub mu3: f64,
    /// Random-walk probability recipe.
    #[arg(long, value_enum, default_value_t = WeightsArg::Entropy, env = "MADSKETCH_WEIGHTS")]
    pub weights: WeightsArg,
    /// Entropy recipe base, > 1.
    #[arg(long, default_value_t = 2.0, env = "MADSKETCH_BETA")]
    pub beta: f64,
    /// Stop once no node's scores change by more than this (L1).
    #[arg(long, env = "MADSKETCH_CONVERGENCE_DELTA")]
    pub convergence_delta: Option<f64>,
    /// Exact rows drop scores below this.
    #[arg(long, default_value_t = 1e-12, env = "MADSKETCH_PRUNE_THRESHOLD")]
    pub prune_threshold: f64,
    /// Worker threads for per-node updates; 1 runs sequentially.
    #[arg(long, default_value_t = 1, env = "MADSKETCH_THREADS")]
    pub threads: usize,
}

/// Explicit `--width/--depth` or `--auto-size <regime>`, never both.
#[derive(Clone, Debug, Args)]
pub struct SketchArgs {
    #[arg(long, env = "MADSKETCH_WIDTH", requires = "depth", conflicts_with = "auto_size")]
    pub width: Option<usize>,
    #[arg(long, env = "MADSKETCH_DEPTH", requires = "width", conflicts_with = "auto_size")]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 0, env = "MADSKETCH_HASH_SEED")]
    pub hash_seed: u64,
    #[arg(long, value_enum, env = "MADSKETCH_AUTO_SIZE")]
    pub auto_size: Option<RegimeArg>,
    #[arg(long, default_value_t = 1, env = "MADSKETCH_K")]
    pub k: u32,
    #[arg(long, env = "MADSKETCH_Z")]
    pub z: Option<f64>,
    #[arg(long, env = "MADSKETCH_PSI")]
    pub psi: Option<f64>,
    #[arg(long, default_value_t = 0.05, env = "MADSKETCH_EPS")]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1, env = "MADSKETCH_DELTA")]
    pub delta: f64,
    /// Label count used for auto-sizing; defaults to the seed vocabulary.
    #[arg(long, env = "MADSKETCH_DECLARED_LABELS")]
    pub declared_labels: Option<u64>,
}

#[derive(Clone, Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact, env = "MADSKETCH_BACKEND")]
    pub backend: BackendArg,
    #[command(flatten)]
    pub sketch: SketchArgs,
    /// Labels kept per node in the output.
    #[arg(long, default_value_t = 10, env = "MADSKETCH_TOP_K")]
    pub top_k: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv, env = "MADSKETCH_FORMAT")]
    pub format: FormatArg,
    /// Labels file; standard output when absent.
    #[arg(long, short, env = "MADSKETCH_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Per-iteration report; standard error when absent.
    #[arg(long, env = "MADSKETCH_REPORT")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
#[command(group(ArgGroup::new("regime").required(true).args(["sparse", "zipf", "community"])))]
pub struct SizeArgs {
    #[arg(long)]
    pub sparse: bool,
    #[arg(long)]
    pub zipf: bool,
    #[arg(long)]
    pub community: bool,
    #[arg(long, default_value_t = 1, env = "MADSKETCH_K")]
    pub k: u32,
    #[arg(long, env = "MADSKETCH_Z")]
    pub z: Option<f64>,
    #[arg(long, env = "MADSKETCH_PSI")]
    pub psi: Option<f64>,
    #[arg(long, default_value_t = 0.05, env = "MADSKETCH_EPS")]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1, env = "MADSKETCH_DELTA")]
    pub delta: f64,
    /// Label count.
    #[arg(long, env = "MADSKETCH_M")]
    pub m: u64,
}

#[derive(Clone, Debug, Args)]
pub struct EvalArgs {
    /// `node label score` lines, as written by `propagate`.
    #[arg(long, env = "MADSKETCH_LABELS")]
    pub labels: PathBuf,
    #[arg(long, env = "MADSKETCH_GOLD")]
    pub gold: PathBuf,
    /// Nodes to evaluate; every gold node when absent.
    #[arg(long, env = "MADSKETCH_EVAL_NODES")]
    pub eval_nodes: Option<PathBuf>,
    /// Per-node rank CSV.
    #[arg(long, env = "MADSKETCH_RANKS")]
    pub ranks: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SkewArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Highest rank reported and fitted; defaults to min(m, 1000).
    #[arg(long, env = "MADSKETCH_RANK_LIMIT")]
    pub rank_limit: Option<usize>,
    /// Average rank r only over nodes with at least r non-zero scores.
    #[arg(long, env = "MADSKETCH_NONZERO_ONLY")]
    pub nonzero_only: bool,
    /// `rank,mean_score` CSV; standard output when absent.
    #[arg(long, short, env = "MADSKETCH_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
#[command(group(ArgGroup::new("sets").required(true).args(["set", "blocks"])))]
pub struct ConductanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// One node per line.
    #[arg(long, env = "MADSKETCH_SET")]
    pub set: Option<PathBuf>,
    /// `node block` lines; one report row per block.
    #[arg(long, env = "MADSKETCH_BLOCKS")]
    pub blocks: Option<PathBuf>,
    /// Measure on the symmetric MAD weights instead of raw edge weights
    /// (needs seeds).
    #[arg(long, env = "MADSKETCH_MODIFIED")]
    pub modified: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv, env = "MADSKETCH_FORMAT")]
    pub format: FormatArg,
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sketch: SketchArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv, env = "MADSKETCH_FORMAT")]
    pub format: FormatArg,
}

#[derive(Clone, Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub generator: Generator,
    /// Output directory.
    #[arg(long, short, global = true, env = "MADSKETCH_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1, env = "MADSKETCH_RNG_SEED")]
    pub rng_seed: u64,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Generator {
    /// Planted clusters with k-sparse binary seeds.
    Ksparse {
        #[arg(long, default_value_t = 2000, env = "MADSKETCH_N")]
        n: usize,
        #[arg(long, default_value_t = 200, env = "MADSKETCH_M")]
        m: usize,
        #[arg(long, default_value_t = 2, env = "MADSKETCH_K")]
        k: usize,
        #[arg(long, default_value_t = 2, env = "MADSKETCH_SEEDS_PER_LABEL")]
        seeds_per_label: usize,
        #[arg(long, default_value_t = 6.0, env = "MADSKETCH_MEAN_DEGREE")]
        mean_degree: f64,
        #[arg(long, default_value_t = 0.1, env = "MADSKETCH_INTER_FRACTION")]
        inter_fraction: f64,
    },
    /// Clusters whose seed rows decay like rank^-z.
    Zipf {
        #[arg(long, default_value_t = 1000, env = "MADSKETCH_N")]
        n: usize,
        #[arg(long, default_value_t = 100, env = "MADSKETCH_M")]
        m: usize,
        #[arg(long, default_value_t = 1.0, env = "MADSKETCH_Z")]
        z: f64,
        /// Labels per seed row; defaults to m.
        #[arg(long, env = "MADSKETCH_HEAD")]
        head: Option<usize>,
        #[arg(long, default_value_t = 10, env = "MADSKETCH_CLUSTERS")]
        clusters: usize,
        #[arg(long, default_value_t = 0.1, env = "MADSKETCH_SEED_FRACTION")]
        seed_fraction: f64,
        #[arg(long, default_value_t = 6.0, env = "MADSKETCH_MEAN_DEGREE")]
        mean_degree: f64,
        #[arg(long, default_value_t = 0.1, env = "MADSKETCH_BRIDGE_WEIGHT")]
        bridge_weight: f64,
    },
    /// Dense blocks joined by bridges scaled to a max-conductance target.
    Community {
        #[arg(long, default_value_t = 20, env = "MADSKETCH_BLOCKS")]
        blocks: usize,
        #[arg(long, default_value_t = 50, env = "MADSKETCH_BLOCK_SIZE")]
        block_size: usize,
        #[arg(long, default_value_t = 0.3, env = "MADSKETCH_INTRA_P")]
        intra_p: f64,
        #[arg(long, default_value_t = 1.0, env = "MADSKETCH_INTRA_WEIGHT")]
        intra_weight: f64,
        #[arg(long, default_value_t = 1, env = "MADSKETCH_BRIDGES_PER_BLOCK")]
        bridges_per_block: usize,
        #[arg(long, default_value_t = 1.0, env = "MADSKETCH_BRIDGE_WEIGHT")]
        bridge_weight: f64,
        #[arg(long, default_value_t = 0.05, env = "MADSKETCH_PSI")]
        psi: f64,
    },
}
