use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stagewise", version, about = "LAR, lasso and forward stagewise regularization paths")]
pub struct Cli {
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: STAGEWISE_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Run data-parallel work on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact piecewise-linear path (LAR, lasso or forward stagewise).
    Solve(SolveArgs),
    /// Incremental ε-stagewise, monotone and general-loss variants.
    Stagewise(StagewiseArgs),
    /// Check the signed-subset condition for monotone paths.
    CheckMonotone(CheckArgs),
    /// Generate a simulated dataset.
    Simulate(SimulateArgs),
    /// RSS profiles, path comparison and holdout error.
    Diagnose(DiagnoseArgs),
    /// Check the lasso optimality conditions at every vertex of a path.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset CSV (optional header row).
    #[arg(long, short)]
    pub input: PathBuf,

    /// 0-based response column (default: last).
    #[arg(long)]
    pub response_col: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Path file to write; `.json` selects JSON, anything else long CSV.
    /// Without it, JSON goes to stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    /// Export collapsed coefficients on the original predictor scale.
    #[arg(long)]
    pub original_scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lar,
    Lasso,
    Fs0,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Path algorithm [default: lasso]
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,

    /// Stop when the path parameter reaches this value.
    #[arg(long)]
    pub stop_norm: Option<f64>,

    /// Stop when the maximal correlation falls to this value.
    #[arg(long)]
    pub stop_lambda: Option<f64>,

    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Squared,
    Logistic,
}

#[derive(Debug, Args)]
pub struct StagewiseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Step size (for --integrate, the initial arc-length step).
    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long, value_enum, default_value = "squared")]
    pub loss: LossArg,

    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Record every k-th step.
    #[arg(long)]
    pub stride: Option<usize>,

    /// Monotone stagewise in the expanded design (squared loss only;
    /// general losses always use it).
    #[arg(long)]
    pub monotone: bool,

    /// Integrate the monotone path with adaptive Euler steps instead.
    #[arg(long, conflicts_with = "sweep")]
    pub integrate: bool,

    /// Print a convergence table against the exact forward-stagewise path
    /// for this many halvings of epsilon.
    #[arg(long, value_name = "LEVELS")]
    pub sweep: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Largest subset size to enumerate (default: all).
    #[arg(long)]
    pub max_subset: Option<usize>,

    /// Write the first violating subset as JSON to this file.
    #[arg(long)]
    pub emit_violation: Option<PathBuf>,

    /// Check a single subset (comma-separated 0-based predictors).
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,

    /// Signs for --subset, each 1 or -1 (default all 1).
    #[arg(long, value_delimiter = ',', requires = "subset", allow_hyphen_values = true)]
    pub signs: Option<Vec<i8>>,

    /// Allow exhaustive checks with more than 12 predictors.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Sine,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    PiecewiseLinear,
    PiecewiseConstant,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: SimKind,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Dataset CSV to write (default stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub n: Option<usize>,

    /// sine: basis family.
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,

    /// sine: comma-separated knots.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub knots: Option<Vec<f64>>,

    /// sine: noise standard deviation.
    #[arg(long)]
    pub noise_scale: Option<f64>,

    /// block: number of predictors.
    #[arg(long)]
    pub p: Option<usize>,

    /// block: block size.
    #[arg(long)]
    pub block: Option<usize>,

    /// block: within-block correlation.
    #[arg(long)]
    pub rho: Option<f64>,

    /// block: noise variance.
    #[arg(long)]
    pub sigma2: Option<f64>,

    /// block: write noise-free holdout rows (predictors and mean response).
    #[arg(long)]
    pub holdout_out: Option<PathBuf>,

    #[arg(long, default_value_t = 2000)]
    pub holdout_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexArg {
    Norm,
    Arclength,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["rss", "compare", "mse"])))]
pub struct DiagnoseArgs {
    /// RSS along the path.
    #[arg(long)]
    pub rss: bool,
    /// Sup difference and divergence point of two paths.
    #[arg(long)]
    pub compare: bool,
    /// Holdout MSE along the path.
    #[arg(long)]
    pub mse: bool,

    /// Training dataset the path was fitted on (--rss, --mse).
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    #[arg(long)]
    pub response_col: Option<usize>,

    /// Path file(s), expanded JSON or CSV; --compare takes two.
    #[arg(long = "path", required = true)]
    pub paths: Vec<PathBuf>,

    /// Holdout CSV whose last column is the target (--mse).
    #[arg(long)]
    pub holdout: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "norm")]
    pub index: IndexArg,

    /// Grid points for --rss and --mse.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Lasso path file (expanded JSON or CSV).
    #[arg(long)]
    pub path: PathBuf,

    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}
