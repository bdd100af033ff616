use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "siscm", version, about = "Counterfactual second opinions of human experts")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Posterior samples per counterfactual query
    #[arg(short = 'T', long = "samples", global = true)]
    pub samples: Option<usize>,

    /// Posterior samples per edge-weight estimate
    #[arg(long, global = true)]
    pub t_weights: Option<usize>,

    /// Greedy partitioning restarts
    #[arg(long, global = true)]
    pub restarts: Option<usize>,

    /// CNB additive smoothing
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Multiplicative slack of the violation test
    #[arg(long, global = true)]
    pub slack: Option<f64>,

    /// GNB variance smoothing
    #[arg(long, global = true)]
    pub smoothing: Option<f64>,

    /// Loss inside edge weights
    #[arg(long, global = true, value_enum)]
    pub loss: Option<LossArg>,

    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    ZeroOne,
    Nll,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum PredictorArg {
    Siscm,
    Gnb,
    #[value(name = "gnb_cnb", alias = "gnb-cnb")]
    GnbCnb,
}

impl PredictorArg {
    pub fn name(self) -> &'static str {
        match self {
            PredictorArg::Siscm => "siscm",
            PredictorArg::Gnb => "gnb",
            PredictorArg::GnbCnb => "gnb_cnb",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic panel with a planted partition
    Synth(SynthArgs),
    /// Fit per-expert GNB and CNB models
    Train(TrainArgs),
    /// Learn the expert partition
    Partition(PartitionArgs),
    /// Answer counterfactual queries
    Infer(InferArgs),
    /// Score predictors on a held-out panel
    Eval(EvalArgs),
    /// Recovery benchmark over training sizes and sparsity levels
    Bench(BenchArgs),
}

#[derive(Args, Debug, Default)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_experts: Option<usize>,
    /// Comma-separated group sizes
    #[arg(long, value_delimiter = ',')]
    pub group_sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    #[arg(long)]
    pub test_sparsity: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training panel (.jsonl)
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    /// Observed expert
    #[arg(long)]
    pub expert: String,
    /// Observed label index
    #[arg(long)]
    pub label: usize,
    /// Comma-separated feature vector
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["data", "sample"])]
    pub features: Option<Vec<f64>>,
    /// Panel to look the sample up in
    #[arg(long, requires = "sample")]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    pub sample: Option<String>,
    /// Target expert, or `all`
    #[arg(long, default_value = "all")]
    pub target: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Held-out panel
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    /// CNB bundle, required by gnb_cnb
    #[arg(long)]
    pub cnb: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "siscm")]
    pub predictor: Vec<PredictorArg>,
}

#[derive(Args, Debug, Default)]
pub struct BenchArgs {
    /// Comma-separated training sizes
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Comma-separated sparsity levels
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Fit GNB models on the training panel instead of using the true ones
    #[arg(long)]
    pub fit_models: bool,
}
