use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "snn",
    version,
    about = "Train, check, prune and sparsify dense feedforward networks",
    propagate_version = true
)]
pub struct Cli {
    /// Flat `key = value` file whose keys mirror the long flags. Flags given
    /// on the command line win over file entries.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a network by backpropagation and gradient descent (full-batch,
    /// stochastic or minibatch, with optional momentum and adaptive
    /// per-parameter rates).
    #[command(args_override_self = true)]
    Train(TrainArgs),

    /// Report mean squared-error cost, accuracy and sparsity of a saved model.
    #[command(args_override_self = true)]
    Eval(EvalArgs),

    /// Compare backpropagated gradients with central finite differences on
    /// seeded random networks.
    #[command(args_override_self = true)]
    Gradcheck(GradcheckArgs),

    /// Zero and freeze the smallest-magnitude weights.
    #[command(args_override_self = true)]
    Prune(PruneArgs),

    /// Continue training a pruned model with its pruned weights held at zero.
    #[command(args_override_self = true)]
    Retrain(RetrainArgs),

    /// Measure activation and weight sparsity under epsilon-thresholded
    /// activations, optionally sweeping epsilon or calibrating it per layer.
    #[command(args_override_self = true)]
    Sparsity(SparsityArgs),
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    /// full-batch, sgd or minibatch.
    #[arg(long, default_value = "minibatch")]
    pub method: String,

    /// Minibatch size.
    #[arg(long, default_value_t = 32)]
    pub batch: usize,

    /// Learning rate.
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,

    /// Momentum coefficient in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub momentum: f64,

    /// Scale each parameter's step by the root of its accumulated squared gradients.
    #[arg(long)]
    pub adaptive: bool,

    /// Damping added under the adaptive square root.
    #[arg(long, default_value_t = 1e-8)]
    pub damping: f64,

    #[arg(long, default_value_t = 50)]
    pub epochs: usize,

    /// Seeds initialisation and shuffling.
    #[arg(long, env = "SNN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Keep activation thresholds active in training passes
    /// (default: false for train, true for retrain).
    #[arg(long, value_name = "BOOL")]
    pub threshold_during_training: Option<bool>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// idx:<images>,<labels> | csv:<path> | synth:<two-clusters|xor>:<n>[:seed=S][:noise=X]
    #[arg(long)]
    pub data: String,

    /// Layer widths, input first, e.g. 784,16,16,10.
    #[arg(long, required_unless_present = "model")]
    pub shape: Option<String>,

    /// One activation per layer, or one for all: identity, sigmoid, relu,
    /// modified-relu, thresholded-sigmoid.
    #[arg(long, default_value = "sigmoid")]
    pub activations: String,

    /// Threshold for thresholded activations: one value, or one per layer.
    #[arg(long)]
    pub epsilon: Option<String>,

    /// Start from this model instead of a fresh initialisation.
    #[arg(long, conflicts_with_all = ["shape"])]
    pub model: Option<PathBuf>,

    #[command(flatten)]
    pub optim: OptimArgs,

    #[arg(long)]
    pub out: PathBuf,

    /// Per-epoch metrics as CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub data: String,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value = "3,4,2")]
    pub shape: String,

    #[arg(long, default_value = "sigmoid")]
    pub activations: String,

    #[arg(long)]
    pub epsilon: Option<String>,

    /// Number of seeded networks, starting at --seed.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,

    #[arg(long, env = "SNN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,

    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("amount").required(true).args(["target", "theta"])))]
pub struct PruneArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Fraction of weights to zero, in [0, 1].
    #[arg(long)]
    pub target: Option<f64>,

    /// Zero every weight with |w| <= theta.
    #[arg(long)]
    pub theta: Option<f64>,

    /// Pruned model, with the mask embedded.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the mask as a sidecar file.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrainArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Mask sidecar; defaults to the mask embedded in the model.
    #[arg(long)]
    pub mask: Option<PathBuf>,

    #[arg(long)]
    pub data: String,

    #[command(flatten)]
    pub optim: OptimArgs,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SparsityArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub data: String,

    /// Ascending epsilon list, e.g. 0,0.25,0.5,1,2.
    #[arg(long, conflicts_with_all = ["epsilon", "calibrate", "model_out"])]
    pub eps_sweep: Option<String>,

    /// Apply this threshold (one value, or one per layer) before measuring.
    #[arg(long, conflicts_with = "calibrate")]
    pub epsilon: Option<String>,

    /// Set each layer's threshold at this quantile of its pre-activations.
    #[arg(long, value_name = "Q")]
    pub calibrate: Option<f64>,

    /// Sweep table as CSV.
    #[arg(long, requires = "eps_sweep")]
    pub out: Option<PathBuf>,

    /// Save the thresholded model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}
