//! Command-line surface. Every subcommand starts from the defaults (or a
//! `--config` JSON file) and applies its flags on top.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use motifhash_core::pipeline::RunConfig;
use motifhash_core::synthesis::StepRule;

#[derive(Debug, Parser)]
#[command(name = "motifhash", version, about = "Edge-private motif-preserving graph synthesis and cross-modal hashing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multimodal dataset and its train/query split.
    GenData(GenDataArgs),
    /// Build the degree-clipped similarity graph over the training items.
    BuildGraph(BuildGraphArgs),
    /// Release a sanitized graph from a clipped graph.
    Synthesize(SynthesizeArgs),
    /// Train hash encoders from public features and a sanitized graph.
    Distill(DistillArgs),
    /// Compute retrieval and structure metrics for a trained model.
    Evaluate(EvaluateArgs),
    /// Run the full pipeline over a grid of ε or d_max values.
    Sweep(SweepArgs),
    /// Exhaustively check the gradient sensitivity bound on a small graph.
    AuditSensitivity(AuditArgs),
    /// Run every phase and write all artifacts to one directory.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Global seed; every phase seed is derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

#[derive(Debug, Args)]
pub struct DataFlags {
    /// Number of items.
    #[arg(long = "n")]
    pub n_items: Option<usize>,
    #[arg(long)]
    pub communities: Option<usize>,
    #[arg(long)]
    pub image_dim: Option<usize>,
    #[arg(long)]
    pub text_dim: Option<usize>,
    /// Intra-community feature noise scale.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub hub_fraction: Option<f64>,
    #[arg(long)]
    pub hub_spread: Option<f64>,
    #[arg(long)]
    pub query_fraction: Option<f64>,
}

impl DataFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.data.synthetic;
        set(&mut s.n_items, self.n_items);
        set(&mut s.n_communities, self.communities);
        set(&mut s.image_dim, self.image_dim);
        set(&mut s.text_dim, self.text_dim);
        set(&mut s.noise, self.noise);
        set(&mut s.hub_fraction, self.hub_fraction);
        set(&mut s.hub_spread, self.hub_spread);
        set(&mut cfg.data.query_fraction, self.query_fraction);
    }
}

#[derive(Debug, Args)]
pub struct GraphFlags {
    /// Per-node degree cap of the clipped graph.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Similarities at or below this value never become edges.
    #[arg(long)]
    pub w_floor: Option<f64>,
}

impl GraphFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.graph.d_max, self.dmax);
        set(&mut cfg.graph.w_floor, self.w_floor);
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StepRuleArg {
    Plain,
    MaxNorm,
    Adagrad,
}

#[derive(Debug, Args)]
pub struct SynthFlags {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of noisy mirror-descent iterations.
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub step_rule: Option<StepRuleArg>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    #[arg(long)]
    pub pad_factor: Option<f64>,
    /// Override of the sensitivity bound used for calibration.
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Run with zero noise. The output is NOT PRIVATE.
    #[arg(long)]
    pub audit_noiseless: bool,
}

impl SynthFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.synthesis;
        set(&mut s.epsilon, self.epsilon);
        set(&mut s.delta, self.delta);
        set(&mut s.t_steps, self.t_steps);
        set(&mut s.eta, self.eta);
        set(&mut s.lambda_reg, self.lambda_reg);
        set(&mut s.pad_factor, self.pad_factor);
        if let Some(rule) = self.step_rule {
            s.step_rule = match rule {
                StepRuleArg::Plain => StepRule::Plain,
                StepRuleArg::MaxNorm => StepRule::MaxNorm,
                StepRuleArg::Adagrad => StepRule::AdaGrad,
            };
        }
        if self.delta2.is_some() {
            s.delta2_override = self.delta2;
        }
        if self.audit_noiseless {
            s.noiseless = true;
        }
    }
}

#[derive(Debug, Args)]
pub struct DistillFlags {
    /// Code length K.
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub lambda_cross: Option<f64>,
    #[arg(long)]
    pub gamma_quant: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

impl DistillFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let d = &mut cfg.distill;
        set(&mut d.k_bits, self.bits);
        set(&mut d.epochs, self.epochs);
        set(&mut d.hidden_dim, self.hidden_dim);
        set(&mut d.lambda_cross, self.lambda_cross);
        set(&mut d.gamma_quant, self.gamma_quant);
        set(&mut d.batch_size, self.batch_size);
        set(&mut d.adam.lr, self.lr);
    }
}

#[derive(Debug, Args)]
pub struct EvalFlags {
    /// Retrieval cutoff of mAP@k.
    #[arg(long = "k")]
    pub k_cutoff: Option<usize>,
}

impl EvalFlags {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.eval.k_cutoff, self.k_cutoff);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataFlags,
    /// Output directory for train.csv, query.csv and split.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Training features (CSV).
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Split file; every training id must be listed as a training id.
    #[arg(long, value_name = "FILE")]
    pub split: Option<PathBuf>,
    /// Query features; no query id may appear among the training items.
    #[arg(long, value_name = "FILE")]
    pub query: Option<PathBuf>,
    /// Clipped graph output (TSV).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub synth: SynthFlags,
    /// Clipped graph (TSV).
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Sanitized graph output; the receipt is written next to it.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub distill: DistillFlags,
    /// Training features (CSV); row i is node i of the sanitized graph.
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Sanitized graph (TSV with receipt).
    #[arg(long, value_name = "FILE")]
    pub sanitized: PathBuf,
    /// Output directory for model.json and the training codes.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub eval: EvalFlags,
    #[command(flatten)]
    pub graph: GraphFlags,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub query: PathBuf,
    /// Clipped reference graph for the triangle count error. Without it the
    /// reference is rebuilt from the training features.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Metrics output (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepParam {
    Epsilon,
    Dmax,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    pub graph: GraphFlags,
    #[command(flatten)]
    pub synth: SynthFlags,
    #[command(flatten)]
    pub distill: DistillFlags,
    #[command(flatten)]
    pub eval: EvalFlags,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated grid; `inf` is the noiseless ε point. Defaults to the
    /// standard grid of the parameter.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// CSV output.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: Common,
    /// Clipped graph to audit (at most 16 nodes). Without it a small planted
    /// graph is generated.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Size of the generated planted graph.
    #[arg(long = "n", default_value_t = 12)]
    pub n_nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub communities: usize,
    /// Degree cap of the generated planted graph.
    #[arg(long, default_value_t = 3)]
    pub dmax: usize,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    /// Bound to compare against instead of the default one.
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Report output (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    pub graph: GraphFlags,
    #[command(flatten)]
    pub synth: SynthFlags,
    #[command(flatten)]
    pub distill: DistillFlags,
    #[command(flatten)]
    pub eval: EvalFlags,
    /// Artifact directory; defaults to `out_dir` of the configuration.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
