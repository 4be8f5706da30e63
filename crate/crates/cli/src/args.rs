//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sinnamon::analysis::ValueDist;
use sinnamon::storage::VectorFormat;
use sinnamon::EngineKind;

#[derive(Debug, Parser)]
#[command(name = "sinnamon", version, about = "Streaming sparse maximum inner product search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic vector collection.
    Gen(GenArgs),
    /// Build an index from a vector file.
    Index(IndexArgs),
    /// Run queries against an index and write a TREC run.
    Query(QueryArgs),
    /// Measure insert throughput as the index grows.
    BenchInsert(BenchInsertArgs),
    /// Measure delete latency on a loaded index.
    BenchDelete(BenchDeleteArgs),
    /// Evaluate the sketch error model, optionally against an index.
    Analyze(AnalyzeArgs),
    /// Score a run: recall against an exact run, MRR or NDCG.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub count: u64,
    #[arg(long)]
    pub dims: u32,
    /// Expected active coordinates per vector.
    #[arg(long)]
    pub psi: f64,
    /// `gaussian:mu,sigma`, `uniform:a,b` or `discrete:v=p,...`.
    #[arg(long)]
    pub dist: ValueDist,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "text")]
    pub format: VectorFormat,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Engine selection shared by `index` and `bench-insert`.
#[derive(Debug, Args)]
pub struct EngineArgs {
    /// linscan, linscan-compressed, sinnamon or sinnamon-plus.
    #[arg(long)]
    pub engine: EngineKind,
    #[arg(long)]
    pub dims: u32,
    /// Rows per sketch half (Sinnamon only).
    #[arg(long)]
    pub m: Option<u32>,
    /// Random mappings per coordinate (Sinnamon only, default 1).
    #[arg(long)]
    pub h: Option<u32>,
    /// Mapping seed (Sinnamon only, default 0).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input vector format; detected from the file header when omitted.
    #[arg(long)]
    pub format: Option<VectorFormat>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Query vectors; the ext id of each query is its qid.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub format: Option<VectorFormat>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Re-rank pool size (default max(k, 5000)).
    #[arg(long)]
    pub kprime: Option<usize>,
    /// Scoring budget per query; unlimited when omitted.
    #[arg(long)]
    pub budget_ms: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Run tag (default: the engine name).
    #[arg(long)]
    pub tag: Option<String>,
    /// Output run file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchInsertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<VectorFormat>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Inserts per timing sample.
    #[arg(long, default_value_t = 1000)]
    pub bucket: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchDeleteArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Number of deletions (default: every live vector).
    #[arg(long)]
    pub count: Option<usize>,
    /// Seed of the deletion order.
    #[arg(long, default_value_t = 0)]
    pub order_seed: u64,
    #[arg(long, default_value_t = 100)]
    pub bucket: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// Probability that the upper sketch overestimates.
    Prob,
    /// CDF of the upper sketch error at each delta.
    Cdf,
    /// Mean and standard deviation of the upper sketch error.
    Expected,
    /// Smallest m meeting an error target (zero-mean Gaussian).
    MinRows,
    /// Monte-Carlo distribution of the standardized inner-product error.
    ZSim,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub formula: Formula,
    #[arg(long, default_value = "gaussian:0,1")]
    pub dist: ValueDist,
    /// Expected active coordinates per vector (default 120, or the index's
    /// mean when --index is given).
    #[arg(long)]
    pub np: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Compare theory with errors measured on this Sinnamon index.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// z-sim: active query coordinates.
    #[arg(long)]
    pub psi_q: Option<usize>,
    /// z-sim: query value distribution (default gaussian:0,1).
    #[arg(long)]
    pub query_dist: Option<ValueDist>,
    /// z-sim: number of trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// z-sim: simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Recall,
    Mrr,
    Ndcg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,
    #[arg(long)]
    pub run: PathBuf,
    /// Exact run (recall only).
    #[arg(long)]
    pub exact: Option<PathBuf>,
    /// Relevance judgments (mrr and ndcg only).
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Recall depth (default 10).
    #[arg(long)]
    pub k: Option<usize>,
    /// Rank cutoff (default 10 for mrr, 1000 for ndcg).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
