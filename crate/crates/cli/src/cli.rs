use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topiceval_core::coherence::{CoherenceMeasure, CvReference};
use topiceval_core::DEFAULT_SEED;

use crate::evaluate::DiversityKind;
use crate::loaders::InputFormat;

#[derive(Debug, Parser)]
#[command(name = "topiceval", version, about = "Topic models and topic-quality benchmarks")]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize raw documents into a corpus archive.
    Preprocess(PreprocessArgs),
    /// Fit LDA by collapsed Gibbs sampling.
    Lda(LdaArgs),
    /// Fit NMF on the TF-IDF matrix.
    Nmf(NmfArgs),
    /// Embeddings → PCA → clustering → c-TF-IDF topics.
    Pipeline(PipelineArgs),
    /// Score topic coherence.
    Coherence(CoherenceArgs),
    /// Score topic diversity / divergence.
    Diversity(DiversityArgs),
    /// Produce one run record for a (dataset, encoder) pair.
    Evaluate(EvaluateArgs),
    /// Evaluate every dataset × encoder combination of a config file.
    Sweep(SweepArgs),
    /// Aggregate run records per encoder.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Umass,
    #[value(name = "c_npmi", alias = "c-npmi", alias = "npmi")]
    CNpmi,
    #[value(name = "c_v", alias = "c-v", alias = "cv")]
    CV,
}

impl From<MeasureArg> for CoherenceMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Umass => CoherenceMeasure::Umass,
            MeasureArg::CNpmi => CoherenceMeasure::CNpmi,
            MeasureArg::CV => CoherenceMeasure::CV,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvReferenceArg {
    Mean,
    Complement,
}

impl From<CvReferenceArg> for CvReference {
    fn from(r: CvReferenceArg) -> Self {
        match r {
            CvReferenceArg::Mean => CvReference::MeanVector,
            CvReferenceArg::Complement => CvReference::Complement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClustererArg {
    Hdbscan,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = "TOPICEVAL_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// A directory of text files, a CSV file or a JSON-lines file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input shape; inferred from the path when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// CSV column / JSON field with the document text.
    #[arg(long, default_value = "text")]
    pub text_field: String,
    /// CSV column / JSON field with the document id.
    #[arg(long, default_value = "id")]
    pub id_field: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep letter case.
    #[arg(long)]
    pub keep_case: bool,
    /// Split on whitespace only, keeping punctuation inside tokens.
    #[arg(long)]
    pub keep_punctuation: bool,
    /// Keep tokens containing digits or other non-letters.
    #[arg(long)]
    pub keep_non_alphabetic: bool,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = 15)]
    pub max_len: usize,
    /// Disable stopword removal.
    #[arg(long, conflicts_with = "stopwords")]
    pub no_stopwords: bool,
    /// Replace the built-in English list with one stopword per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LdaArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Document-topic prior; 50/k when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NmfArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineFlags {
    /// PCA target dimension.
    #[arg(long, default_value_t = 5)]
    pub reduce_dim: usize,
    #[arg(long, value_enum, default_value_t = ClustererArg::Hdbscan)]
    pub clusterer: ClustererArg,
    #[arg(long, default_value_t = 10)]
    pub min_cluster_size: usize,
    /// Defaults to the minimum cluster size.
    #[arg(long)]
    pub min_samples: Option<usize>,
    /// Cluster count for k-means.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long, default_value_t = 300)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// EMB1 embedding file aligned with the corpus documents.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `doc_id,label` rows.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureFlags {
    #[arg(long, value_enum, default_value_t = MeasureArg::CV)]
    pub measure: MeasureArg,
    /// Sliding-window size; 70 for C_NPMI and 110 for C_v by default.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long = "topn", alias = "top-n", default_value_t = 10)]
    pub top_n: usize,
    /// C_UMass smoothing constant.
    #[arg(long, default_value_t = 1e-12)]
    pub epsilon: f64,
    /// C_v reference vector.
    #[arg(long, value_enum, default_value_t = CvReferenceArg::Mean)]
    pub cv_reference: CvReferenceArg,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Topics JSON (or text, one topic per line).
    #[arg(long)]
    pub topics: PathBuf,
    #[command(flatten)]
    pub measure: MeasureFlags,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write `word_i,word_j,joint,occur_i,occur_j,n_virtual` rows.
    #[arg(long)]
    pub dump_stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long, value_enum, default_value_t = DiversityKind::Unique)]
    pub diversity: DiversityKind,
    #[arg(long = "topn", alias = "top-n", default_value_t = 10)]
    pub top_n: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub encoder: String,
    /// Declared encoder size, e.g. 22M or 7B.
    #[arg(long)]
    pub params: String,
    /// Score an existing topics file.
    #[arg(long, conflicts_with = "embeddings", required_unless_present = "embeddings")]
    pub topics: Option<PathBuf>,
    /// Run the embedding pipeline on this file.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Emit empty score cells instead of failing when the embedding file is absent.
    #[arg(long)]
    pub allow_missing: bool,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[command(flatten)]
    pub measure: MeasureFlags,
    #[arg(long, value_enum, default_value_t = DiversityKind::Unique)]
    pub diversity: DiversityKind,
    /// Label copied into the record's timestamp column.
    #[arg(long, default_value = "")]
    pub timestamp: String,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Record store; an existing record with the same key is replaced.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Record CSV written when every job has finished.
    #[arg(long)]
    pub out: PathBuf,
    /// Journal of finished jobs; `<out>.journal.jsonl` by default.
    #[arg(long)]
    pub journal: Option<PathBuf>,
    /// Worker threads (overrides the config).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Stop after N jobs, leaving the rest for a later run.
    #[arg(long, hide = true)]
    pub stop_after: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Per-encoder summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// `params,mean,std` coherence figure data.
    #[arg(long)]
    pub figure: Option<PathBuf>,
    /// `params,mean,std` diversity figure data.
    #[arg(long)]
    pub diversity_figure: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}
