use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mtprep", version, about = "Prepare and score Spanish-Aymara/Guarani/Quechua parallel data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a monolingual file or a parallel pair of files.
    Normalize(NormalizeArgs),
    /// Drop noisy pairs and write a JSON Lines decision log.
    Filter(FilterArgs),
    /// Compare raw and filtered corpora and report statistics.
    Stats(StatsArgs),
    /// Merge synthetic pairs and dictionary entries into a train split.
    Augment(AugmentArgs),
    /// chrF++ of hypotheses against references.
    Score(ScoreArgs),
    /// Run normalize, filter, augment and stats from a JSON config.
    Pipeline(PipelineArgs),
}

/// Language pair and split shared by the corpus-level commands.
#[derive(Debug, Args)]
pub struct PairArgs {
    /// Source-side language code.
    #[arg(long, default_value = "es")]
    pub src_lang: String,
    /// Target-side language code (gn, quy, aym).
    #[arg(long = "lang")]
    pub tgt_lang: String,
    #[arg(long, default_value = "train")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Language of --input; in parallel mode, the target-side language.
    #[arg(long)]
    pub lang: String,
    #[arg(long, requires = "output", conflicts_with_all = ["src", "tgt"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Parallel mode: source-side file.
    #[arg(long, requires_all = ["tgt", "out_src", "out_tgt"])]
    pub src: Option<PathBuf>,
    /// Parallel mode: target-side file.
    #[arg(long, requires = "src")]
    pub tgt: Option<PathBuf>,
    #[arg(long)]
    pub out_src: Option<PathBuf>,
    #[arg(long)]
    pub out_tgt: Option<PathBuf>,
    #[arg(long, default_value = "es")]
    pub src_lang: String,
    /// Write one JSON record per rule application.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
    /// Decision log (JSON Lines).
    #[arg(long)]
    pub log: PathBuf,
    /// Provenance labels for the input, one per line.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    /// Provenance labels for the surviving pairs.
    #[arg(long)]
    pub out_provenance: Option<PathBuf>,
    /// Maximum target/source token-count ratio (and its inverse).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Minimum Jaccard overlap of digit runs.
    #[arg(long)]
    pub numeric_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub raw_src: PathBuf,
    #[arg(long)]
    pub raw_tgt: PathBuf,
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    /// Decision log from `filter`; identifies surviving pairs by id.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    /// Label for the setting column.
    #[arg(long, default_value = "base")]
    pub setting: String,
    /// JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Curated source-side file.
    #[arg(long)]
    pub src: PathBuf,
    /// Curated target-side file.
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    #[arg(long, requires = "synthetic_tgt", conflicts_with = "pivot")]
    pub synthetic_src: Option<PathBuf>,
    #[arg(long, requires = "synthetic_src")]
    pub synthetic_tgt: Option<PathBuf>,
    /// Source-side sentences to forward-translate.
    #[arg(long)]
    pub pivot: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mock")]
    pub backend: BackendKind,
    /// Sentences per backend request.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Two-column TSV lexicon.
    #[arg(long)]
    pub dict: Option<PathBuf>,
    /// Shuffle the merged corpus with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
    #[arg(long)]
    pub out_provenance: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendKind {
    Mock,
    Http,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Normalize both sides for this language before scoring.
    #[arg(long)]
    pub normalize_lang: Option<String>,
    /// Per-order n-gram statistics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub numeric_min: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}
