//! Pipeline driver: vocab -> cooc -> embed -> eval / neighbors / infer,
//! plus a context-analysis grid runner.

mod config;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::FileConfig;
use hellvec::{CoocError, CorpusError, EvalError, InferError, ReduceError};

/// Errors grouped by exit code: 1 usage, 2 data, 3 numeric failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidScenario(_) | CorpusError::InvalidWindow(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CoocError> for CliError {
    fn from(e: CoocError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<InferError> for CliError {
    fn from(e: InferError) -> Self {
        match e {
            InferError::EmptyPhrase => CliError::Usage(e.to_string()),
            InferError::Corpus(inner) => inner.into(),
            InferError::ZeroVector => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReduceError> for CliError {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::InvalidDim { .. } | ReduceError::BadHyperparams(_) => {
                CliError::Usage(e.to_string())
            }
            ReduceError::Diverged { .. } | ReduceError::GramTooLarge { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hellvec",
    version,
    about = "Count-based word vectors under the Hellinger distance"
)]
struct Cli {
    /// key=value config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for reduction stages
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Single worker thread, bit-reproducible outputs
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// One sentence per line
    Lines,
    /// One document per file
    Docs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReducerArg {
    Pca,
    Slra,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Ws353,
    Rg65,
    Rw,
    Analogy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Auto,
    Tab,
    Comma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SymmetryArg {
    Sym,
    Asym,
    Both,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus files (repeatable)
    #[arg(long = "corpus")]
    corpus: Vec<PathBuf>,
    /// How documents are delimited
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Run the built-in tokenizer instead of splitting on whitespace
    #[arg(long)]
    tokenize: bool,
    /// Keep tokens as-is (no lowercasing, no digit folding)
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args)]
struct VocabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Keep words occurring at least this often
    #[arg(long)]
    min_count: Option<u64>,
    /// Vocabulary file to write
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoocArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Context dictionary: all | top:K | below:T | band:LO,HI | above:T
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    window_size: Option<usize>,
    #[arg(long)]
    symmetric: Option<bool>,
    /// Raw counts file to write
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the normalized sqrt-probability matrix here
    #[arg(long)]
    write_sqrt: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Co-occurrence file (raw counts or sqrt-probabilities)
    #[arg(long)]
    cooc: Option<PathBuf>,
    /// Scenario the co-occurrence file was counted under
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_enum)]
    reducer: Option<ReducerArg>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    final_learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    /// Accumulate the PCA covariance in f32 (demonstrates round-off loss)
    #[arg(long)]
    f32_covariance: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Dataset file (similarity pairs or Mikolov analogy questions)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dense embeddings in the text format
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Raw mode: co-occurrence or sqrt matrix file
    #[arg(long)]
    raw_cooc: Option<PathBuf>,
    /// Raw mode: vocabulary file
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
}

#[derive(Args)]
struct NeighborsArgs {
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    raw_cooc: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    encoder: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    window_size: Option<usize>,
    #[arg(long)]
    symmetric: Option<bool>,
    /// Phrase to infer (repeatable)
    #[arg(long = "phrase", required = true)]
    phrases: Vec<String>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Embeddings to search for nearest words
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    print_vector: bool,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Reuse an existing vocabulary instead of counting one
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Semicolon-separated scenario list, e.g. "top:1000;all;band:1e-6,1e-5"
    #[arg(long)]
    scenarios: Option<String>,
    /// Comma-separated window sizes, e.g. "1,5,10"
    #[arg(long)]
    window_sizes: Option<String>,
    #[arg(long, value_enum)]
    symmetry: Option<SymmetryArg>,
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the word dictionary from a corpus
    Vocab(VocabArgs),
    /// Count windowed co-occurrences against a context dictionary
    Cooc(CoocArgs),
    /// Reduce the sqrt-probability matrix to dense vectors
    Embed(EmbedArgs),
    /// Score embeddings or raw distributions on a benchmark
    Eval(EvalArgs),
    /// Nearest neighbors of a word
    Neighbors(NeighborsArgs),
    /// Infer vectors for unseen words or phrases
    Infer(InferArgs),
    /// Run the scenario x window experiment grid, emitting CSV
    Grid(GridArgs),
}

fn worker_count(deterministic: bool) -> usize {
    if deterministic {
        return 1;
    }
    std::env::var("HELLVEC_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let workers = worker_count(cli.deterministic);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .ok();
    let seed = config::resolve(cli.seed, cfg.get("seed"), 42)?;

    match cli.command {
        Command::Vocab(args) => ops::run_vocab(&cfg, args),
        Command::Cooc(args) => ops::run_cooc(&cfg, args, workers),
        Command::Embed(args) => ops::run_embed(&cfg, args, seed),
        Command::Eval(args) => ops::run_eval(&cfg, args),
        Command::Neighbors(args) => ops::run_neighbors(&cfg, args),
        Command::Infer(args) => ops::run_infer(&cfg, args),
        Command::Grid(args) => ops::run_grid(&cfg, args, workers),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; usage problems exit with 1
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
