//! `robustqa`: rank basic questions, inject graded noise, evaluate a model.
//!
//! Exit codes are part of the interface:
//!
//! - 0: success (also `--help` / `--version`)
//! - 1: usage or configuration problem
//! - 2: an input file failed to parse or carried unusable data
//! - 3: the external model adapter failed
//! - 4: partial failure (some records skipped) under `--strict`
//!
//! Options resolve as command line over config file over built-in default.
//! All outputs are deterministic: rerunning a command on the same inputs
//! produces byte-identical files, whatever `--jobs` says.

mod commands;
mod config;
mod model;

use clap::{Args, Parser, Subcommand};
use robustqa_core::Error;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Core(err)
    }
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(err) => match err {
                Error::Adapter(_) => 3,
                Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::EmptyRecords
                | Error::MissingEmbedding { .. }
                | Error::DimensionMismatch { .. }
                | Error::MismatchedIdSets { .. }
                | Error::RankingDegenerate { .. }
                | Error::UndefinedRobustness => 2,
                _ => 1,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "robustqa",
    version,
    about = "Rank basic questions against main questions, append them as graded noise, \
             and score how robust a QA model is to that noise."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank a basic-question pool against each main question
    Rank(RankArgs),
    /// Append ranked basic questions to main questions as graded noise
    Noise(NoiseArgs),
    /// Evaluate a model on noisy questions and report robustness
    Eval(EvalArgs),
    /// Correlate rankings pairwise with Kendall tau
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct RankArgs {
    /// Main questions (JSONL)
    #[arg(long, value_name = "FILE")]
    pub mq: PathBuf,
    /// Basic-question pool (JSONL)
    #[arg(long, value_name = "FILE")]
    pub pool: PathBuf,
    /// Where to write the rankings (JSONL)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// key=value config file; command-line flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Ranking method: lasso, bleu1..bleu4, rouge, cider, meteor
    #[arg(long)]
    pub method: Option<String>,
    /// Ranked entries to keep per main question
    #[arg(long = "top-k", value_name = "N")]
    pub top_k: Option<usize>,
    /// LASSO penalty as a fraction of lambda_max, in (0, 1]
    #[arg(long = "lambda-ratio", value_name = "X")]
    pub lambda_ratio: Option<f64>,
    /// Pre-computed embeddings (TSV: id<TAB>values), lasso only
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Exit 4 if any main question cannot be ranked
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct NoiseArgs {
    /// Main questions (JSONL)
    #[arg(long, value_name = "FILE")]
    pub mq: PathBuf,
    /// Rankings produced by `rank` (JSONL)
    #[arg(long, value_name = "FILE")]
    pub ranked: PathBuf,
    /// Where to write the noisy questions (JSONL)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// key=value config file; command-line flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Basic questions appended per noise level
    #[arg(long = "group-size", value_name = "N")]
    pub group_size: Option<usize>,
    /// Deepest noise level (default: as deep as every ranking allows)
    #[arg(long, value_name = "N")]
    pub levels: Option<usize>,
    /// Exit 4 if any main question is skipped
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Main questions with gold answers (JSONL)
    #[arg(long, value_name = "FILE")]
    pub mq: PathBuf,
    /// Noisy questions produced by `noise`, including level 0 (JSONL)
    #[arg(long, value_name = "FILE")]
    pub noisy: PathBuf,
    /// key=value config file; command-line flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Model: cmd:<command...>, mock:constant:<answer>, mock:lookup:<file>,
    /// mock:prefix[:<file>], or mock:hash[:<seed>]
    #[arg(long, value_name = "MODEL")]
    pub model: Option<String>,
    /// Accuracy: vqa (consensus) or exact
    #[arg(long)]
    pub accuracy: Option<String>,
    /// Relative accuracy drop that zeroes the robustness score
    #[arg(long, value_name = "X")]
    pub tolerance: Option<f64>,
    /// Ranking method name to record in the report
    #[arg(long = "method-label", value_name = "NAME")]
    pub method_label: Option<String>,
    /// Where to write the JSON report
    #[arg(long = "report-json", value_name = "FILE")]
    pub report_json: Option<PathBuf>,
    /// Where to write the CSV report
    #[arg(long = "report-csv", value_name = "FILE")]
    pub report_csv: Option<PathBuf>,
    /// Exit 4 if any main question is skipped
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Rankings files (JSONL) to correlate pairwise
    #[arg(value_name = "FILE", required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    /// Where to write the correlation matrix (CSV)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Exit 4 if any main question cannot be compared
    #[arg(long)]
    pub strict: bool,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            err.print().ok();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Rank(args) => commands::cmd_rank(args),
        Command::Noise(args) => commands::cmd_noise(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Compare(args) => commands::cmd_compare(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
