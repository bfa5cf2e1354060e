//! Command-line pipeline for building and evaluating VFC corpora.
//!
//! Every command reads record or prediction files, invokes the library,
//! writes its outputs atomically, and drops a manifest (inputs,
//! configuration, versions, counts) beside them. Exit codes: 0 on
//! success, 1 on data errors, 2 on configuration errors.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    Config(String),
    /// Broken input data or I/O failure; exit code 1.
    Data(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "vfc",
    version,
    about = "Build analysis-ready vulnerability-fixing-commit corpora: \
             parse and enrich diffs, enforce token budgets, dedup, split, \
             and score classifier outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a raw record file into the canonical line-delimited form.
    Ingest(IngestArgs),
    /// Merge duplicate records (exact key and/or semantic fingerprint).
    Dedup(DedupArgs),
    /// Keep records matching all given criteria.
    Filter(FilterArgs),
    /// Assign records to train/val/test.
    Split(SplitArgs),
    /// Produce semantically enriched diff representations.
    Enrich(EnrichArgs),
    /// Enforce a token budget on diffs or enriched diffs.
    Truncate(TruncateArgs),
    /// Per-line-type token statistics of a record file.
    Stats(StatsArgs),
    /// Score external classifier predictions (F1, PD-S).
    Eval(EvalArgs),
    /// Sliding-window temporal diagnostics over a record file.
    TemporalScan(TemporalScanArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Input record file (line-delimited JSON).
    #[arg(short, long)]
    input: PathBuf,
    /// Output path for normalized records.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DedupArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// exact | semantic | both
    #[arg(long, default_value = "both")]
    strategy: String,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Comma-separated language tags (e.g. c,cpp).
    #[arg(long)]
    languages: Option<String>,
    /// Comma-separated label sources: manual,advisory,tool,synthetic.
    #[arg(long)]
    label_sources: Option<String>,
    /// Comma-separated source dataset names.
    #[arg(long)]
    sources: Option<String>,
    /// Keep records with timestamp >= this epoch second.
    #[arg(long)]
    after: Option<i64>,
    /// Keep records with timestamp < this epoch second.
    #[arg(long)]
    before: Option<i64>,
    /// Require (true) or forbid (false) CVE ids.
    #[arg(long)]
    has_cve: Option<bool>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Output assignment table (record id -> split).
    #[arg(short, long)]
    output: PathBuf,
    /// random | temporal | group | cve
    #[arg(long)]
    strategy: String,
    /// Train,val,test fractions.
    #[arg(long, default_value = "0.6,0.2,0.2")]
    fractions: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target vulnerability ratio for the cve strategy (defaults to the
    /// corpus ratio).
    #[arg(long)]
    vuln_ratio: Option<f64>,
    /// Fork/mirror mapping: a JSON object from repository name to group
    /// id, applied to records without an explicit group.
    #[arg(long)]
    group_map: Option<PathBuf>,
}

#[derive(Args)]
struct EnrichArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// cf | df1 | df2
    #[arg(long, default_value = "df1")]
    level: String,
    /// Snapshot file-cache directory (overridden by VFC_SNAPSHOT_STORE).
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Local git clone root (overridden by VFC_GIT_STORE).
    #[arg(long)]
    git: Option<PathBuf>,
    /// Context width for the regenerated comment-stripped diff.
    #[arg(long, default_value_t = 3)]
    context: usize,
    /// Include the full enclosure chain, not only the innermost construct.
    #[arg(long)]
    full_chain: bool,
    /// Also embed the rendered text form of each enriched diff.
    #[arg(long)]
    emit_text: bool,
    /// Worker threads (input order is preserved regardless).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct TruncateArgs {
    /// Input records, enriched or plain.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Token budget.
    #[arg(long)]
    limit: usize,
    /// builtin | vocab:<path>
    #[arg(long, default_value = "builtin")]
    tokenizer: String,
    /// context-aware | naive
    #[arg(long, default_value = "context-aware")]
    strategy: String,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Optional JSON report path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// builtin | vocab:<path>
    #[arg(long, default_value = "builtin")]
    tokenizer: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Prediction file: one {id, score, label} object per line.
    #[arg(short, long)]
    predictions: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Decision threshold for the F1 report.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// FPR budget for PD-S.
    #[arg(long, default_value_t = 0.005)]
    r: f64,
}

#[derive(Args)]
struct TemporalScanArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Train,val,test window fractions.
    #[arg(long, default_value = "0.2,0.2,0.2")]
    window: String,
    #[arg(long, default_value_t = 0.05)]
    stride: f64,
    /// Optional externally supplied scores: {offset, f1} per line, merged
    /// into the diagnostics by nearest offset.
    #[arg(long)]
    scores: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Dedup(args) => commands::dedup(args),
        Command::Filter(args) => commands::filter(args),
        Command::Split(args) => commands::split(args),
        Command::Enrich(args) => commands::enrich(args),
        Command::Truncate(args) => commands::truncate(args),
        Command::Stats(args) => commands::stats(args),
        Command::Eval(args) => commands::eval(args),
        Command::TemporalScan(args) => commands::temporal_scan(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
