//! `zebra` — benchmark-derived behavior profiles and zero-annotation
//! preference binarization.
//!
//! Exit codes: 0 on success, 2 on validation or configuration errors,
//! 3 when a run produced an empty result. Verbosity is controlled by the
//! `ZEBRA_LOG` environment variable.

mod commands;
mod runinfo;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "zebra",
    version,
    about = "Behavior profiles from benchmark tables and zero-annotation preference binarization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build ability profiles and the MB-SIM matrix from a benchmark table
    Profile(ProfileArgs),
    /// Binarize a response pool into chosen/rejected pairs
    Binarize(BinarizeArgs),
    /// Convert an UltraFeedback-shaped export into the pool format
    ConvertUltrafeedback(ConvertArgs),
    /// Behavior-space diagnostics over profiles, pools, and pairs
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Statistical comparisons of evaluation runs
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Labeling-cost accounting
    Cost(CostArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Benchmark score table (CSV, or JSON by extension)
    #[arg(long)]
    benchmarks: PathBuf,
    /// Output profiles JSON
    #[arg(long)]
    out: PathBuf,
    /// Model to drop before normalization (repeatable)
    #[arg(long)]
    exclude: Vec<String>,
}

#[derive(Args)]
struct BinarizeArgs {
    /// Response pool (JSON Lines)
    #[arg(long)]
    pool: PathBuf,
    /// Profiles JSON produced by `profile`
    #[arg(long)]
    profiles: PathBuf,
    /// Anchoring strategy: sup, sim, or sup-sim
    #[arg(long)]
    strategy: String,
    /// Minimum MB-SIM for a pair to be eligible (sim and sup-sim)
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Hybrid weight on pair-mean MB-SUP (sup-sim)
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Exact MB-SUP tie handling: lexicographic or skip
    #[arg(long, default_value = "lexicographic")]
    tie_break: String,
    /// Anchor on the pool-wide top-two models (sup only)
    #[arg(long)]
    global_top2: bool,
    /// Abort on the first per-instruction error instead of logging it
    #[arg(long)]
    strict: bool,
    /// Seed recorded for the run (selection itself is deterministic)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output pairs JSONL
    #[arg(long)]
    out: PathBuf,
    /// Output run report JSON (default: report.json next to --out)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    /// UltraFeedback export (JSON Lines)
    #[arg(long)]
    input: PathBuf,
    /// Output pool JSONL
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Project model profiles onto their top two principal axes
    Pca(PcaArgs),
    /// Agglomerative clustering with a flat cut
    Cluster(ClusterArgs),
    /// TF-IDF response-similarity audit for one model pair
    Tfidf(TfidfArgs),
    /// Chosen/rejected frequencies over an emitted pair file
    Freq(FreqArgs),
}

#[derive(Args)]
struct PcaArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    profiles: PathBuf,
    /// Restrict to one benchmark category: knowledge, reasoning,
    /// instruction-following, or other
    #[arg(long)]
    category: Option<String>,
    /// Flat-cut distance threshold
    #[arg(long, default_value_t = 0.4)]
    cut: f64,
    /// Linkage: average, single, or complete
    #[arg(long, default_value = "average")]
    linkage: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TfidfArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    model_a: String,
    #[arg(long)]
    model_b: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FreqArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Paired t-test and sign-flip permutation test for two score files
    Compare(CompareArgs),
}

#[derive(Args)]
struct CompareArgs {
    /// First system's scores (CSV: id,score)
    #[arg(long)]
    a: PathBuf,
    /// Second system's scores (CSV: id,score)
    #[arg(long)]
    b: PathBuf,
    /// Number of permutation shuffles
    #[arg(long, default_value_t = 10_000)]
    permutations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional output JSON (result always prints to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Number of preference pairs
    #[arg(long)]
    pairs: u64,
    /// Annotation cost per pair in USD
    #[arg(long)]
    unit_cost: f64,
    /// Optional output JSON (report always prints to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the process exit code.
pub(crate) struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn empty_result(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<zebra_core::Error> for CliError {
    fn from(e: zebra_core::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

pub(crate) type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ZEBRA_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Profile(args) => commands::profile(args),
        Command::Binarize(args) => commands::binarize(args),
        Command::ConvertUltrafeedback(args) => commands::convert_ultrafeedback(args),
        Command::Analyze(AnalyzeCommand::Pca(args)) => commands::analyze_pca(args),
        Command::Analyze(AnalyzeCommand::Cluster(args)) => commands::analyze_cluster(args),
        Command::Analyze(AnalyzeCommand::Tfidf(args)) => commands::analyze_tfidf(args),
        Command::Analyze(AnalyzeCommand::Freq(args)) => commands::analyze_freq(args),
        Command::Stats(StatsCommand::Compare(args)) => commands::stats_compare(args),
        Command::Cost(args) => commands::cost(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zebra: error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
