//! The `skewjoin` command line.
//!
//! Every subcommand reads and writes JSON (CSV for `compare`), and output
//! files are replaced atomically. Exit status is 0 on success, 2 on a usage
//! error and 1 on any other failure.

mod commands;
mod config;
mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{default_prpd_threshold, ExperimentConfig, RelationSpec};
pub use pipeline::{compare_strategies, run_experiment, ComparisonRow, ExperimentOutputs};

use crate::data::Distribution;
use crate::planner::Strategy;

#[derive(Debug, Parser)]
#[command(
    name = "skewjoin",
    version,
    about = "Join product skew: selectivity, frequency classes, HJPS and a shared-nothing join simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a value histogram.
    Gen(GenArgs),
    /// Expand a histogram into a binary relation file.
    Materialize(MaterializeArgs),
    /// Build a partition plan from two histograms.
    Plan(PlanArgs),
    /// Execute a plan over two relation files.
    Simulate(SimulateArgs),
    /// Chain-join selectivity and cardinality.
    Chain(ChainArgs),
    /// Frequency classes, frequency tree and class assignment.
    Classes(ClassesArgs),
    /// Run several strategies on one instance and tabulate skew metrics.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub domain: u32,
    #[arg(long)]
    pub tuples: u64,
    /// uniform, zipf:THETA or weights:W1,W2,...
    #[arg(long, default_value = "uniform")]
    pub dist: Distribution,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaterializeArgs {
    #[arg(long)]
    pub hist: PathBuf,
    #[arg(long, default_value = "R")]
    pub name: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub strategy: Strategy,
    #[arg(long)]
    pub procs: usize,
    /// Histogram JSON of R.
    #[arg(long)]
    pub r: PathBuf,
    /// Histogram JSON of S.
    #[arg(long)]
    pub s: PathBuf,
    /// HJPS: values with pn >= this are skewed.
    #[arg(long, default_value = "2")]
    pub skew_threshold: String,
    /// PRPD: relative-frequency cutoff, default 1/procs.
    #[arg(long)]
    pub prpd_threshold: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Binary relation file of R.
    #[arg(long)]
    pub r: PathBuf,
    /// Binary relation file of S.
    #[arg(long)]
    pub s: PathBuf,
    /// Check the output against the nested-loop join; exit 1 on mismatch.
    #[arg(long)]
    pub verify: bool,
    /// Skip the output digest (load counts only).
    #[arg(long, conflicts_with = "verify")]
    pub no_digest: bool,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Also count the chain join by nested loops (independent chains only).
    #[arg(long)]
    pub brute_force: bool,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ClassModeArg {
    Exact,
    Product,
    Range,
    Fk,
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    #[arg(long, value_enum, default_value = "product")]
    pub mode: ClassModeArg,
    /// Histogram of R (the key side in fk mode).
    #[arg(long)]
    pub r: PathBuf,
    /// Histogram of S; exact mode falls back to R when absent.
    #[arg(long)]
    pub s: Option<PathBuf>,
    /// Range mode: ascending boundaries, e.g. 0,1/100,1.
    #[arg(long, value_delimiter = ',')]
    pub boundaries: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub procs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Experiment config JSON; runs the whole pipeline and writes every
    /// intermediate file into --out-dir.
    #[arg(long, conflicts_with_all = ["r", "s"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, requires = "s")]
    pub r: Option<PathBuf>,
    #[arg(long, requires = "r")]
    pub s: Option<PathBuf>,
    #[arg(long)]
    pub procs: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "hash,hjps,prpd")]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 1)]
    pub seed_r: u64,
    #[arg(long, default_value_t = 2)]
    pub seed_s: u64,
    #[arg(long, default_value = "2")]
    pub skew_threshold: String,
    #[arg(long)]
    pub prpd_threshold: Option<String>,
    #[arg(long)]
    pub verify: bool,
    /// Metrics CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
