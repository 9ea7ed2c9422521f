//! The `swarmsearch` command line: log preparation, training, offline
//! simulation, reporting, synthetic logs, experiment analytics and the
//! live service.

pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "swarmsearch", version, about = "Swarm-based adaptive result recommendation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    /// Keep every session.
    All,
    /// Frequent, easy or difficult queries.
    Union,
    Frequent,
    Easy,
    Difficult,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group an AOL-format log (plain or gzip) into query sessions (JSON lines).
    Sessionize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Inactivity gap, in seconds, that ends a session.
        #[arg(long, default_value_t = 1800)]
        threshold: i64,
        /// Drop rows identical to the previous one.
        #[arg(long)]
        dedup: bool,
    },
    /// Keep sessions of frequent, easy and/or difficult queries.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Subset::Union)]
        subset: Subset,
        /// Days the log covers; derived from the sessions when omitted.
        #[arg(long)]
        span_days: Option<u32>,
    },
    /// Label every query navigational or non-navigational.
    #[command(visible_alias = "classify")]
    ClassifyIntent {
        /// Sessions (JSON lines) whose queries are labelled.
        #[arg(long = "in", conflicts_with = "queries")]
        input: Option<PathBuf>,
        /// Plain list of queries, one per line.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// Output: query<TAB>label lines.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a trail store on the sessions before the configured partition.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        /// Run configuration (key=value lines).
        #[arg(long)]
        config: PathBuf,
        /// Trail snapshot (TSV).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        exam_table: Option<PathBuf>,
        /// Train on every session, ignoring the partition.
        #[arg(long)]
        all: bool,
    },
    /// Monte Carlo evaluation of one configuration or the 24-run preset matrix.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
        config: Option<PathBuf>,
        /// Run flavors x half-lives (day, week) x k (1, 3) x splits (Apr 1, May 1).
        #[arg(long)]
        matrix: bool,
        /// Pre-trained trail snapshot; skips training.
        #[arg(long, conflicts_with = "matrix")]
        store: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Intent labels for the navigational/non-navigational tables.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        exam_table: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Combine per-flavor outcomes into the nine report tables.
    Report {
        /// FLAVOR=OUTCOMES.jsonl; the first run supplies the baseline.
        #[arg(long = "run", required = true, value_parser = parse_run)]
        runs: Vec<(swarmsearch_core::pheromone::Flavor, PathBuf)>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,10")]
        cutoffs: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an AOL-format log from simulated users.
    Synth {
        #[arg(long, default_value_t = 200)]
        users: usize,
        #[arg(long, default_value_t = 7)]
        relevant_rank: usize,
        #[arg(long, default_value_t = 10)]
        page_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exam_table: Option<PathBuf>,
        #[arg(long, default_value = "synthetic query")]
        query: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// sessionize -> filter -> classify -> train/simulate every flavor -> report.
    Pipeline {
        #[arg(long)]
        log: PathBuf,
        /// Base run configuration; the flavor is varied over all three.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Subset::Union)]
        subset: Subset,
        #[command(flatten)]
        lexicon: LexiconArgs,
        #[arg(long)]
        exam_table: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the HTTP search service.
    Serve {
        /// Service configuration (key=value lines); SWARMSEARCH_* variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Correlations and query similarities from a controlled experiment.
    ///
    /// Input CSV header: order,group,task,trivial,seconds,queries where group
    /// is control|experimental and queries are joined by `|`.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the local search index for a directory of JSON-lines documents.
    Ingest {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LexiconArgs {
    /// Entity name list(s), one name per line.
    #[arg(long = "names")]
    pub names: Vec<PathBuf>,
    /// Domain suffix list; a built-in list is used when omitted.
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
}

fn parse_run(s: &str) -> std::result::Result<(swarmsearch_core::pheromone::Flavor, PathBuf), String> {
    let (flavor, path) = s.split_once('=').ok_or("expected FLAVOR=PATH")?;
    Ok((flavor.parse().map_err(|e: swarmsearch_core::Error| e.to_string())?, PathBuf::from(path)))
}

pub fn run(cli: Cli) -> Result<()> {
    commands::dispatch(cli.command)
}
