//! Command-line front end for `simpkit`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or
//! contract error, 3 external simplifier error.

mod commands;
pub mod config;
mod human;
pub mod serve;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use simpkit::corpus::{CorpusFormat, SplitRatios};
use simpkit::{Error, ErrorKind};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "simpkit", version, about = "Controllable text simplification toolkit")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print errors to stderr as a JSON object.
    #[arg(long, global = true)]
    pub json_errors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Corpus file (PLABA-style JSON or TSV).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<CorpusFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    /// Parsed CoNLL-U trees.
    #[arg(long)]
    pub conllu: Option<PathBuf>,
    /// Sidecar mapping trees to (doc_id, sent_index, role).
    #[arg(long)]
    pub conllu_index: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Grid,
    Es,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricsArg {
    All,
    Sari,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded train/validation/test split; writes three TSVs and a manifest.
    Split {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Proportions such as 8:1:1.
        #[arg(long)]
        ratios: Option<SplitRatios>,
        #[arg(long)]
        seed: Option<u64>,
        /// Remove empty references and pairs left without any before splitting.
        #[arg(long)]
        drop_empty: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prefix sources with their four control tokens.
    AnnotateCt {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        stage: u8,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        trees: TreeArgs,
        #[arg(long)]
        frequency_table: Option<PathBuf>,
        /// Tagged TSV output.
        #[arg(long)]
        out: PathBuf,
        /// Manifest path; defaults to `<out>.manifest.json`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        max_error_rate: Option<f64>,
    },
    /// Score system outputs (one line per sentence pair) against references.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        metrics: MetricsArg,
        #[arg(long)]
        per_sentence: bool,
        /// JSON-lines token embeddings of the outputs.
        #[arg(long, requires = "embeddings_references")]
        embeddings_outputs: Option<PathBuf>,
        /// JSON-lines token embeddings of the references.
        #[arg(long, requires = "embeddings_outputs")]
        embeddings_references: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Search static DTD/WR/LV values on a validation set.
    Search {
        #[arg(long, value_enum)]
        strategy: Strategy,
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Simplifier settings as a JSON file.
        #[arg(long, conflicts_with = "builtin")]
        simplifier: Option<PathBuf>,
        /// Use an in-process mock: identity, truncate_to_lr or lexical_sub.
        #[arg(long)]
        builtin: Option<String>,
        /// Fixed LR value.
        #[arg(long, conflicts_with = "predictor")]
        lr: Option<f64>,
        /// Predict LR per sentence with this model.
        #[arg(long)]
        predictor: Option<PathBuf>,
        #[arg(long)]
        frequency_table: Option<PathBuf>,
        #[command(flatten)]
        trees: TreeArgs,
        #[arg(long, value_delimiter = ',')]
        dtd: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        wr: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lv: Option<Vec<f64>>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        max_evaluations: Option<usize>,
        /// Directory for search-log.jsonl and best.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the ridge LR predictor on a training corpus.
    FitLr {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        frequency_table: Option<PathBuf>,
        #[command(flatten)]
        trees: TreeArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict a bucketed LR for every source in a corpus.
    PredictLr {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        frequency_table: Option<PathBuf>,
        #[command(flatten)]
        trees: TreeArgs,
        /// TSV output (doc_id, sent_index, lr); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan which annotator rates which items.
    Assign {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
        /// The two compared system ids.
        #[arg(long, value_delimiter = ',')]
        systems: Option<Vec<String>>,
        #[arg(long)]
        load: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Likert means, pairwise kappa and alpha tables for a ratings file.
    Agreement {
        /// Ratings as .csv, .json or .jsonl.
        #[arg(long)]
        ratings: PathBuf,
        /// The two compared systems; inferred when the file has exactly two.
        #[arg(long, value_delimiter = ',')]
        systems: Option<Vec<String>>,
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a ratings JSON-lines file sorted, dropping a torn last line.
    CompactRatings {
        #[arg(long)]
        ratings: PathBuf,
    },
    /// Host the annotation API and static UI.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Directory holding plan.json, items.json and ratings.jsonl.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Config => 1,
        ErrorKind::Data => 2,
        ErrorKind::External => 3,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Config => "config",
        ErrorKind::Data => "data",
        ErrorKind::External => "external",
    }
}

fn report(err: &Error, json_errors: bool) -> i32 {
    let code = exit_code(err.kind());
    if json_errors {
        let body = json!({
            "error": {
                "kind": kind_name(err.kind()),
                "code": code,
                "message": err.to_string(),
            }
        });
        eprintln!("{body}");
    } else {
        eprintln!("error: {err}");
    }
    code
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json_errors = cli.json_errors;
    let result = cli
        .config
        .as_deref()
        .map(RunConfig::load)
        .transpose()
        .map(Option::unwrap_or_default)
        .and_then(|cfg| dispatch(cli.command, &cfg));
    match result {
        Ok(()) => 0,
        Err(e) => report(&e, json_errors),
    }
}

fn dispatch(command: Command, cfg: &RunConfig) -> simpkit::Result<()> {
    match command {
        Command::Split { corpus, ratios, seed, drop_empty, out } => {
            commands::split(cfg, &corpus, ratios, seed, drop_empty, &out)
        }
        Command::AnnotateCt { stage, corpus, trees, frequency_table, out, manifest, max_error_rate } => {
            commands::annotate(cfg, stage, &corpus, &trees, frequency_table, &out, manifest, max_error_rate)
        }
        Command::Evaluate {
            corpus,
            outputs,
            metrics,
            per_sentence,
            embeddings_outputs,
            embeddings_references,
            json,
        } => commands::evaluate(
            cfg,
            &corpus,
            &outputs,
            metrics,
            per_sentence,
            embeddings_outputs.zip(embeddings_references),
            json,
        ),
        Command::Search {
            strategy,
            corpus,
            simplifier,
            builtin,
            lr,
            predictor,
            frequency_table,
            trees,
            dtd,
            wr,
            lv,
            budget,
            lambda,
            seed,
            parallelism,
            max_evaluations,
            out,
        } => commands::search(
            cfg,
            commands::SearchArgs {
                strategy,
                corpus,
                simplifier,
                builtin,
                lr,
                predictor,
                frequency_table,
                trees,
                axes: [dtd, wr, lv],
                budget,
                lambda,
                seed,
                parallelism,
                max_evaluations,
                out,
            },
        ),
        Command::FitLr { corpus, frequency_table, trees, lambda, out } => {
            commands::fit_lr(cfg, &corpus, frequency_table, &trees, lambda, &out)
        }
        Command::PredictLr { model, corpus, frequency_table, trees, out } => {
            commands::predict_lr(cfg, model, &corpus, frequency_table, &trees, out)
        }
        Command::Assign { corpus, annotators, systems, load, seed, out } => {
            human::assign(cfg, &corpus, annotators, systems, load, seed, &out)
        }
        Command::Agreement { ratings, systems, json } => human::agreement(&ratings, systems, json),
        Command::CompactRatings { ratings } => human::compact(&ratings),
        Command::Serve { port, data_dir, static_dir } => serve::run(cfg, port, data_dir, static_dir),
    }
}
