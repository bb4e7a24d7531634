//! `duet` — build, query, evaluate, inspect and synthesize workloads
//! for the dual-channel impact index.
//!
//! Exit codes: 0 on success, 1 on runtime failure (malformed files,
//! corrupt index), 2 on usage errors (bad flags, missing inputs).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use duet_core::builder::{self, BuildParams};
use duet_core::eval;
use duet_core::index::{load_index, write_index};
use duet_core::query::batch::{
    read_queries, run_batch, write_latency_file, write_primary_run_file, write_run_file,
    write_stats_csv, Strategy,
};
use duet_core::query::parse_query;
use duet_core::scoring::Bm25Params;
use duet_core::synth::{self, SynthConfig};
use duet_core::tokenize::tokenize;

#[derive(Parser)]
#[command(name = "duet", version, about = "Dual-channel impact retrieval engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a TSV collection and a learned-impact file.
    Build(BuildArgs),
    /// Run a query batch against an index.
    Query(QueryArgs),
    /// Score a run file against qrels and a latency file.
    Evaluate(EvaluateArgs),
    /// Print index statistics, optionally with query-set summaries.
    Stats(StatsArgs),
    /// Generate a seeded synthetic collection, impacts, queries and qrels.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// TSV collection: one `docid<TAB>text` line per document.
    #[arg(long)]
    collection: PathBuf,
    /// JSON Lines learned impacts; omitted or missing file leaves the
    /// learned channel all-zero.
    #[arg(long)]
    impacts: Option<PathBuf>,
    /// Output index directory.
    #[arg(long)]
    out: PathBuf,
    /// BM25 k1.
    #[arg(long, default_value_t = Bm25Params::default().k1)]
    k1: f64,
    /// BM25 b.
    #[arg(long, default_value_t = Bm25Params::default().b)]
    b: f64,
}

#[derive(Args)]
struct QueryArgs {
    /// Index directory.
    #[arg(long)]
    index: PathBuf,
    /// TSV queries: one `qid<TAB>text` line per query.
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Results per query.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Worker threads; 1 preserves single-threaded measurement.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// TREC run file to write.
    #[arg(long)]
    run_out: PathBuf,
    /// Per-query traversal statistics CSV.
    #[arg(long)]
    stats_out: Option<PathBuf>,
    /// Per-query latency samples (`qid<TAB>latency_us`).
    #[arg(long)]
    latency_out: Option<PathBuf>,
    /// For guided strategies, also write the primary-side run next to
    /// the main one (`<run-out>.primary`).
    #[arg(long)]
    emit_primary: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// TREC run file.
    #[arg(long)]
    run: PathBuf,
    /// Relevance judgments (`qid 0 docid grade`).
    #[arg(long)]
    qrels: PathBuf,
    /// Latency samples written by `query`.
    #[arg(long)]
    latency: PathBuf,
    /// Traversal statistics CSV written by `query`; required for
    /// --scored-fraction-out.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the per-query scored-fraction CSV here.
    #[arg(long, requires = "stats")]
    scored_fraction_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Index directory.
    #[arg(long)]
    index: PathBuf,
    /// Optional query set to summarize against the lexicon.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Write per-query, per-term upper bounds here; needs --queries.
    #[arg(long, requires = "queries")]
    upper_bounds_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    docs: usize,
    #[arg(long, default_value_t = SynthConfig::default().vocab_size)]
    vocab: usize,
    #[arg(long, default_value_t = SynthConfig::default().num_queries)]
    queries: usize,
    #[arg(long, default_value_t = SynthConfig::default().avg_doc_len)]
    avg_doc_len: usize,
    #[arg(long, default_value_t = SynthConfig::default().query_len)]
    query_len: usize,
    /// Directory for collection.tsv, impacts.jsonl, queries.tsv and
    /// qrels.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Bm25,
    Learned,
    Gt,
    Gti,
    ExhaustivePrimary,
    ExhaustiveLearned,
}

impl From<StrategyArg> for Strategy {
    fn from(arg: StrategyArg) -> Strategy {
        match arg {
            StrategyArg::Bm25 => Strategy::Bm25,
            StrategyArg::Learned => Strategy::Learned,
            StrategyArg::Gt => Strategy::Gt,
            StrategyArg::Gti => Strategy::Gti,
            StrategyArg::ExhaustivePrimary => Strategy::ExhaustivePrimary,
            StrategyArg::ExhaustiveLearned => Strategy::ExhaustiveLearned,
        }
    }
}

/// Errors split by exit code: usage problems (2) versus failures while
/// doing the work (1).
enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<duet_core::Error> for CliError {
    fn from(err: duet_core::Error) -> Self {
        CliError::Runtime(err.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Runtime(err)
    }
}

type CliResult = Result<(), CliError>;

/// Inputs are usage errors until proven readable; everything after
/// that is the command's own fault.
fn require_readable(path: &Path, what: &str) -> CliResult {
    if let Err(e) = fs::File::open(path) {
        return Err(CliError::Usage(anyhow!(
            "{what} {} is not readable: {e}",
            path.display()
        )));
    }
    Ok(())
}

fn require_index_dir(path: &Path) -> CliResult {
    if !path.join("metadata.json").is_file() {
        return Err(CliError::Usage(anyhow!(
            "{} does not look like an index directory (no metadata.json)",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_build(args: &BuildArgs) -> CliResult {
    require_readable(&args.collection, "collection")?;
    let bm25 = Bm25Params::new(args.k1, args.b)
        .map_err(|e| CliError::Usage(anyhow!("invalid BM25 parameters: {e}")))?;

    let docs = builder::read_collection(&args.collection)?;
    let records = match &args.impacts {
        Some(path) if path.is_file() => builder::read_impacts(path)?,
        Some(path) => {
            eprintln!(
                "warning: impacts file {} not found; learned channel will be all-zero",
                path.display()
            );
            Vec::new()
        }
        None => {
            eprintln!("warning: no impacts file given; learned channel will be all-zero");
            Vec::new()
        }
    };

    let params = BuildParams {
        bm25,
        ..BuildParams::default()
    };
    let (index, report) = builder::build(&docs, &records, &params)?;
    write_index(&index, &args.out)?;
    let json = serde_json::to_string_pretty(&report).context("serializing build report")?;
    println!("{json}");
    Ok(())
}

fn cmd_query(args: &QueryArgs) -> CliResult {
    require_index_dir(&args.index)?;
    require_readable(&args.queries, "queries")?;
    let strategy: Strategy = args.strategy.into();
    if args.emit_primary && !strategy.is_guided() {
        return Err(CliError::Usage(anyhow!(
            "--emit-primary only applies to guided strategies (gt, gti), not {}",
            strategy.name()
        )));
    }

    let index = load_index(&args.index)?;
    let queries = read_queries(&args.queries)?;
    let records = run_batch(&index, &queries, strategy, args.k as usize, args.threads);

    write_run_file(&args.run_out, &records, &index, strategy.name())?;
    if args.emit_primary {
        let mut primary_out = args.run_out.clone().into_os_string();
        primary_out.push(".primary");
        let tag = format!("{}-primary", strategy.name());
        write_primary_run_file(&PathBuf::from(primary_out), &records, &index, &tag)?;
    }
    if let Some(path) = &args.stats_out {
        write_stats_csv(path, &records)?;
    }
    if let Some(path) = &args.latency_out {
        write_latency_file(path, &records)?;
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> CliResult {
    require_readable(&args.run, "run")?;
    require_readable(&args.qrels, "qrels")?;
    require_readable(&args.latency, "latency")?;

    let run = eval::read_run(&args.run)?;
    let qrels = eval::read_qrels(&args.qrels)?;
    let samples = eval::read_latency_file(&args.latency)?;
    let report = eval::MetricReport {
        rr_at_10: eval::rr_at_10(&run, &qrels),
        ndcg_at_10: eval::ndcg_at_10(&run, &qrels),
        latency: eval::latency_summary(&samples)?,
        n_queries: qrels.num_queries(),
    };

    if let Some(out) = &args.scored_fraction_out {
        let stats_path = args.stats.as_ref().expect("clap enforces --stats");
        require_readable(stats_path, "stats")?;
        let rows = eval::read_stats_csv(stats_path)?;
        fs::write(out, eval::export_scored_fraction(&rows))
            .with_context(|| format!("writing {}", out.display()))?;
    }

    let json = serde_json::to_string_pretty(&report).context("serializing metric report")?;
    println!("{json}");
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> CliResult {
    require_index_dir(&args.index)?;
    let index = load_index(&args.index)?;

    let mut report = serde_json::json!({
        "documents": index.num_docs(),
        "terms": index.num_terms(),
        "postings": index.num_postings(),
        "avg_doclen": index.metadata.avg_doclen,
        "primary_quant_max": index.metadata.primary_quant_max,
        "learned_quant_max": index.metadata.learned_quant_max,
        "block_size": index.metadata.block_size,
    });

    if let Some(path) = &args.queries {
        require_readable(path, "queries")?;
        let queries = read_queries(path)?;
        let (mut tokens, mut known) = (0usize, 0usize);
        for query in &queries {
            tokens += tokenize(&query.text).len();
            known += parse_query(&query.text, &index.lexicon).len();
        }
        let denom = queries.len().max(1) as f64;
        report["queries"] = serde_json::json!({
            "count": queries.len(),
            "avg_terms": tokens as f64 / denom,
            "avg_known_terms": known as f64 / denom,
        });
        if let Some(out) = &args.upper_bounds_out {
            fs::write(out, eval::export_upper_bound_distribution(&queries, &index))
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }

    let json = serde_json::to_string_pretty(&report).context("serializing index stats")?;
    println!("{json}");
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CliResult {
    let config = SynthConfig {
        seed: args.seed,
        num_docs: args.docs,
        vocab_size: args.vocab,
        num_queries: args.queries,
        avg_doc_len: args.avg_doc_len,
        query_len: args.query_len,
        ..SynthConfig::default()
    };
    let output = synth::generate(&config)
        .map_err(|e| CliError::Usage(anyhow!("invalid synthetic workload: {e}")))?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let write = |name: &str, body: &str| -> CliResult {
        let path = args.out_dir.join(name);
        fs::write(&path, body)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::Runtime)
    };
    write("collection.tsv", &output.collection_tsv)?;
    write("impacts.jsonl", &output.impacts_jsonl)?;
    write("queries.tsv", &output.queries_tsv)?;
    write("qrels.txt", &output.qrels_txt)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Query(args) => cmd_query(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
