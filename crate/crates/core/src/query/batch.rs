//! Batch execution: run a query file under one strategy and emit TREC
//! runs, per-query statistics and latency samples.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::query::{
    exhaustive_daat, guided_traversal, maxscore, parse_query, Channel, QueryResult,
};

/// Everything the CLI exposes through `--strategy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// MaxScore over the primary channel.
    Bm25,
    /// MaxScore over the learned channel.
    Learned,
    /// Guided traversal; the learned-rule secondary is the run.
    Gt,
    /// Guided traversal with interpolation; the interpolated secondary
    /// is the run.
    Gti,
    ExhaustivePrimary,
    ExhaustiveLearned,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Bm25,
        Strategy::Learned,
        Strategy::Gt,
        Strategy::Gti,
        Strategy::ExhaustivePrimary,
        Strategy::ExhaustiveLearned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Bm25 => "bm25",
            Strategy::Learned => "learned",
            Strategy::Gt => "gt",
            Strategy::Gti => "gti",
            Strategy::ExhaustivePrimary => "exhaustive-primary",
            Strategy::ExhaustiveLearned => "exhaustive-learned",
        }
    }

    /// Whether this strategy also produces a primary-side result
    /// distinct from the emitted run.
    pub fn is_guided(self) -> bool {
        matches!(self, Strategy::Gt | Strategy::Gti)
    }
}

/// One query as read from the query file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchQuery {
    pub qid: String,
    pub text: String,
}

/// Per-query outcome of a batch run.
#[derive(Debug, Clone)]
pub struct BatchRecord {
    pub qid: String,
    /// The result the run file is written from.
    pub result: QueryResult,
    /// The BM25-side result, present for guided strategies.
    pub primary: Option<QueryResult>,
}

/// Read a TSV query file: `qid<TAB>query text` per line.
pub fn read_queries(path: &Path) -> Result<Vec<BatchQuery>> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut queries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((qid, body)) = line.split_once('\t') else {
            return Err(Error::parse(
                &file,
                lineno + 1,
                "expected qid<TAB>query text",
            ));
        };
        if qid.is_empty() {
            return Err(Error::parse(&file, lineno + 1, "empty query id"));
        }
        queries.push(BatchQuery {
            qid: qid.to_string(),
            text: body.to_string(),
        });
    }
    Ok(queries)
}

fn execute_one(index: &Index, query: &BatchQuery, strategy: Strategy, k: usize) -> BatchRecord {
    let terms = parse_query(&query.text, &index.lexicon);
    let (result, primary) = match strategy {
        Strategy::Bm25 => (maxscore(index, &terms, k, Channel::Primary), None),
        Strategy::Learned => (maxscore(index, &terms, k, Channel::Learned), None),
        Strategy::ExhaustivePrimary => (exhaustive_daat(index, &terms, k, Channel::Primary), None),
        Strategy::ExhaustiveLearned => (exhaustive_daat(index, &terms, k, Channel::Learned), None),
        Strategy::Gt | Strategy::Gti => {
            let guided = guided_traversal(index, &terms, k, strategy == Strategy::Gti);
            (guided.secondary, Some(guided.primary))
        }
    };
    BatchRecord {
        qid: query.qid.clone(),
        result,
        primary,
    }
}

/// Run all queries under one strategy. With `threads > 1` queries are
/// distributed over worker threads; results always come back in input
/// order, so output files do not depend on scheduling.
pub fn run_batch(
    index: &Index,
    queries: &[BatchQuery],
    strategy: Strategy,
    k: usize,
    threads: usize,
) -> Vec<BatchRecord> {
    let threads = threads.max(1).min(queries.len().max(1));
    if threads == 1 {
        return queries
            .iter()
            .map(|q| execute_one(index, q, strategy, k))
            .collect();
    }
    let slots: Mutex<Vec<Option<BatchRecord>>> = Mutex::new(vec![None; queries.len()]);
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= queries.len() {
                    break;
                }
                let record = execute_one(index, &queries[i], strategy, k);
                slots.lock().unwrap()[i] = Some(record);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every query slot is filled"))
        .collect()
}

fn format_run(records: &[BatchRecord], index: &Index, tag: &str, primary_side: bool) -> String {
    let mut out = String::new();
    for record in records {
        let result = if primary_side {
            record
                .primary
                .as_ref()
                .expect("primary side requested from a guided run")
        } else {
            &record.result
        };
        for (rank, &(docid, score)) in result.ranked.iter().enumerate() {
            out.push_str(&format!(
                "{} Q0 {} {} {} {}\n",
                record.qid,
                index.external_docid(docid),
                rank + 1,
                score,
                tag
            ));
        }
    }
    out
}

/// Write a TREC run file: `qid Q0 external_docid rank score tag`,
/// ranks from 1, integer scores.
pub fn write_run_file(
    path: &Path,
    records: &[BatchRecord],
    index: &Index,
    tag: &str,
) -> Result<()> {
    fs::write(path, format_run(records, index, tag, false)).map_err(|e| Error::io(path, e))
}

/// Write the BM25-side run of a guided batch.
pub fn write_primary_run_file(
    path: &Path,
    records: &[BatchRecord],
    index: &Index,
    tag: &str,
) -> Result<()> {
    fs::write(path, format_run(records, index, tag, true)).map_err(|e| Error::io(path, e))
}

/// Write per-query counters as CSV.
pub fn write_stats_csv(path: &Path, records: &[BatchRecord]) -> Result<()> {
    let mut out =
        String::from("qid,documents_scored,documents_matching,postings_visited,latency_us\n");
    for r in records {
        let s = r.result.stats;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.qid,
            s.documents_scored,
            s.documents_matching,
            s.postings_visited,
            r.result.latency_us
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write one `qid<TAB>latency_us` line per query.
pub fn write_latency_file(path: &Path, records: &[BatchRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!("{}\t{}\n", r.qid, r.result.latency_us));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
