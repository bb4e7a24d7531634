//! Effectiveness metrics, latency aggregation and the CSV exports
//! behind the per-term upper-bound and scored-fraction analyses.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::query::batch::BatchQuery;
use crate::tokenize::tokenize;

/// Relevance judgments: qid -> docid -> grade.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn grade(&self, qid: &str, docid: &str) -> u32 {
        self.judgments
            .get(qid)
            .and_then(|docs| docs.get(docid))
            .copied()
            .unwrap_or(0)
    }

    pub fn num_queries(&self) -> usize {
        self.judgments.len()
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// All grades judged for one query, highest first.
    fn grades_desc(&self, qid: &str) -> Vec<u32> {
        let mut grades: Vec<u32> = self
            .judgments
            .get(qid)
            .map(|docs| docs.values().copied().collect())
            .unwrap_or_default();
        grades.sort_unstable_by(|a, b| b.cmp(a));
        grades
    }
}

/// One run line's payload: ranked docids per query.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    rankings: BTreeMap<String, Vec<String>>,
}

impl Run {
    pub fn ranking(&self, qid: &str) -> &[String] {
        self.rankings.get(qid).map_or(&[], Vec::as_slice)
    }

    pub fn num_queries(&self) -> usize {
        self.rankings.len()
    }
}

/// Read TREC qrels: whitespace-separated `qid 0 docid grade`.
pub fn read_qrels(path: &Path) -> Result<Qrels> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut judgments: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                &file,
                lineno + 1,
                format!(
                    "expected 4 whitespace-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        let grade: u32 = fields[3].parse().map_err(|_| {
            Error::parse(
                &file,
                lineno + 1,
                format!("bad relevance grade {:?}", fields[3]),
            )
        })?;
        judgments
            .entry(fields[0].to_string())
            .or_default()
            .insert(fields[2].to_string(), grade);
    }
    Ok(Qrels { judgments })
}

/// Read a TREC run: `qid Q0 docid rank score tag`. Rankings are
/// re-sorted by the rank column, so permuted files evaluate the same.
pub fn read_run(path: &Path) -> Result<Run> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw: BTreeMap<String, Vec<(u32, String)>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                &file,
                lineno + 1,
                format!(
                    "expected 6 whitespace-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        let rank: u32 = fields[3]
            .parse()
            .map_err(|_| Error::parse(&file, lineno + 1, format!("bad rank {:?}", fields[3])))?;
        if fields[4].parse::<f64>().is_err() {
            return Err(Error::parse(
                &file,
                lineno + 1,
                format!("bad score {:?}", fields[4]),
            ));
        }
        raw.entry(fields[0].to_string())
            .or_default()
            .push((rank, fields[2].to_string()));
    }
    let mut rankings = BTreeMap::new();
    for (qid, mut docs) in raw {
        docs.sort_by_key(|d| d.0);
        rankings.insert(qid, docs.into_iter().map(|(_, d)| d).collect());
    }
    Ok(Run { rankings })
}

/// Mean reciprocal rank at depth 10: per query, 1/r for the first
/// relevant (grade >= 1) document at rank r <= 10, else 0; averaged
/// over every query in the qrels, so queries missing from the run
/// count as 0.
pub fn rr_at_10(run: &Run, qrels: &Qrels) -> f64 {
    if qrels.num_queries() == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for qid in qrels.queries() {
        for (i, docid) in run.ranking(qid).iter().take(10).enumerate() {
            if qrels.grade(qid, docid) >= 1 {
                total += 1.0 / (i + 1) as f64;
                break;
            }
        }
    }
    total / qrels.num_queries() as f64
}

fn dcg(grades: impl Iterator<Item = u32>) -> f64 {
    grades
        .take(10)
        .enumerate()
        .map(|(i, g)| (2f64.powi(g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

/// Mean NDCG at depth 10 with exponential gains: DCG@10 over the run
/// normalized by the ideal DCG@10 from the qrels. Queries whose qrels
/// hold no relevant document are skipped; judged queries missing from
/// the run contribute 0.
pub fn ndcg_at_10(run: &Run, qrels: &Qrels) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for qid in qrels.queries() {
        let ideal = dcg(qrels.grades_desc(qid).into_iter());
        if ideal <= 0.0 {
            continue;
        }
        let gained = dcg(run.ranking(qid).iter().map(|d| qrels.grade(qid, d)));
        total += gained / ideal;
        counted += 1;
    }
    if counted == 0 {
        0.0
    } else {
        total / counted as f64
    }
}

/// Latency aggregate over one batch, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub n: usize,
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * sorted.len() as f64).ceil() as usize;
    sorted[idx.clamp(1, sorted.len()) - 1]
}

/// Mean plus nearest-rank median and 99th percentile.
pub fn latency_summary(samples_ms: &[f64]) -> Result<LatencySummary> {
    if samples_ms.is_empty() {
        return Err(Error::EmptyLatencySamples);
    }
    let mut sorted = samples_ms.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latencies are finite"));
    Ok(LatencySummary {
        mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median_ms: nearest_rank(&sorted, 0.5),
        p99_ms: nearest_rank(&sorted, 0.99),
        n: sorted.len(),
    })
}

/// Read `qid<TAB>latency_us` samples, converting to milliseconds.
pub fn read_latency_file(path: &Path) -> Result<Vec<f64>> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((_, us)) = line.split_once('\t') else {
            return Err(Error::parse(
                &file,
                lineno + 1,
                "expected qid<TAB>latency_us",
            ));
        };
        let us: u64 = us
            .parse()
            .map_err(|_| Error::parse(&file, lineno + 1, format!("bad latency {us:?}")))?;
        samples.push(us as f64 / 1000.0);
    }
    Ok(samples)
}

/// The evaluation report the CLI prints as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub rr_at_10: f64,
    pub ndcg_at_10: f64,
    pub latency: LatencySummary,
    pub n_queries: usize,
}

/// One row of the per-query stats CSV written by a batch run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsRow {
    pub qid: String,
    pub documents_scored: u64,
    pub documents_matching: u64,
    pub postings_visited: u64,
    pub latency_us: u64,
}

/// Read a stats CSV back (header required).
pub fn read_stats_csv(path: &Path) -> Result<Vec<StatsRow>> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "qid,documents_scored,documents_matching,postings_visited,latency_us" {
                return Err(Error::parse(&file, 1, "unrecognized stats header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                &file,
                lineno + 1,
                format!("expected 5 comma-separated fields, got {}", fields.len()),
            ));
        }
        let num = |idx: usize| -> Result<u64> {
            fields[idx].parse().map_err(|_| {
                Error::parse(&file, lineno + 1, format!("bad number {:?}", fields[idx]))
            })
        };
        rows.push(StatsRow {
            qid: fields[0].to_string(),
            documents_scored: num(1)?,
            documents_matching: num(2)?,
            postings_visited: num(3)?,
            latency_us: num(4)?,
        });
    }
    Ok(rows)
}

/// CSV of list-wise upper bounds per (query, known term): both
/// channels' maxima as pruning sees them.
pub fn export_upper_bound_distribution(queries: &[BatchQuery], index: &Index) -> String {
    let mut out = String::from("qid,term,channel,max_impact\n");
    for query in queries {
        let mut seen = Vec::new();
        for token in tokenize(&query.text) {
            if seen.contains(&token) {
                continue;
            }
            if let Some(entry) = index.lexicon.get(&token) {
                out.push_str(&format!(
                    "{},{},primary,{}\n",
                    query.qid, token, entry.max_primary
                ));
                out.push_str(&format!(
                    "{},{},learned,{}\n",
                    query.qid, token, entry.max_learned
                ));
            }
            seen.push(token);
        }
    }
    out
}

/// CSV of per-query scored fractions (documents scored over documents
/// matching) with a final mean row.
pub fn export_scored_fraction(rows: &[StatsRow]) -> String {
    let mut out = String::from("qid,scored_fraction\n");
    let mut total = 0.0;
    for row in rows {
        let fraction = if row.documents_matching == 0 {
            0.0
        } else {
            row.documents_scored as f64 / row.documents_matching as f64
        };
        total += fraction;
        out.push_str(&format!("{},{:.6}\n", row.qid, fraction));
    }
    let mean = if rows.is_empty() {
        0.0
    } else {
        total / rows.len() as f64
    };
    out.push_str(&format!("ALL,{mean:.6}\n"));
    out
}

/// Mean scored fraction of a batch, as the export's ALL row computes it.
pub fn mean_scored_fraction(rows: &[StatsRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let total: f64 = rows
        .iter()
        .map(|row| {
            if row.documents_matching == 0 {
                0.0
            } else {
                row.documents_scored as f64 / row.documents_matching as f64
            }
        })
        .sum();
    total / rows.len() as f64
}
