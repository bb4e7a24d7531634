//! Index construction: collection ingestion, BM25 channel computation,
//! learned-impact ingestion and per-posting channel alignment.
//!
//! The two channels are built independently and then merged per term:
//! the posting list for a term covers the UNION of documents present
//! in either channel, with the missing channel's impact zero-filled.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{
    Index, IndexMetadata, Lexicon, LexiconEntry, PostingList, DEFAULT_BLOCK_SIZE, FORMAT_VERSION,
};
use crate::quantize::{quantize, PackedImpact};
use crate::scoring::{bm25_score, Bm25Params};
use crate::tokenize::tokenize;

/// One input document, as read from the collection file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub external_docid: String,
    pub text: String,
}

/// One learned-impact record: a document's term weights as produced by
/// an external model, consumed verbatim.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LearnedImpactRecord {
    #[serde(rename = "docid")]
    pub external_docid: String,
    #[serde(rename = "vector")]
    pub term_weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    pub bm25: Bm25Params,
    pub block_size: usize,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            bm25: Bm25Params::default(),
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

/// Counters reported after a build, serialized as the build report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub docs: u32,
    pub terms: u64,
    /// Materialized (union) postings across all lists.
    pub postings: u64,
    /// (term, doc) pairs present in the BM25 channel.
    pub primary_postings: u64,
    /// (term, doc) pairs present in the learned channel.
    pub learned_postings: u64,
    /// Learned records that overwrote an earlier weight for the same
    /// (term, doc); last occurrence wins.
    pub duplicate_learned_records: u64,
    /// Learned term keys discarded because they tokenize to anything
    /// other than exactly one term.
    pub dropped_learned_terms: u64,
}

/// Read a TSV collection: one `external_docid<TAB>text` line per document.
pub fn read_collection(path: &Path) -> Result<Vec<RawDocument>> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((docid, body)) = line.split_once('\t') else {
            return Err(Error::parse(&file, lineno + 1, "expected docid<TAB>text"));
        };
        if docid.is_empty() {
            return Err(Error::parse(&file, lineno + 1, "empty document id"));
        }
        docs.push(RawDocument {
            external_docid: docid.to_string(),
            text: body.to_string(),
        });
    }
    Ok(docs)
}

/// Read a JSON Lines learned-impact file:
/// `{"docid": "...", "vector": {"term": weight, ...}}` per line.
pub fn read_impacts(path: &Path) -> Result<Vec<LearnedImpactRecord>> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: LearnedImpactRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(&file, lineno + 1, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Primary-channel accumulator: per-term (docid, tf) postings plus the
/// collection statistics BM25 needs.
struct PrimaryChannel {
    /// term -> docid-ascending (docid, tf).
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    doc_lengths: Vec<u32>,
    avg_doclen: f64,
    doc_map: Vec<String>,
}

fn build_primary_channel(docs: &[RawDocument]) -> Result<PrimaryChannel> {
    if docs.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let mut seen: HashMap<&str, u32> = HashMap::with_capacity(docs.len());
    let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    let mut doc_lengths = Vec::with_capacity(docs.len());
    let mut doc_map = Vec::with_capacity(docs.len());
    for (docid, doc) in docs.iter().enumerate() {
        let docid = docid as u32;
        if seen.insert(&doc.external_docid, docid).is_some() {
            return Err(Error::DuplicateDocId(doc.external_docid.clone()));
        }
        let terms = tokenize(&doc.text);
        doc_lengths.push(terms.len() as u32);
        doc_map.push(doc.external_docid.clone());
        let mut tfs: HashMap<String, u32> = HashMap::new();
        for term in terms {
            *tfs.entry(term).or_insert(0) += 1;
        }
        // Document ids ascend across the loop, so each per-term vector
        // stays sorted without a final sort.
        for (term, tf) in tfs {
            postings.entry(term).or_default().push((docid, tf));
        }
    }
    let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
    Ok(PrimaryChannel {
        postings,
        avg_doclen: total as f64 / docs.len() as f64,
        doc_lengths,
        doc_map,
    })
}

/// Learned-channel accumulator: per-term docid -> raw weight.
struct LearnedChannel {
    /// term -> docid -> raw weight (last writer wins).
    weights: BTreeMap<String, BTreeMap<u32, f64>>,
    duplicates: u64,
    dropped_terms: u64,
}

fn ingest_learned_impacts(
    records: &[LearnedImpactRecord],
    docid_map: &HashMap<&str, u32>,
) -> Result<LearnedChannel> {
    let mut unknown: Vec<String> = Vec::new();
    for record in records {
        if !docid_map.contains_key(record.external_docid.as_str())
            && !unknown.contains(&record.external_docid)
        {
            unknown.push(record.external_docid.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownDocIds(unknown));
    }

    let mut weights: BTreeMap<String, BTreeMap<u32, f64>> = BTreeMap::new();
    let mut duplicates = 0u64;
    let mut dropped_terms = 0u64;
    for record in records {
        let docid = docid_map[record.external_docid.as_str()];
        for (key, &weight) in &record.term_weights {
            if !weight.is_finite() {
                return Err(Error::NonFiniteWeight {
                    docid: record.external_docid.clone(),
                    term: key.clone(),
                });
            }
            if weight < 0.0 {
                return Err(Error::NegativeWeight {
                    docid: record.external_docid.clone(),
                    term: key.clone(),
                    weight,
                });
            }
            // Re-tokenize the model's term key so both channels share
            // one vocabulary; keys that do not map to exactly one term
            // have no primary-channel counterpart and are dropped.
            let mut tokens = tokenize(key);
            if tokens.len() != 1 {
                dropped_terms += 1;
                continue;
            }
            let term = tokens.pop().unwrap();
            if weights
                .entry(term)
                .or_default()
                .insert(docid, weight)
                .is_some()
            {
                duplicates += 1;
            }
        }
    }
    Ok(LearnedChannel {
        weights,
        duplicates,
        dropped_terms,
    })
}

/// Encoded byte length of a posting list: per block, an 8-byte header
/// plus 8 bytes per posting (docid + packed impact).
fn list_byte_len(list: &PostingList) -> u64 {
    list.blocks.iter().map(|b| 8 + 8 * b.len() as u64).sum()
}

/// Build a complete dual-channel index from a collection and a
/// (possibly empty) set of learned-impact records.
pub fn build(
    docs: &[RawDocument],
    records: &[LearnedImpactRecord],
    params: &BuildParams,
) -> Result<(Index, BuildReport)> {
    let primary = build_primary_channel(docs)?;
    let docid_map: HashMap<&str, u32> = primary
        .doc_map
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();
    let learned = ingest_learned_impacts(records, &docid_map)?;

    let num_docs = docs.len() as u32;

    // First pass: raw channel maxima define the global codebooks. A
    // channel with no positive raw score quantizes nothing above zero,
    // so any positive stand-in keeps the codebook well-defined.
    let mut primary_raw: BTreeMap<&str, Vec<(u32, f64)>> = BTreeMap::new();
    let mut primary_max = 0.0f64;
    for (term, tfs) in &primary.postings {
        let df = tfs.len() as u32;
        let mut scored = Vec::with_capacity(tfs.len());
        for &(docid, tf) in tfs {
            let score = bm25_score(
                tf,
                df,
                primary.doc_lengths[docid as usize],
                primary.avg_doclen,
                num_docs,
                &params.bm25,
            )?;
            primary_max = primary_max.max(score);
            scored.push((docid, score));
        }
        primary_raw.insert(term, scored);
    }
    let mut learned_max = 0.0f64;
    for weights in learned.weights.values() {
        for &w in weights.values() {
            learned_max = learned_max.max(w);
        }
    }
    let primary_quant_max = if primary_max > 0.0 { primary_max } else { 1.0 };
    let learned_quant_max = if learned_max > 0.0 { learned_max } else { 1.0 };

    // Merge: per term, the union of both channels' docids, zero-filling
    // whichever side is absent.
    let mut all_terms: Vec<&str> = primary_raw.keys().copied().collect();
    for term in learned.weights.keys() {
        if !primary_raw.contains_key(term.as_str()) {
            all_terms.push(term);
        }
    }
    all_terms.sort_unstable();

    let mut lists = Vec::with_capacity(all_terms.len());
    let mut lexicon = BTreeMap::new();
    let mut offset = 0u64;
    let mut report = BuildReport {
        docs: num_docs,
        duplicate_learned_records: learned.duplicates,
        dropped_learned_terms: learned.dropped_terms,
        ..BuildReport::default()
    };
    let empty_learned = BTreeMap::new();
    for (term_id, term) in all_terms.iter().enumerate() {
        let primary_scores: &[(u32, f64)] = primary_raw.get(term).map_or(&[], Vec::as_slice);
        let learned_weights = learned.weights.get(*term).unwrap_or(&empty_learned);
        report.primary_postings += primary_scores.len() as u64;
        report.learned_postings += learned_weights.len() as u64;

        let mut merged: BTreeMap<u32, (u16, u16)> = BTreeMap::new();
        for &(docid, score) in primary_scores {
            merged.entry(docid).or_insert((0, 0)).0 = quantize(score, primary_quant_max)?;
        }
        for (&docid, &weight) in learned_weights {
            merged.entry(docid).or_insert((0, 0)).1 = quantize(weight, learned_quant_max)?;
        }
        let postings: Vec<(u32, PackedImpact)> = merged
            .into_iter()
            .map(|(docid, (p, l))| (docid, PackedImpact::pack(p, l)))
            .collect();
        let list = PostingList::from_postings(&postings, params.block_size);
        let length = list_byte_len(&list);
        lexicon.insert(
            term.to_string(),
            LexiconEntry {
                term_id: term_id as u32,
                doc_frequency: list.doc_frequency,
                max_primary: list.max_primary,
                max_learned: list.max_learned,
                offset,
                length,
            },
        );
        offset += length;
        report.postings += u64::from(list.doc_frequency);
        lists.push(list);
    }
    report.terms = lists.len() as u64;

    let index = Index {
        metadata: IndexMetadata {
            num_docs,
            avg_doclen: primary.avg_doclen,
            doc_lengths: primary.doc_lengths,
            primary_quant_max,
            learned_quant_max,
            block_size: params.block_size as u32,
            format_version: FORMAT_VERSION,
        },
        lexicon: Lexicon::new(lexicon),
        lists,
        doc_map: primary.doc_map,
    };
    debug_assert_eq!(index.validate(), Ok(()));
    Ok((index, report))
}
