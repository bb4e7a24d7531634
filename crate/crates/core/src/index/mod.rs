//! In-memory index model: posting blocks, lexicon and metadata.
//!
//! A loaded [`Index`] is immutable and shareable across threads; one
//! query execution never mutates it. The on-disk layout lives in
//! [`io`].

pub mod io;

pub use io::{load_index, write_index};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::quantize::PackedImpact;

/// Current on-disk format version; bumped on any layout change.
pub const FORMAT_VERSION: u32 = 1;

/// Skip granularity of posting lists.
pub const DEFAULT_BLOCK_SIZE: usize = 128;

/// A fixed-size run of postings with its own max docid for block skipping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingBlock {
    /// Last (largest) docid in the block.
    pub max_docid: u32,
    pub docids: Vec<u32>,
    pub impacts: Vec<PackedImpact>,
}

impl PostingBlock {
    pub fn len(&self) -> usize {
        self.docids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docids.is_empty()
    }
}

/// All postings for one term, docid-ascending, organized in blocks.
///
/// `max_primary` / `max_learned` are the list-wise upper bounds that
/// drive MaxScore pruning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingList {
    pub blocks: Vec<PostingBlock>,
    pub doc_frequency: u32,
    pub max_primary: u16,
    pub max_learned: u16,
}

impl PostingList {
    /// Build a list from docid-ascending postings, computing blocks,
    /// doc frequency and both channel upper bounds.
    pub fn from_postings(postings: &[(u32, PackedImpact)], block_size: usize) -> Self {
        assert!(block_size > 0, "block size must be positive");
        let mut blocks = Vec::with_capacity(postings.len().div_ceil(block_size));
        let mut max_primary = 0u16;
        let mut max_learned = 0u16;
        for chunk in postings.chunks(block_size) {
            let docids: Vec<u32> = chunk.iter().map(|(d, _)| *d).collect();
            let impacts: Vec<PackedImpact> = chunk.iter().map(|(_, i)| *i).collect();
            for imp in &impacts {
                max_primary = max_primary.max(imp.primary());
                max_learned = max_learned.max(imp.learned());
            }
            blocks.push(PostingBlock {
                max_docid: *docids.last().expect("chunks are non-empty"),
                docids,
                impacts,
            });
        }
        PostingList {
            blocks,
            doc_frequency: postings.len() as u32,
            max_primary,
            max_learned,
        }
    }

    pub fn iter_postings(&self) -> impl Iterator<Item = (u32, PackedImpact)> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b.docids.iter().copied().zip(b.impacts.iter().copied()))
    }

    pub fn len(&self) -> usize {
        self.doc_frequency as usize
    }

    pub fn is_empty(&self) -> bool {
        self.doc_frequency == 0
    }
}

/// One lexicon row: where a term's postings live and the statistics
/// traversal needs before touching them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconEntry {
    pub term_id: u32,
    pub doc_frequency: u32,
    pub max_primary: u16,
    pub max_learned: u16,
    /// Byte offset of the list in `postings.bin`.
    pub offset: u64,
    /// Byte length of the list in `postings.bin`.
    pub length: u64,
}

/// Term dictionary. Terms are kept in lexicographic order and term ids
/// are dense in `[0, num_terms)`, assigned in that same order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    terms: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new(terms: BTreeMap<String, LexiconEntry>) -> Self {
        Lexicon { terms }
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        self.terms.get(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms with their entries, lexicographically ordered.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexiconEntry)> {
        self.terms.iter().map(|(t, e)| (t.as_str(), e))
    }
}

/// Collection-wide statistics and quantization ranges.
///
/// `doc_lengths` is persisted in `doclens.bin`, not in `metadata.json`;
/// everything else round-trips through the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub num_docs: u32,
    pub avg_doclen: f64,
    #[serde(skip)]
    pub doc_lengths: Vec<u32>,
    /// Global max raw BM25 score observed at build time.
    pub primary_quant_max: f64,
    /// Global max raw learned weight observed at build time.
    pub learned_quant_max: f64,
    pub block_size: u32,
    pub format_version: u32,
}

/// A fully loaded dual-channel index.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub metadata: IndexMetadata,
    pub lexicon: Lexicon,
    /// Posting lists indexed by `term_id`.
    pub lists: Vec<PostingList>,
    /// Internal docid -> external document id.
    pub doc_map: Vec<String>,
}

impl Index {
    pub fn num_docs(&self) -> u32 {
        self.metadata.num_docs
    }

    pub fn num_terms(&self) -> usize {
        self.lists.len()
    }

    pub fn num_postings(&self) -> u64 {
        self.lists.iter().map(|l| u64::from(l.doc_frequency)).sum()
    }

    pub fn list(&self, term_id: u32) -> &PostingList {
        &self.lists[term_id as usize]
    }

    pub fn external_docid(&self, docid: u32) -> &str {
        &self.doc_map[docid as usize]
    }

    /// Structural invariant check: docid ordering, block shape, counts,
    /// stored upper bounds, lexicon/list agreement.
    pub fn validate(&self) -> Result<(), String> {
        if self.metadata.format_version != FORMAT_VERSION {
            return Err(format!(
                "format version {} unsupported (expected {})",
                self.metadata.format_version, FORMAT_VERSION
            ));
        }
        if self.metadata.doc_lengths.len() != self.metadata.num_docs as usize {
            return Err("doc_lengths length disagrees with num_docs".into());
        }
        if self.doc_map.len() != self.metadata.num_docs as usize {
            return Err("doc map length disagrees with num_docs".into());
        }
        if self.metadata.num_docs > 0 {
            let sum: u64 = self
                .metadata
                .doc_lengths
                .iter()
                .map(|&l| u64::from(l))
                .sum();
            let mean = sum as f64 / f64::from(self.metadata.num_docs);
            if mean != self.metadata.avg_doclen {
                return Err(format!(
                    "avg_doclen {} disagrees with doc_lengths mean {}",
                    self.metadata.avg_doclen, mean
                ));
            }
            // Negated so NaN fails too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(self.metadata.primary_quant_max > 0.0) {
                return Err("primary_quant_max must be positive".into());
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(self.metadata.learned_quant_max > 0.0) {
                return Err("learned_quant_max must be positive".into());
            }
        }
        if self.lexicon.len() != self.lists.len() {
            return Err("lexicon size disagrees with list count".into());
        }
        for (term, entry) in self.lexicon.iter() {
            let list = self
                .lists
                .get(entry.term_id as usize)
                .ok_or_else(|| format!("term {term:?}: term_id {} out of range", entry.term_id))?;
            if list.doc_frequency != entry.doc_frequency {
                return Err(format!("term {term:?}: doc frequency mismatch"));
            }
            let mut prev: Option<u32> = None;
            let mut count = 0u32;
            let mut max_p = 0u16;
            let mut max_l = 0u16;
            for block in &list.blocks {
                if block.docids.len() != block.impacts.len() {
                    return Err(format!("term {term:?}: block docid/impact length mismatch"));
                }
                if block.is_empty() || block.len() > self.metadata.block_size as usize {
                    return Err(format!("term {term:?}: bad block size {}", block.len()));
                }
                for (&d, &imp) in block.docids.iter().zip(&block.impacts) {
                    if prev.is_some_and(|p| p >= d) {
                        return Err(format!("term {term:?}: docids not strictly ascending"));
                    }
                    if d >= self.metadata.num_docs {
                        return Err(format!("term {term:?}: docid {d} out of range"));
                    }
                    prev = Some(d);
                    count += 1;
                    max_p = max_p.max(imp.primary());
                    max_l = max_l.max(imp.learned());
                }
                if block.max_docid != *block.docids.last().unwrap() {
                    return Err(format!("term {term:?}: block max_docid mismatch"));
                }
            }
            if count != entry.doc_frequency {
                return Err(format!("term {term:?}: posting count disagrees with df"));
            }
            if max_p != list.max_primary || max_l != list.max_learned {
                return Err(format!("term {term:?}: stored channel maxima are stale"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imp(p: u16, l: u16) -> PackedImpact {
        PackedImpact::pack(p, l)
    }

    #[test]
    fn from_postings_blocks_and_bounds() {
        let postings: Vec<(u32, PackedImpact)> = (0..10)
            .map(|d| (d * 3, imp(d as u16 + 1, 30 - d as u16)))
            .collect();
        let list = PostingList::from_postings(&postings, 4);
        assert_eq!(list.blocks.len(), 3);
        assert_eq!(list.doc_frequency, 10);
        assert_eq!(list.blocks[0].max_docid, 9);
        assert_eq!(list.blocks[2].len(), 2);
        assert_eq!(list.max_primary, 10);
        assert_eq!(list.max_learned, 30);
        let collected: Vec<_> = list.iter_postings().collect();
        assert_eq!(collected, postings);
    }

    #[test]
    fn stored_maxima_match_rescan() {
        let postings: Vec<(u32, PackedImpact)> = vec![(1, imp(5, 0)), (4, imp(2, 9))];
        let list = PostingList::from_postings(&postings, 128);
        let (mut p, mut l) = (0u16, 0u16);
        for (_, i) in list.iter_postings() {
            p = p.max(i.primary());
            l = l.max(i.learned());
        }
        assert_eq!((p, l), (list.max_primary, list.max_learned));
    }
}
