//! Document-at-a-time query execution over the dual-impact index:
//! exhaustive scoring, rank-safe MaxScore pruning, and guided
//! traversal with its two heaps.

pub mod batch;
mod cursor;
mod exhaustive;
mod guided;
mod heap;
mod maxscore;

pub use cursor::{Cursor, END_DOCID};
pub use exhaustive::exhaustive_daat;
pub use guided::{guided_traversal, guided_traversal_traced, GuidedResult};
pub use heap::TopKHeap;
pub use maxscore::maxscore;

use crate::index::{Index, Lexicon, PostingList};
use crate::quantize::PackedImpact;
use crate::tokenize::tokenize;

/// Scoring rule applied to a posting's packed impacts. The first two
/// read one stored channel; `Interpolated` is their unweighted sum
/// (rank-equivalent to the unweighted mean, but integer-valued).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Primary,
    Learned,
    Interpolated,
}

impl Channel {
    /// This rule's contribution of a single posting.
    pub fn impact(self, imp: PackedImpact) -> u32 {
        match self {
            Channel::Primary => u32::from(imp.primary()),
            Channel::Learned => u32::from(imp.learned()),
            Channel::Interpolated => u32::from(imp.primary()) + u32::from(imp.learned()),
        }
    }

    /// Upper bound of this rule over a whole list.
    pub fn list_bound(self, list: &PostingList) -> u32 {
        match self {
            Channel::Primary => u32::from(list.max_primary),
            Channel::Learned => u32::from(list.max_learned),
            Channel::Interpolated => u32::from(list.max_primary) + u32::from(list.max_learned),
        }
    }
}

/// Work counters for one query execution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraversalStats {
    /// Documents fully scored (offered to the heaps).
    pub documents_scored: u64,
    /// Postings examined across all cursors, block skips excluded.
    pub postings_visited: u64,
    /// Distinct documents in the union of the query's posting lists.
    pub documents_matching: u64,
}

/// One ranked list with its instrumentation.
#[derive(Debug, Clone)]
pub struct QueryResult {
    /// (internal docid, score), score descending, ties docid ascending.
    pub ranked: Vec<(u32, u32)>,
    pub stats: TraversalStats,
    /// Wall-clock time spent traversing (stats bookkeeping excluded).
    pub latency_us: u64,
}

/// Tokenize a query with the index tokenizer, deduplicate, and keep
/// the term ids the lexicon knows. Order follows first occurrence.
pub fn parse_query(text: &str, lexicon: &Lexicon) -> Vec<u32> {
    let mut ids = Vec::new();
    for token in tokenize(text) {
        if let Some(entry) = lexicon.get(&token) {
            if !ids.contains(&entry.term_id) {
                ids.push(entry.term_id);
            }
        }
    }
    ids
}

/// Size of the union of the given terms' posting lists.
pub fn count_matching(index: &Index, term_ids: &[u32]) -> u64 {
    let mut docids: Vec<u32> = Vec::new();
    for &t in term_ids {
        docids.extend(index.list(t).iter_postings().map(|(d, _)| d));
    }
    docids.sort_unstable();
    docids.dedup();
    docids.len() as u64
}
