//! Exhaustive DAAT scoring: the rank-safety oracle and the baseline
//! the scored-document fractions are measured against.

use std::time::Instant;

use crate::index::Index;
use crate::query::cursor::{Cursor, END_DOCID};
use crate::query::heap::TopKHeap;
use crate::query::{count_matching, Channel, QueryResult, TraversalStats};

/// Score every document in the union of the query's posting lists
/// under the given rule and keep the top-K. `documents_scored` always
/// equals `documents_matching` here.
pub fn exhaustive_daat(index: &Index, term_ids: &[u32], k: usize, channel: Channel) -> QueryResult {
    let start = Instant::now();
    let mut cursors: Vec<Cursor> = term_ids
        .iter()
        .map(|&t| Cursor::new(t, index.list(t)))
        .filter(|c| !c.is_exhausted())
        .collect();
    let mut heap = TopKHeap::new(k);
    let mut stats = TraversalStats::default();

    loop {
        let candidate = cursors.iter().map(Cursor::docid).min().unwrap_or(END_DOCID);
        if candidate == END_DOCID {
            break;
        }
        let mut sum = 0u32;
        for c in &mut cursors {
            if c.docid() == candidate {
                sum += channel.impact(c.impact());
                c.next();
            }
        }
        stats.documents_scored += 1;
        heap.offer(candidate, sum);
    }

    stats.postings_visited = cursors.iter().map(|c| c.postings_examined).sum();
    let latency_us = start.elapsed().as_micros() as u64;
    stats.documents_matching = count_matching(index, term_ids);
    debug_assert_eq!(stats.documents_scored, stats.documents_matching);

    QueryResult {
        ranked: heap.into_ranked(),
        stats,
        latency_us,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::testutil::fixture_index;

    #[test]
    fn fixture_worked_answers() {
        let index = fixture_index();
        let primary = exhaustive_daat(&index, &[0, 1], 2, Channel::Primary);
        assert_eq!(primary.ranked, vec![(1, 7), (0, 5)]);
        let learned = exhaustive_daat(&index, &[0, 1], 2, Channel::Learned);
        assert_eq!(learned.ranked, vec![(1, 10), (2, 8)]);
        let interpolated = exhaustive_daat(&index, &[0, 1], 1, Channel::Interpolated);
        assert_eq!(interpolated.ranked, vec![(1, 17)]);
    }

    #[test]
    fn scores_exactly_the_matching_documents() {
        let index = fixture_index();
        let r = exhaustive_daat(&index, &[0, 1], 3, Channel::Primary);
        assert_eq!(r.stats.documents_scored, 4);
        assert_eq!(r.stats.documents_matching, 4);
        assert_eq!(r.stats.postings_visited, 5, "every posting of both lists");
    }

    #[test]
    fn zero_k_returns_empty() {
        let index = fixture_index();
        let r = exhaustive_daat(&index, &[0, 1], 0, Channel::Primary);
        assert!(r.ranked.is_empty());
    }
}
