//! MaxScore dynamic pruning, shared by the plain per-channel strategy
//! and guided traversal.

use std::time::Instant;

use crate::index::Index;
use crate::query::cursor::{Cursor, END_DOCID};
use crate::query::heap::TopKHeap;
use crate::query::{count_matching, Channel, QueryResult, TraversalStats};

pub(crate) struct TraversalOutput {
    pub primary: QueryResult,
    pub secondary: Option<QueryResult>,
}

/// Document-at-a-time MaxScore traversal.
///
/// All pruning decisions — the essential/non-essential split, probe
/// abandonment, early exit — read the `drive` rule and the drive heap's
/// threshold only. When `secondary` is given, every fully scored
/// document is also offered to a second heap under that rule, which is
/// how guided traversal collects its learned/interpolated top-K over
/// exactly the documents the drive channel chose to score.
///
/// Cursors are ordered by ascending drive bound; a prefix whose bound
/// sum cannot beat θ is non-essential and only probed, best bound
/// first, for candidates the essential lists produce. A probe chain is
/// abandoned once even the remaining bounds cannot lift the document
/// strictly above θ. A θ increase re-partitions the lists, taking
/// effect from the next candidate selection; the candidate already
/// chosen is still scored, which costs at most one document per θ
/// change and keeps the visited set independent of offer timing.
pub(crate) fn traverse(
    index: &Index,
    term_ids: &[u32],
    k: usize,
    drive: Channel,
    secondary: Option<Channel>,
    mut visited: Option<&mut Vec<u32>>,
) -> TraversalOutput {
    let start = Instant::now();
    let mut cursors: Vec<Cursor> = term_ids
        .iter()
        .map(|&t| Cursor::new(t, index.list(t)))
        .filter(|c| !c.is_exhausted())
        .collect();
    cursors.sort_by_key(|c| (drive.list_bound(index.list(c.term_id())), c.term_id()));
    let n = cursors.len();

    // cum[i] = sum of the i+1 smallest drive bounds: the best score a
    // document confined to lists 0..=i could reach.
    let mut cum = Vec::with_capacity(n);
    let mut running = 0u64;
    for c in &cursors {
        running += u64::from(drive.list_bound(index.list(c.term_id())));
        cum.push(running);
    }

    let mut drive_heap = TopKHeap::new(k);
    let mut secondary_heap = secondary.map(|_| TopKHeap::new(k));
    let mut stats = TraversalStats::default();

    let mut theta = drive_heap.threshold();
    // Number of non-essential lists: the longest prefix whose combined
    // bounds cannot exceed θ.
    let mut non_essential = 0usize;
    while non_essential < n && cum[non_essential] <= u64::from(theta) {
        non_essential += 1;
    }

    let select = |cursors: &[Cursor], non_essential: usize| -> u32 {
        cursors[non_essential..]
            .iter()
            .map(Cursor::docid)
            .min()
            .unwrap_or(END_DOCID)
    };

    let mut candidate = select(&cursors, non_essential);
    while candidate != END_DOCID {
        // Cursors already sitting on the candidate contribute without
        // probe work, whatever their partition.
        let mut drive_sum = 0u32;
        let mut secondary_sum = 0u32;
        for c in &cursors {
            if c.docid() == candidate {
                let imp = c.impact();
                drive_sum += drive.impact(imp);
                if let Some(rule) = secondary {
                    secondary_sum += rule.impact(imp);
                }
            }
        }
        // Probe the remaining non-essential lists, best bound first,
        // while the document can still conceivably beat θ.
        let mut abandoned = false;
        for j in (0..non_essential).rev() {
            if cursors[j].docid() == candidate {
                continue;
            }
            if u64::from(drive_sum) + cum[j] < u64::from(theta) {
                abandoned = true;
                break;
            }
            cursors[j].next_geq(candidate);
            if cursors[j].docid() == candidate {
                let imp = cursors[j].impact();
                drive_sum += drive.impact(imp);
                if let Some(rule) = secondary {
                    secondary_sum += rule.impact(imp);
                }
            }
        }

        let mut theta_rose = false;
        if !abandoned {
            stats.documents_scored += 1;
            if let Some(sink) = visited.as_deref_mut() {
                sink.push(candidate);
            }
            theta_rose = drive_heap.offer(candidate, drive_sum);
            if let Some(heap) = &mut secondary_heap {
                heap.offer(candidate, secondary_sum);
            }
        }

        for c in &mut cursors {
            if c.docid() == candidate {
                c.next();
            }
        }
        candidate = select(&cursors, non_essential);
        if theta_rose {
            theta = drive_heap.threshold();
            while non_essential < n && cum[non_essential] <= u64::from(theta) {
                non_essential += 1;
            }
        }
    }

    stats.postings_visited = cursors.iter().map(|c| c.postings_examined).sum();
    let latency_us = start.elapsed().as_micros() as u64;
    stats.documents_matching = count_matching(index, term_ids);

    let secondary_result = secondary_heap.map(|heap| QueryResult {
        ranked: heap.into_ranked(),
        stats,
        latency_us,
    });
    TraversalOutput {
        primary: QueryResult {
            ranked: drive_heap.into_ranked(),
            stats,
            latency_us,
        },
        secondary: secondary_result,
    }
}

/// Rank-safe top-K under one scoring rule: identical output to
/// [`exhaustive_daat`](crate::query::exhaustive_daat), typically after
/// scoring far fewer documents.
pub fn maxscore(index: &Index, term_ids: &[u32], k: usize, channel: Channel) -> QueryResult {
    traverse(index, term_ids, k, channel, None, None).primary
}
