//! Fixed-capacity top-K min-heap over (score, docid).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    score: u32,
    docid: u32,
}

// `BinaryHeap` is a max-heap, so "greatest" must mean "worst ranked":
// lowest score first, then highest docid. That puts the eviction
// victim on top and makes `into_sorted_vec` emit best-first.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then_with(|| self.docid.cmp(&other.docid))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Top-K accumulator with the threshold semantics dynamic pruning
/// needs: θ is the lowest retained score once K entries are held, and
/// 0 before that. Admission requires a score strictly above θ, so
/// ties keep incumbents and zero scores never enter. Offers arriving
/// in ascending docid order (as DAAT produces them) therefore leave
/// the heap holding the K best entries under (score desc, docid asc).
pub struct TopKHeap {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl TopKHeap {
    pub fn new(k: usize) -> Self {
        TopKHeap {
            k,
            heap: BinaryHeap::with_capacity(k.saturating_add(1)),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Current admission bar. A capacity of zero admits nothing, which
    /// the sentinel value makes immediate to pruning code.
    pub fn threshold(&self) -> u32 {
        if self.k == 0 {
            return u32::MAX;
        }
        if self.heap.len() == self.k {
            self.heap.peek().map_or(0, |e| e.score)
        } else {
            0
        }
    }

    /// Offer a candidate; returns whether θ increased as a result.
    pub fn offer(&mut self, docid: u32, score: u32) -> bool {
        if self.k == 0 || score == 0 {
            return false;
        }
        if self.heap.len() < self.k {
            self.heap.push(Entry { score, docid });
            // θ leaves 0 exactly when the heap fills.
            return self.heap.len() == self.k;
        }
        let worst = self.heap.peek().copied().expect("heap is full");
        if score > worst.score {
            *self.heap.peek_mut().expect("heap is full") = Entry { score, docid };
            return self.threshold() > worst.score;
        }
        false
    }

    /// Drain into (docid, score), best first: score descending, ties by
    /// ascending docid.
    pub fn into_ranked(self) -> Vec<(u32, u32)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| (e.docid, e.score))
            .collect()
    }
}
