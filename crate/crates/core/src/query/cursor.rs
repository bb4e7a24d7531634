//! Posting-list cursor with block skipping.

use crate::index::PostingList;
use crate::quantize::PackedImpact;

/// Sentinel docid reported by an exhausted cursor. Real docids are
/// bounded by `num_docs`, which never reaches this value.
pub const END_DOCID: u32 = u32::MAX;

/// Forward-only iterator over one posting list.
///
/// Counts the postings it examines and the blocks it opens so tests
/// can prove that `next_geq` skips whole blocks via their `max_docid`
/// headers without touching their postings.
pub struct Cursor<'a> {
    term_id: u32,
    list: &'a PostingList,
    block: usize,
    pos: usize,
    docid: u32,
    pub postings_examined: u64,
    pub blocks_opened: u64,
}

impl<'a> Cursor<'a> {
    pub fn new(term_id: u32, list: &'a PostingList) -> Self {
        let mut cursor = Cursor {
            term_id,
            list,
            block: 0,
            pos: 0,
            docid: END_DOCID,
            postings_examined: 0,
            blocks_opened: 0,
        };
        if let Some(first) = list.blocks.first() {
            cursor.blocks_opened = 1;
            cursor.postings_examined = 1;
            cursor.docid = first.docids[0];
        }
        cursor
    }

    pub fn term_id(&self) -> u32 {
        self.term_id
    }

    pub fn docid(&self) -> u32 {
        self.docid
    }

    pub fn is_exhausted(&self) -> bool {
        self.docid == END_DOCID
    }

    /// Packed impact at the current position; meaningless once exhausted.
    pub fn impact(&self) -> PackedImpact {
        self.list.blocks[self.block].impacts[self.pos]
    }

    pub fn max_primary(&self) -> u16 {
        self.list.max_primary
    }

    pub fn max_learned(&self) -> u16 {
        self.list.max_learned
    }

    /// Advance to the next posting, or END.
    pub fn next(&mut self) {
        if self.docid == END_DOCID {
            return;
        }
        self.pos += 1;
        if self.pos >= self.list.blocks[self.block].len() {
            self.block += 1;
            self.pos = 0;
            if self.block >= self.list.blocks.len() {
                self.docid = END_DOCID;
                return;
            }
            self.blocks_opened += 1;
        }
        self.docid = self.list.blocks[self.block].docids[self.pos];
        self.postings_examined += 1;
    }

    /// Advance to the first posting with docid >= `target`, or END.
    /// Blocks whose `max_docid` falls short of the target are skipped
    /// without their postings being examined. A target at or below the
    /// current docid leaves the cursor in place.
    pub fn next_geq(&mut self, target: u32) {
        if self.docid == END_DOCID || self.docid >= target {
            return;
        }
        if self.list.blocks[self.block].max_docid < target {
            let mut block = self.block + 1;
            while block < self.list.blocks.len() && self.list.blocks[block].max_docid < target {
                block += 1;
            }
            if block >= self.list.blocks.len() {
                self.docid = END_DOCID;
                return;
            }
            self.block = block;
            self.pos = 0;
            self.blocks_opened += 1;
            self.docid = self.list.blocks[block].docids[0];
            self.postings_examined += 1;
            if self.docid >= target {
                return;
            }
        }
        // The block's max_docid is >= target, so the scan must hit.
        loop {
            self.pos += 1;
            self.docid = self.list.blocks[self.block].docids[self.pos];
            self.postings_examined += 1;
            if self.docid >= target {
                return;
            }
        }
    }
}
