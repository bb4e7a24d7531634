//! Guided traversal: primary-channel pruning, dual heaps.

use crate::index::Index;
use crate::query::maxscore::traverse;
use crate::query::{Channel, QueryResult};

/// Both ranked lists produced by one guided traversal. They share one
/// traversal's statistics and latency.
#[derive(Debug, Clone)]
pub struct GuidedResult {
    /// Primary-channel top-K: identical to plain primary MaxScore.
    pub primary: QueryResult,
    /// Top-K under the learned rule (or, with interpolation, the sum
    /// of both channels) over the documents the traversal scored.
    pub secondary: QueryResult,
}

/// One traversal, two heaps: the primary channel makes every pruning
/// decision exactly as plain MaxScore would, and each scored document's
/// unpacked impacts are offered to both heaps — the secondary under
/// the learned rule, or the interpolated rule when `interpolate` is
/// set. Documents the primary channel never scores cannot appear in
/// the secondary result; that is the traded recall that buys the
/// primary channel's pruning rate.
pub fn guided_traversal(
    index: &Index,
    term_ids: &[u32],
    k: usize,
    interpolate: bool,
) -> GuidedResult {
    let secondary = if interpolate {
        Channel::Interpolated
    } else {
        Channel::Learned
    };
    let out = traverse(index, term_ids, k, Channel::Primary, Some(secondary), None);
    GuidedResult {
        primary: out.primary,
        secondary: out.secondary.expect("secondary heap was requested"),
    }
}

/// [`guided_traversal`] plus the docids of every document the
/// traversal fully scored, in scoring order. The recording sits
/// outside the measured path's contract — it exists so tests can hold
/// the secondary result against a brute-force rescore of exactly the
/// visited documents.
pub fn guided_traversal_traced(
    index: &Index,
    term_ids: &[u32],
    k: usize,
    interpolate: bool,
) -> (GuidedResult, Vec<u32>) {
    let mut visited = Vec::new();
    let secondary = if interpolate {
        Channel::Interpolated
    } else {
        Channel::Learned
    };
    let out = traverse(
        index,
        term_ids,
        k,
        Channel::Primary,
        Some(secondary),
        Some(&mut visited),
    );
    (
        GuidedResult {
            primary: out.primary,
            secondary: out.secondary.expect("secondary heap was requested"),
        },
        visited,
    )
}
