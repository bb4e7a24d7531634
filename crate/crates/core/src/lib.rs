//! Dual-channel impact retrieval engine.
//!
//! Stores two quantized impact scores per posting — a lexical BM25
//! channel and a learned sparse channel — packed into one 32-bit
//! payload, and retrieves with MaxScore dynamic pruning over either
//! channel or with guided traversal, where the cheap-to-prune lexical
//! channel steers the traversal and the learned scores are collected
//! for the documents it visits.

pub mod builder;
pub mod error;
pub mod eval;
pub mod index;
pub mod quantize;
pub mod query;
pub mod scoring;
pub mod synth;
pub mod tokenize;

pub use error::{Error, Result};
