//! Raw score functions feeding the quantizer: BM25 for the primary
//! channel, identity pass-through for learned weights.

use crate::error::{Error, Result};

/// BM25 parameters. Defaults follow the tuned passage-ranking setting.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.82, b: 0.68 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        if !k1.is_finite() || k1 < 0.0 {
            return Err(Error::Bm25Input(format!("k1 must be >= 0, got {k1}")));
        }
        if !b.is_finite() || !(0.0..=1.0).contains(&b) {
            return Err(Error::Bm25Input(format!("b must be in [0, 1], got {b}")));
        }
        Ok(Bm25Params { k1, b })
    }
}

/// BM25 contribution of one (term, document) pair.
///
/// Uses the smoothed, always-non-negative idf
/// `ln(1 + (N - df + 0.5) / (df + 0.5))`, which keeps every impact
/// non-negative as quantization and upper-bound pruning require.
/// `tf == 0` means the posting is absent and contributes 0.
pub fn bm25_score(
    tf: u32,
    df: u32,
    dl: u32,
    avgdl: f64,
    num_docs: u32,
    params: &Bm25Params,
) -> Result<f64> {
    if tf == 0 {
        return Ok(0.0);
    }
    if df == 0 {
        return Err(Error::Bm25Input("df must be >= 1".into()));
    }
    if num_docs == 0 {
        return Err(Error::Bm25Input("num_docs must be >= 1".into()));
    }
    if df > num_docs {
        return Err(Error::Bm25Input(format!(
            "df ({df}) exceeds num_docs ({num_docs})"
        )));
    }
    if dl == 0 {
        return Err(Error::Bm25Input("dl must be >= 1".into()));
    }
    if !avgdl.is_finite() || avgdl <= 0.0 {
        return Err(Error::Bm25Input(format!("avgdl must be > 0, got {avgdl}")));
    }

    let n = f64::from(num_docs);
    let dff = f64::from(df);
    let idf = (1.0 + (n - dff + 0.5) / (dff + 0.5)).ln();

    let tff = f64::from(tf);
    let norm = 1.0 - params.b + params.b * f64::from(dl) / avgdl;
    Ok(idf * tff * (params.k1 + 1.0) / (tff + params.k1 * norm))
}

/// Maximum over a stream of raw channel scores; the quantizer's
/// `channel_max`. An empty stream is an error because quantization is
/// then undefined.
pub fn channel_max_scan(scores: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut max: Option<f64> = None;
    for s in scores {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidScore(s));
        }
        max = Some(match max {
            Some(m) if m >= s => m,
            _ => s,
        });
    }
    max.ok_or(Error::EmptyScoreStream)
}
