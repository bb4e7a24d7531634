//! 8-bit linear quantization of raw channel scores and the packed
//! per-posting payload holding both channels.
//!
//! Each posting stores one 32-bit payload: the low 16 bits carry the
//! primary-channel impact, the high 16 bits the learned-channel impact.
//! The quantizer only emits codes in `0..=255`; the 16-bit halves leave
//! headroom and round-trip any value up to 65535.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of non-zero quantization codes. Code 0 is reserved for "raw
/// score is zero / posting absent in this channel".
pub const QUANT_LEVELS: u16 = 255;

/// Quantize a raw score onto `0..=255` against a per-channel global max.
///
/// Zero maps to zero and nothing else does: any positive score gets at
/// least code 1, so a posting's presence in a channel is never erased.
/// Rounding is half away from zero; scores above `channel_max` clamp to
/// 255.
pub fn quantize(score: f64, channel_max: f64) -> Result<u16> {
    if !channel_max.is_finite() || channel_max <= 0.0 {
        return Err(Error::InvalidChannelMax(channel_max));
    }
    if !score.is_finite() || score < 0.0 {
        return Err(Error::InvalidScore(score));
    }
    if score == 0.0 {
        return Ok(0);
    }
    let code = (f64::from(QUANT_LEVELS) * score / channel_max).round();
    Ok((code as u64).clamp(1, u64::from(QUANT_LEVELS)) as u16)
}

/// Inverse of [`quantize`] up to one quantization step; used by fidelity
/// checks, never by traversal.
pub fn dequantize(code: u16, channel_max: f64) -> f64 {
    f64::from(code) * channel_max / f64::from(QUANT_LEVELS)
}

/// One posting's payload: both channel impacts packed into 32 bits.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PackedImpact(pub u32);

impl PackedImpact {
    /// Pack the two 16-bit channel impacts: `raw = primary + 65536 * learned`.
    #[inline]
    pub fn pack(primary: u16, learned: u16) -> Self {
        PackedImpact(u32::from(primary) | (u32::from(learned) << 16))
    }

    #[inline]
    pub fn primary(self) -> u16 {
        (self.0 & 0xFFFF) as u16
    }

    #[inline]
    pub fn learned(self) -> u16 {
        (self.0 >> 16) as u16
    }

    /// Split the payload back into `(primary, learned)`.
    #[inline]
    pub fn unpack(self) -> (u16, u16) {
        (self.primary(), self.learned())
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }
}
