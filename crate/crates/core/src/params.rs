//! Precision parameters shared by every codec operation.

use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};

/// The precision triple of a codec: head width, tail word width and
/// probability precision, all in bits.
///
/// The head lives in `[2^(head_bits - word_bits), 2^head_bits)` between
/// operations; tail words are `word_bits` wide; symbol weights sum to
/// `2^precision`.
#[derive(Clone, Copy)]
pub struct CodecParams {
    head_bits: u32,
    word_bits: u32,
    precision: u32,
    epsilon: f64,
}

impl CodecParams {
    /// 64-bit head, 32-bit words, 16-bit probabilities.
    pub const DEFAULT_HEAD_BITS: u32 = 64;
    pub const DEFAULT_WORD_BITS: u32 = 32;
    pub const DEFAULT_PRECISION: u32 = 16;

    pub fn new(head_bits: u32, word_bits: u32, precision: u32) -> Result<Self> {
        let invalid = |reason: &'static str| Error::InvalidParams {
            head_bits,
            word_bits,
            precision,
            reason,
        };
        if head_bits > 64 {
            return Err(invalid("head width above 64 bits is not supported"));
        }
        if word_bits == 0 || word_bits >= head_bits {
            return Err(invalid("need 0 < word_bits < head_bits"));
        }
        if precision == 0 {
            return Err(invalid("probability precision must be positive"));
        }
        if head_bits < word_bits + precision + 1 {
            return Err(invalid("need head_bits - word_bits - precision >= 1"));
        }
        let slack = head_bits - word_bits - precision;
        // log2(1 / (1 - 2^-slack)) without cancellation for large slack
        let epsilon = -(-(2f64.powi(-(slack as i32)))).ln_1p() / LN_2;
        Ok(Self {
            head_bits,
            word_bits,
            precision,
            epsilon,
        })
    }

    /// Parameters small enough that every head value can be enumerated.
    pub fn small() -> Self {
        Self::new(16, 8, 3).expect("static parameters are valid")
    }

    #[inline]
    pub fn head_bits(&self) -> u32 {
        self.head_bits
    }

    #[inline]
    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Per-symbol overhead bound in bits, `log2(1 / (1 - 2^-(r_s - r_t - r)))`.
    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Lower bound on the head between operations, `2^(head_bits - word_bits)`.
    #[inline]
    pub fn head_lower(&self) -> u64 {
        1u64 << (self.head_bits - self.word_bits)
    }

    /// Exclusive upper bound on the head, `2^head_bits`. Needs 65 bits at the
    /// default width, hence `u128`.
    #[inline]
    pub fn head_upper(&self) -> u128 {
        1u128 << self.head_bits
    }

    /// `2^precision`, the sum every quantized distribution must reach.
    #[inline]
    pub fn total_weight(&self) -> u64 {
        1u64 << self.precision
    }

    #[inline]
    pub(crate) fn word_mask(&self) -> u64 {
        (1u64 << self.word_bits) - 1
    }

    #[inline]
    pub(crate) fn bar_mask(&self) -> u64 {
        (1u64 << self.precision) - 1
    }

    /// `true` when the head satisfies the between-operations constraint.
    #[inline]
    pub fn head_in_range(&self, head: u64) -> bool {
        head >= self.head_lower() && u128::from(head) < self.head_upper()
    }

    pub fn byte_aligned(&self) -> bool {
        self.head_bits.is_multiple_of(8) && self.word_bits.is_multiple_of(8)
    }
}

impl Default for CodecParams {
    fn default() -> Self {
        Self::new(
            Self::DEFAULT_HEAD_BITS,
            Self::DEFAULT_WORD_BITS,
            Self::DEFAULT_PRECISION,
        )
        .expect("default parameters are valid")
    }
}

impl PartialEq for CodecParams {
    fn eq(&self, other: &Self) -> bool {
        self.head_bits == other.head_bits
            && self.word_bits == other.word_bits
            && self.precision == other.precision
    }
}

impl Eq for CodecParams {}

impl fmt::Debug for CodecParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodecParams")
            .field("head_bits", &self.head_bits)
            .field("word_bits", &self.word_bits)
            .field("precision", &self.precision)
            .finish()
    }
}

impl fmt::Display for CodecParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r_s={} r_t={} r={}",
            self.head_bits, self.word_bits, self.precision
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_epsilon_matches_closed_form() {
        let p = CodecParams::default();
        let direct = (1.0 / (1.0 - 2f64.powi(-16))).log2();
        assert!((p.epsilon() - direct).abs() < 1e-15);
        assert!((p.epsilon() - 2.2011e-5).abs() < 1e-8);
        assert_eq!(p.head_lower(), 1 << 32);
        assert_eq!(p.head_upper(), 1u128 << 64);
    }

    #[test]
    fn small_params() {
        let p = CodecParams::small();
        assert_eq!(p.head_lower(), 256);
        assert_eq!(p.head_upper(), 65536);
        assert_eq!(p.total_weight(), 8);
        // slack 5 bits: log2(32/31)
        assert!((p.epsilon() - (32.0f64 / 31.0).log2()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_triples() {
        assert!(CodecParams::new(16, 16, 3).is_err());
        assert!(CodecParams::new(16, 0, 3).is_err());
        assert!(CodecParams::new(16, 8, 0).is_err());
        assert!(CodecParams::new(16, 8, 8).is_err());
        assert!(CodecParams::new(16, 8, 7).is_ok());
        assert!(CodecParams::new(72, 32, 16).is_err());
        assert!(CodecParams::new(64, 48, 15).is_ok());
    }
}
