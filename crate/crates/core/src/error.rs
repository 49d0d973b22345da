use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(
        "invalid codec parameters (r_s={head_bits}, r_t={word_bits}, r={precision}): {reason}"
    )]
    InvalidParams {
        head_bits: u32,
        word_bits: u32,
        precision: u32,
        reason: &'static str,
    },

    #[error(
        "head {head} outside the valid range for {head_bits}-bit heads with {word_bits}-bit words"
    )]
    HeadOutOfRange {
        head: u64,
        head_bits: u32,
        word_bits: u32,
    },

    #[error("tail word {word:#x} does not fit in {word_bits} bits")]
    WordOutOfRange { word: u64, word_bits: u32 },

    #[error("head {head} must be renormalized into [{lower}, {upper}) before encoding a symbol of weight {weight}")]
    HeadNotRenormalized {
        head: u64,
        weight: u64,
        lower: u128,
        upper: u128,
    },

    #[error(
        "slot (weight {weight}, cumulative {cumulative}) does not fit in precision {precision}"
    )]
    InvalidSlot {
        weight: u64,
        cumulative: u64,
        precision: u32,
    },

    #[error("tail underflow: stream exhausted while renormalizing (corrupt or truncated input)")]
    TailUnderflow,

    #[error("counts are all zero")]
    EmptyCounts,

    #[error("alphabet of {alphabet_size} symbols cannot be quantized at precision {precision}")]
    AlphabetTooLarge {
        alphabet_size: usize,
        precision: u32,
    },

    #[error("symbol {symbol} outside alphabet of size {alphabet_size}")]
    UnknownSymbol { symbol: usize, alphabet_size: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("model precision {model} does not match codec precision {codec}")]
    PrecisionMismatch { model: u32, codec: u32 },

    #[error("r_s and r_t must be multiples of 8 to serialize a message")]
    NotByteAligned,

    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("unknown model tag {0:#04x}")]
    UnknownModelTag(u8),

    #[error("truncated container: {0}")]
    Truncated(&'static str),

    #[error(
        "payload of {len} bytes is not a {head_bytes}-byte head plus whole {word_bytes}-byte words"
    )]
    PayloadLength {
        len: usize,
        head_bytes: usize,
        word_bytes: usize,
    },
}
