//! Byte-exact container format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "rANS"
//! 4       1     version (1)
//! 5       1     r_s, head width in bits
//! 6       1     r_t, tail word width in bits
//! 7       1     r, probability precision in bits
//! 8       1     model tag: 0x01 static, 0x02 adaptive order-0
//! 9       2     alphabet size
//! 11      4*I   static only: one weight per symbol
//! ..      8     number of symbols
//! ..      rest  flattened message
//! ```
//!
//! All integers are big-endian. The flattened message is the head in
//! `r_s / 8` bytes followed by the tail words, top of the stack first, each
//! in `r_t / 8` bytes.

use crate::error::{Error, Result};
use crate::message::Message;
use crate::models::{ModelSpec, QuantizedDistribution};
use crate::params::CodecParams;

pub const MAGIC: [u8; 4] = *b"rANS";
pub const VERSION: u8 = 1;
pub const TAG_STATIC: u8 = 0x01;
pub const TAG_ADAPTIVE_ORDER0: u8 = 0x02;

/// Serializes a message: head then tail words from the top of the stack
/// down, all big-endian.
pub fn flatten(message: &Message) -> Result<Vec<u8>> {
    let params = message.params();
    if !params.byte_aligned() {
        return Err(Error::NotByteAligned);
    }
    let head_bytes = params.head_bits() as usize / 8;
    let word_bytes = params.word_bits() as usize / 8;
    let mut out = Vec::with_capacity(head_bytes + word_bytes * message.tail().len());
    out.extend_from_slice(&message.head().to_be_bytes()[8 - head_bytes..]);
    for word in message.tail().iter().rev() {
        out.extend_from_slice(&word.to_be_bytes()[8 - word_bytes..]);
    }
    Ok(out)
}

fn read_be(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0, |acc, &b| (acc << 8) | u64::from(b))
}

/// Inverse of [`flatten`].
pub fn unflatten(bytes: &[u8], params: CodecParams) -> Result<Message> {
    if !params.byte_aligned() {
        return Err(Error::NotByteAligned);
    }
    let head_bytes = params.head_bits() as usize / 8;
    let word_bytes = params.word_bits() as usize / 8;
    if bytes.len() < head_bytes || !(bytes.len() - head_bytes).is_multiple_of(word_bytes) {
        return Err(Error::PayloadLength {
            len: bytes.len(),
            head_bytes,
            word_bytes,
        });
    }
    let (head, rest) = bytes.split_at(head_bytes);
    let mut tail: Vec<u64> = rest.chunks_exact(word_bytes).map(read_be).collect();
    tail.reverse();
    Message::from_parts(params, read_be(head), tail)
}

/// A compressed sequence together with everything needed to decode it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub params: CodecParams,
    pub model: ModelSpec,
    pub n_symbols: u64,
    pub message: Message,
}

impl Container {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.message.params() != &self.params {
            return Err(Error::InvalidWeights(
                "message parameters differ from container parameters".into(),
            ));
        }
        let payload = flatten(&self.message)?;
        let mut out = Vec::with_capacity(32 + payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.params.head_bits() as u8);
        out.push(self.params.word_bits() as u8);
        out.push(self.params.precision() as u8);

        let alphabet = u16::try_from(self.model.alphabet_size()).map_err(|_| {
            Error::InvalidWeights(format!(
                "alphabet of {} symbols exceeds 65535",
                self.model.alphabet_size()
            ))
        })?;
        match &self.model {
            ModelSpec::Static(dist) => {
                if dist.precision() != self.params.precision() {
                    return Err(Error::PrecisionMismatch {
                        model: dist.precision(),
                        codec: self.params.precision(),
                    });
                }
                out.push(TAG_STATIC);
                out.extend_from_slice(&alphabet.to_be_bytes());
                for &w in dist.weights() {
                    let w = u32::try_from(w).map_err(|_| {
                        Error::InvalidWeights(format!("weight {w} does not fit in 4 bytes"))
                    })?;
                    out.extend_from_slice(&w.to_be_bytes());
                }
            }
            ModelSpec::AdaptiveOrder0 { .. } => {
                out.push(TAG_ADAPTIVE_ORDER0);
                out.extend_from_slice(&alphabet.to_be_bytes());
            }
        }
        out.extend_from_slice(&self.n_symbols.to_be_bytes());
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader { bytes };
        let magic: [u8; 4] = reader.take(4, "magic")?.try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let version = reader.byte("version")?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let head_bits = reader.byte("parameters")?;
        let word_bits = reader.byte("parameters")?;
        let precision = reader.byte("parameters")?;
        let params = CodecParams::new(head_bits.into(), word_bits.into(), precision.into())?;
        if !params.byte_aligned() {
            return Err(Error::NotByteAligned);
        }

        let tag = reader.byte("model tag")?;
        let alphabet = read_be(reader.take(2, "alphabet size")?) as usize;
        if alphabet == 0 {
            return Err(Error::InvalidWeights("empty alphabet".into()));
        }
        let model = match tag {
            TAG_STATIC => {
                let raw = reader.take(4 * alphabet, "static weights")?;
                let weights = raw.chunks_exact(4).map(read_be).collect();
                ModelSpec::Static(QuantizedDistribution::from_weights(
                    weights,
                    params.precision(),
                )?)
            }
            TAG_ADAPTIVE_ORDER0 => {
                if alphabet as u128 > 1u128 << params.precision() {
                    return Err(Error::AlphabetTooLarge {
                        alphabet_size: alphabet,
                        precision: params.precision(),
                    });
                }
                ModelSpec::AdaptiveOrder0 {
                    alphabet_size: alphabet,
                }
            }
            other => return Err(Error::UnknownModelTag(other)),
        };
        let n_symbols = read_be(reader.take(8, "symbol count")?);
        let message = unflatten(reader.bytes, params)?;
        Ok(Self {
            params,
            model,
            n_symbols,
            message,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Truncated(what));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn byte(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
}
