//! Compressing byte strings into containers over the 256-symbol byte
//! alphabet.

use crate::container::Container;
use crate::error::Result;
use crate::models::{ModelSpec, QuantizedDistribution, SymbolModel};
use crate::params::CodecParams;
use crate::stream::{self, RateReport};

pub const BYTE_ALPHABET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Byte frequencies of the whole input, quantized once and stored in
    /// the header.
    Static,
    /// Order-0 adaptive counts; only the alphabet size is stored.
    Adaptive,
}

/// Byte histogram of `data`.
pub fn byte_counts(data: &[u8]) -> Vec<u64> {
    let mut counts = vec![0u64; BYTE_ALPHABET];
    for &b in data {
        counts[b as usize] += 1;
    }
    counts
}

fn model_spec(data: &[u8], kind: ModelKind, params: &CodecParams) -> Result<ModelSpec> {
    Ok(match kind {
        ModelKind::Static => {
            let mut counts = byte_counts(data);
            if data.is_empty() {
                counts.fill(1);
            }
            ModelSpec::Static(QuantizedDistribution::quantize_counts(
                &counts,
                params.precision(),
            )?)
        }
        ModelKind::Adaptive => ModelSpec::AdaptiveOrder0 {
            alphabet_size: BYTE_ALPHABET,
        },
    })
}

pub fn compress_bytes(
    data: &[u8],
    kind: ModelKind,
    params: CodecParams,
) -> Result<(Container, RateReport)> {
    let spec = model_spec(data, kind, &params)?;
    let mut model = spec.instantiate(params.precision())?;
    let symbols: Vec<usize> = data.iter().map(|&b| usize::from(b)).collect();
    let (message, report) = stream::encode(&symbols, &mut model, params)?;
    let container = Container {
        params,
        model: spec,
        n_symbols: data.len() as u64,
        message,
    };
    Ok((container, report))
}

/// Output of [`decompress_bytes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decompressed {
    pub data: Vec<u8>,
    /// `false` if the message was not consumed exactly back to the empty
    /// message; the data is then suspect.
    pub clean_end: bool,
}

pub fn decompress_bytes(container: &Container) -> Result<Decompressed> {
    let mut model = container.model.instantiate(container.params.precision())?;
    if model.alphabet_size() > BYTE_ALPHABET {
        return Err(crate::Error::InvalidWeights(format!(
            "alphabet of {} symbols is not a byte alphabet",
            model.alphabet_size()
        )));
    }
    let n = usize::try_from(container.n_symbols)
        .map_err(|_| crate::Error::Truncated("symbol count exceeds address space"))?;
    let decoded = stream::decode(container.message.clone(), n, &mut model)?;
    Ok(Decompressed {
        clean_end: decoded.clean_end(),
        data: decoded.symbols.into_iter().map(|s| s as u8).collect(),
    })
}
