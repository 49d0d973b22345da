//! Whole-sequence encoding and decoding over a [`SymbolModel`].
//!
//! Decoding pops symbols in forward order, so encoding has to push them in
//! reverse. The encoder therefore walks the model forward once to record
//! every position's slot, then pushes the recorded slots back to front.

use crate::error::{Error, Result};
use crate::message::{Message, PushTrace, Slot};
use crate::models::SymbolModel;
use crate::params::CodecParams;

// symbol counts come from untrusted headers
const MAX_PREALLOCATED: usize = 1 << 20;

/// Float slack allowed on the information content when checking bounds.
pub const BOUND_SLACK: f64 = 1e-6;

/// Compression rate of one encoded sequence against its information
/// content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub n_symbols: u64,
    /// Joint information content of the sequence under the model.
    pub shannon_bits: f64,
    /// Flattened length of the final message.
    pub actual_bits: u64,
    /// Effective length `log2(head) + r_t * |tail|` of the final message.
    pub effective_bits: f64,
    pub epsilon: f64,
    pub head_bits: u32,
    pub word_bits: u32,
    pub precision: u32,
}

impl RateReport {
    /// `shannon_bits + N * epsilon + r_s`, the guaranteed ceiling on
    /// `actual_bits`.
    pub fn bound_bits(&self) -> f64 {
        self.shannon_bits + self.n_symbols as f64 * self.epsilon + f64::from(self.head_bits)
    }

    /// `shannon_bits + N * epsilon + r_s - r_t`, the ceiling on
    /// `effective_bits`.
    pub fn effective_bound_bits(&self) -> f64 {
        self.bound_bits() - f64::from(self.word_bits)
    }
}

/// Margins of a [`RateReport`] against both length bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// `bound_bits - actual_bits`.
    pub flat_margin: f64,
    /// `effective_bound_bits - effective_bits`.
    pub effective_margin: f64,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.flat_margin >= -BOUND_SLACK && self.effective_margin >= -BOUND_SLACK
    }
}

pub fn verify_bound(report: &RateReport) -> BoundCheck {
    BoundCheck {
        flat_margin: report.bound_bits() - report.actual_bits as f64,
        effective_margin: report.effective_bound_bits() - report.effective_bits,
    }
}

fn check_precision<M: SymbolModel>(model: &M, params: &CodecParams) -> Result<()> {
    if model.precision() != params.precision() {
        return Err(Error::PrecisionMismatch {
            model: model.precision(),
            codec: params.precision(),
        });
    }
    Ok(())
}

/// Encodes `data` starting from the empty message.
///
/// `model` is advanced through the whole sequence.
pub fn encode<M: SymbolModel>(
    data: &[usize],
    model: &mut M,
    params: CodecParams,
) -> Result<(Message, RateReport)> {
    encode_inspect(data, model, params, |_, _| {})
}

/// Like [`encode`], calling `inspect` after every push with the push trace
/// and the message it produced.
pub fn encode_inspect<M: SymbolModel>(
    data: &[usize],
    model: &mut M,
    params: CodecParams,
    mut inspect: impl FnMut(&PushTrace, &Message),
) -> Result<(Message, RateReport)> {
    check_precision(model, &params)?;

    let mut schedule: Vec<Slot> = Vec::with_capacity(data.len());
    let mut shannon_bits = 0.0;
    for &symbol in data {
        let slot = model.distribution().slot_from_symbol(symbol)?;
        shannon_bits += slot.information(params.precision());
        schedule.push(slot);
        model.observe(symbol)?;
    }

    let mut message = Message::new(params);
    for &slot in schedule.iter().rev() {
        let trace = message.push_traced(slot)?;
        inspect(&trace, &message);
    }

    let report = RateReport {
        n_symbols: data.len() as u64,
        shannon_bits,
        actual_bits: message.length(),
        effective_bits: message.effective_length(),
        epsilon: params.epsilon(),
        head_bits: params.head_bits(),
        word_bits: params.word_bits(),
        precision: params.precision(),
    };
    Ok((message, report))
}

/// Result of [`decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub symbols: Vec<usize>,
    /// The message left over after the last pop.
    pub remainder: Message,
}

impl Decoded {
    /// `true` if decoding consumed the message exactly back to the empty
    /// message, which is what a stream produced by [`encode`] does.
    pub fn clean_end(&self) -> bool {
        self.remainder.is_initial()
    }
}

/// Decodes `n_symbols` symbols off `message` in forward order.
///
/// `model` must start from the same state the encoder's model did.
pub fn decode<M: SymbolModel>(
    message: Message,
    n_symbols: usize,
    model: &mut M,
) -> Result<Decoded> {
    check_precision(model, message.params())?;
    let mut message = message;
    let mut symbols = Vec::with_capacity(n_symbols.min(MAX_PREALLOCATED));
    for _ in 0..n_symbols {
        let dist = model.distribution();
        let slot = message.pop(|bar| dist.slot_from_bar(bar))?;
        symbols.push(slot.symbol);
        model.observe(slot.symbol)?;
    }
    Ok(Decoded {
        symbols,
        remainder: message,
    })
}

/// One step of [`decode_inspect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopEvent {
    pub slot: Slot,
    pub effective_before: f64,
    pub effective_after: f64,
    pub head_after: u64,
}

/// Like [`decode`], reporting each pop's effect on the effective length.
pub fn decode_inspect<M: SymbolModel>(
    message: Message,
    n_symbols: usize,
    model: &mut M,
    mut inspect: impl FnMut(&PopEvent),
) -> Result<Decoded> {
    check_precision(model, message.params())?;
    let mut message = message;
    let mut symbols = Vec::with_capacity(n_symbols.min(MAX_PREALLOCATED));
    for _ in 0..n_symbols {
        let effective_before = message.effective_length();
        let dist = model.distribution();
        let slot = message.pop(|bar| dist.slot_from_bar(bar))?;
        inspect(&PopEvent {
            slot,
            effective_before,
            effective_after: message.effective_length(),
            head_after: message.head(),
        });
        symbols.push(slot.symbol);
        model.observe(slot.symbol)?;
    }
    Ok(Decoded {
        symbols,
        remainder: message,
    })
}
