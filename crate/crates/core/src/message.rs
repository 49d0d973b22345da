//! The stack codec over a single message.
//!
//! A [`Message`] is a head integer plus a stack of fixed-width tail words.
//! [`Message::pop`] decodes one symbol off the message and
//! [`Message::push`] encodes one onto it; the two are exact inverses, so
//! symbols come back out in the reverse of the order they went in.
//!
//! The lower-level steps are exposed as free functions so that they can be
//! tested and instrumented on their own:
//!
//! * [`decode_head`] / [`encode_head`]: the bijection between a head and a
//!   (smaller head, symbol) pair,
//! * [`renorm`] / [`renorm_inverse`]: moving whole words between the head
//!   and the tail.

use crate::error::{Error, Result};
use crate::params::CodecParams;

/// A symbol together with its quantized weight and cumulative weight.
///
/// The symbol owns the sub-interval `[cumulative, cumulative + weight)` of
/// `[0, 2^precision)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub symbol: usize,
    pub weight: u64,
    pub cumulative: u64,
}

impl Slot {
    pub fn new(symbol: usize, weight: u64, cumulative: u64) -> Self {
        Self {
            symbol,
            weight,
            cumulative,
        }
    }

    /// Information content `log2(2^precision / weight)` in bits.
    pub fn information(&self, precision: u32) -> f64 {
        f64::from(precision) - (self.weight as f64).log2()
    }

    #[inline]
    fn check(&self, params: &CodecParams) -> Result<()> {
        let total = params.total_weight();
        if self.weight == 0 || self.cumulative >= total || self.weight > total - self.cumulative {
            return Err(Error::InvalidSlot {
                weight: self.weight,
                cumulative: self.cumulative,
                precision: params.precision(),
            });
        }
        Ok(())
    }

    #[inline]
    fn contains(&self, bar: u64) -> bool {
        self.cumulative <= bar && bar - self.cumulative < self.weight
    }
}

fn head_out_of_range(head: u64, params: &CodecParams) -> Error {
    Error::HeadOutOfRange {
        head,
        head_bits: params.head_bits(),
        word_bits: params.word_bits(),
    }
}

/// Splits a head into a symbol and a smaller head.
///
/// `lookup` maps `head mod 2^r` to the slot whose interval contains it. The
/// returned head is `weight * (head / 2^r) + (head mod 2^r) - cumulative`,
/// i.e. the index of `head` among all integers that decode to the same
/// symbol.
pub fn decode_head(
    head: u64,
    lookup: impl FnOnce(u64) -> Slot,
    params: &CodecParams,
) -> Result<(u64, Slot)> {
    if !params.head_in_range(head) {
        return Err(head_out_of_range(head, params));
    }
    let bar = head & params.bar_mask();
    let slot = lookup(bar);
    slot.check(params)?;
    if !slot.contains(bar) {
        return Err(Error::InvalidSlot {
            weight: slot.weight,
            cumulative: slot.cumulative,
            precision: params.precision(),
        });
    }
    // weight <= 2^r and head >> r < 2^(r_s - r): the product stays below 2^r_s
    let new_head = slot.weight * (head >> params.precision()) + bar - slot.cumulative;
    Ok((new_head, slot))
}

/// The unconstrained bijection on all naturals: returns the symbol `n`
/// decodes to and the number of integers below `n` that decode to the same
/// symbol.
///
/// [`decode_head`] is this map restricted to valid heads.
pub fn rank_within_symbol(n: u64, lookup: impl FnOnce(u64) -> Slot, precision: u32) -> (u64, Slot) {
    let bar = n & ((1u64 << precision) - 1);
    let slot = lookup(bar);
    (slot.weight * (n >> precision) + bar - slot.cumulative, slot)
}

/// Inverse of [`decode_head`] for a known slot.
///
/// `new_head` must already lie in `[weight * 2^(r_s - r_t - r), weight * 2^(r_s - r))`;
/// [`renorm_inverse`] establishes that.
pub fn encode_head(new_head: u64, slot: Slot, params: &CodecParams) -> Result<u64> {
    slot.check(params)?;
    let (lower, upper) = landing_interval(slot.weight, params);
    let wide = u128::from(new_head);
    if wide < lower || wide >= upper {
        return Err(Error::HeadNotRenormalized {
            head: new_head,
            weight: slot.weight,
            lower,
            upper,
        });
    }
    Ok(((new_head / slot.weight) << params.precision()) + new_head % slot.weight + slot.cumulative)
}

/// The interval `[weight * 2^(r_s - r_t - r), weight * 2^(r_s - r))` a head
/// must occupy before a symbol of `weight` can be encoded onto it.
#[inline]
pub fn landing_interval(weight: u64, params: &CodecParams) -> (u128, u128) {
    let shift = params.head_bits() - params.precision();
    let lower = u128::from(weight) << (shift - params.word_bits());
    let upper = u128::from(weight) << shift;
    (lower, upper)
}

/// Refills the head from the tail until it is at least `2^(r_s - r_t)`.
///
/// The top word of the tail becomes the low word of the head on every
/// iteration. Fails with [`Error::TailUnderflow`] if the tail runs dry
/// first; the tail is left partially consumed in that case.
#[inline]
pub fn renorm(mut head: u64, tail: &mut Vec<u64>, params: &CodecParams) -> Result<u64> {
    let lower = params.head_lower();
    while head < lower {
        let word = tail.pop().ok_or(Error::TailUnderflow)?;
        head = (head << params.word_bits()) | word;
    }
    Ok(head)
}

/// Spills low words of the head onto the tail until the head is below
/// `weight * 2^(r_s - r)`.
///
/// Starting from a head in `[2^(r_s - r_t), 2^r_s)`, the loop lands in the
/// interval returned by [`landing_interval`] and stops there.
#[inline]
pub fn renorm_inverse(
    mut head: u64,
    tail: &mut Vec<u64>,
    weight: u64,
    params: &CodecParams,
) -> u64 {
    let (_, upper) = landing_interval(weight, params);
    while u128::from(head) >= upper {
        tail.push(head & params.word_mask());
        head >>= params.word_bits();
    }
    head
}

/// What a single [`Message::push_traced`] did during renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PushTrace {
    /// Number of words moved from the head to the tail.
    pub words_spilled: usize,
    /// Head after renormalization and before the symbol was folded in.
    pub renormed_head: u64,
    pub weight: u64,
}

impl PushTrace {
    /// `true` if the renormalized head lies in the landing interval and the
    /// loop stopped at the first opportunity.
    pub fn landed(&self, spilled_word: Option<u64>, params: &CodecParams) -> bool {
        let (lower, upper) = landing_interval(self.weight, params);
        let head = u128::from(self.renormed_head);
        if head < lower || head >= upper {
            return false;
        }
        match (self.words_spilled, spilled_word) {
            (0, _) => true,
            // undoing the last spill must put the head back above the guard
            (_, Some(word)) => ((head << params.word_bits()) | u128::from(word)) >= upper,
            (_, None) => false,
        }
    }
}

/// Codec state: an `r_s`-bit head and a stack of `r_t`-bit tail words.
///
/// The tail is stored bottom first; the top of the stack is the last
/// element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    params: CodecParams,
    head: u64,
    tail: Vec<u64>,
}

impl Message {
    /// The empty message: head `2^(r_s - r_t)` and no tail.
    pub fn new(params: CodecParams) -> Self {
        Self {
            head: params.head_lower(),
            tail: Vec::new(),
            params,
        }
    }

    /// Builds a message from raw parts, checking the head range and that
    /// every word fits in `r_t` bits. `tail` is bottom first.
    pub fn from_parts(params: CodecParams, head: u64, tail: Vec<u64>) -> Result<Self> {
        if !params.head_in_range(head) {
            return Err(head_out_of_range(head, &params));
        }
        if let Some(&word) = tail.iter().find(|&&w| w > params.word_mask()) {
            return Err(Error::WordOutOfRange {
                word,
                word_bits: params.word_bits(),
            });
        }
        Ok(Self { params, head, tail })
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn head(&self) -> u64 {
        self.head
    }

    /// Tail words, bottom of the stack first.
    pub fn tail(&self) -> &[u64] {
        &self.tail
    }

    pub fn into_parts(self) -> (u64, Vec<u64>) {
        (self.head, self.tail)
    }

    /// `true` for the message returned by [`Message::new`].
    pub fn is_initial(&self) -> bool {
        self.head == self.params.head_lower() && self.tail.is_empty()
    }

    /// Length in bits when flattened: `r_s + r_t * |tail|`.
    pub fn length(&self) -> u64 {
        u64::from(self.params.head_bits())
            + u64::from(self.params.word_bits()) * self.tail.len() as u64
    }

    /// `log2(head) + r_t * |tail|`, always in `[length - r_t, length)`.
    pub fn effective_length(&self) -> f64 {
        (self.head as f64).log2() + f64::from(self.params.word_bits()) * self.tail.len() as f64
    }

    /// Decodes one symbol. `lookup` maps `head mod 2^r` to its slot.
    pub fn pop(&mut self, lookup: impl FnOnce(u64) -> Slot) -> Result<Slot> {
        let (head, slot) = decode_head(self.head, lookup, &self.params)?;
        self.head = renorm(head, &mut self.tail, &self.params)?;
        Ok(slot)
    }

    /// Encodes one symbol described by `slot`.
    pub fn push(&mut self, slot: Slot) -> Result<()> {
        self.push_traced(slot).map(|_| ())
    }

    /// Like [`Message::push`], reporting how renormalization went.
    pub fn push_traced(&mut self, slot: Slot) -> Result<PushTrace> {
        slot.check(&self.params)?;
        let before = self.tail.len();
        let renormed = renorm_inverse(self.head, &mut self.tail, slot.weight, &self.params);
        let trace = PushTrace {
            words_spilled: self.tail.len() - before,
            renormed_head: renormed,
            weight: slot.weight,
        };
        debug_assert!(trace.landed(self.tail.last().copied(), &self.params));
        self.head = encode_head(renormed, slot, &self.params)?;
        Ok(trace)
    }
}
