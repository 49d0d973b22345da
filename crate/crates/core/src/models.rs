//! Quantized probability models.
//!
//! A [`QuantizedDistribution`] assigns every symbol of an alphabet an
//! integer weight `>= 1`, with the weights summing to `2^precision`. Each
//! symbol then owns the sub-interval `[cumulative, cumulative + weight)` of
//! `[0, 2^precision)`.
//!
//! A [`SymbolModel`] hands out one such distribution per position, as a
//! function of the symbols seen so far. Encoder and decoder drive their own
//! copies of the model through the same history, so a model must be
//! deterministic.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::message::Slot;

/// Largest precision for which [`QuantizedDistribution::with_lookup_table`]
/// builds a table.
pub const MAX_TABLE_PRECISION: u32 = 16;

/// Largest precision a distribution may use.
pub const MAX_PRECISION: u32 = 62;

#[derive(Debug, Clone, Default)]
pub struct QuantizedDistribution {
    precision: u32,
    weights: Vec<u64>,
    cumulatives: Vec<u64>,
    // symbol for every value of head mod 2^r
    table: Option<Vec<u32>>,
}

impl PartialEq for QuantizedDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.precision == other.precision && self.weights == other.weights
    }
}

impl Eq for QuantizedDistribution {}

impl QuantizedDistribution {
    /// Wraps explicit weights. Every weight must be at least 1 and they must
    /// sum to exactly `2^precision`.
    pub fn from_weights(weights: Vec<u64>, precision: u32) -> Result<Self> {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(Error::InvalidWeights(format!(
                "precision {precision} outside 1..={MAX_PRECISION}"
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty alphabet".into()));
        }
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            return Err(Error::InvalidWeights(format!("symbol {i} has zero weight")));
        }
        let sum = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| Error::InvalidWeights("weights overflow".into()))?;
        if sum != 1u64 << precision {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 2^{precision}"
            )));
        }
        let mut dist = Self {
            precision,
            weights,
            cumulatives: Vec::new(),
            table: None,
        };
        dist.rebuild_cumulatives();
        Ok(dist)
    }

    /// Quantizes nonnegative counts to weights at `precision` bits.
    ///
    /// Uses largest-remainder apportionment: every symbol starts from the
    /// floor of its exact share `count * 2^precision / total`, clamped to at
    /// least 1, and the residual is then handed out (or taken back) one unit
    /// at a time. Additions go to the symbol whose exact share most exceeds
    /// its current weight; removals come from the symbol, among those with
    /// weight above 1, whose weight most exceeds its share. Ties go to the
    /// lowest symbol index.
    pub fn quantize_counts(counts: &[u64], precision: u32) -> Result<Self> {
        let mut weights = Vec::with_capacity(counts.len());
        apportion(counts, precision, &mut weights)?;
        Self::from_weights(weights, precision)
    }

    /// Uniform distribution over `alphabet_size` symbols.
    pub fn uniform(alphabet_size: usize, precision: u32) -> Result<Self> {
        Self::quantize_counts(&vec![1; alphabet_size], precision)
    }

    /// Adds a direct `2^precision`-entry lookup table for
    /// [`slot_from_bar`](Self::slot_from_bar). Only available up to
    /// [`MAX_TABLE_PRECISION`]; above that the distribution is returned
    /// unchanged.
    pub fn with_lookup_table(mut self) -> Self {
        if self.precision <= MAX_TABLE_PRECISION {
            let mut table = Vec::with_capacity(1 << self.precision);
            for (symbol, &w) in self.weights.iter().enumerate() {
                table.extend(std::iter::repeat_n(symbol as u32, w as usize));
            }
            self.table = Some(table);
        }
        self
    }

    pub fn has_lookup_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn alphabet_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn cumulatives(&self) -> &[u64] {
        &self.cumulatives
    }

    pub fn probability(&self, symbol: usize) -> f64 {
        self.weights[symbol] as f64 / (1u64 << self.precision) as f64
    }

    /// Entropy in bits per symbol.
    pub fn entropy(&self) -> f64 {
        let total = (1u64 << self.precision) as f64;
        self.weights
            .iter()
            .map(|&w| {
                let p = w as f64 / total;
                -p * p.log2()
            })
            .sum()
    }

    /// The slot whose interval contains `bar`. `bar` must be below
    /// `2^precision`.
    #[inline]
    pub fn slot_from_bar(&self, bar: u64) -> Slot {
        debug_assert!(bar < 1u64 << self.precision);
        let symbol = match &self.table {
            Some(table) => table[bar as usize] as usize,
            None => self.cumulatives.partition_point(|&c| c <= bar) - 1,
        };
        Slot::new(symbol, self.weights[symbol], self.cumulatives[symbol])
    }

    #[inline]
    pub fn slot_from_symbol(&self, symbol: usize) -> Result<Slot> {
        match self.weights.get(symbol) {
            Some(&w) => Ok(Slot::new(symbol, w, self.cumulatives[symbol])),
            None => Err(Error::UnknownSymbol {
                symbol,
                alphabet_size: self.weights.len(),
            }),
        }
    }

    fn rebuild_cumulatives(&mut self) {
        self.cumulatives.clear();
        let mut acc = 0;
        for &w in &self.weights {
            self.cumulatives.push(acc);
            acc += w;
        }
        if self.table.is_some() {
            self.table = None;
            *self = std::mem::take(self).with_lookup_table();
        }
    }
}

/// Gap between a symbol's exact share and its weight, scaled by the count
/// total: `count * 2^r - weight * total`.
#[derive(Clone, Copy, PartialEq, Eq)]
struct Deficit {
    gap: i128,
    symbol: usize,
}

impl Ord for Deficit {
    // larger gap first, then lower index
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap
            .cmp(&other.gap)
            .then_with(|| other.symbol.cmp(&self.symbol))
    }
}

impl PartialOrd for Deficit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn apportion(counts: &[u64], precision: u32, weights: &mut Vec<u64>) -> Result<()> {
    if precision == 0 || precision > MAX_PRECISION {
        return Err(Error::InvalidWeights(format!(
            "precision {precision} outside 1..={MAX_PRECISION}"
        )));
    }
    let target = 1u64 << precision;
    if counts.len() as u128 > u128::from(target) {
        return Err(Error::AlphabetTooLarge {
            alphabet_size: counts.len(),
            precision,
        });
    }
    let total: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }

    if precision < 52
        && total < 1u128 << (52 - precision)
        && apportion_small(counts, precision, total as u64, weights)
    {
        return Ok(());
    }
    apportion_general(counts, precision, total, weights);
    Ok(())
}

/// Exact largest-remainder apportionment for `total * 2^precision < 2^52`,
/// where every share fits in an `f64` mantissa. Returns `false` when the
/// residual is negative and larger than the number of symbols that can give
/// up a unit, leaving that case to [`apportion_general`].
fn apportion_small(counts: &[u64], precision: u32, total: u64, weights: &mut Vec<u64>) -> bool {
    let inv = 1.0 / total as f64;
    weights.clear();
    // (remainder, symbol) for every symbol whose floored share is nonzero
    let mut rems: Vec<(u64, usize)> = Vec::with_capacity(counts.len());
    let mut assigned = 0u64;
    for (symbol, &count) in counts.iter().enumerate() {
        let scaled = count << precision;
        let mut q = (scaled as f64 * inv) as u64;
        while q * total > scaled {
            q -= 1;
        }
        while (q + 1) * total <= scaled {
            q += 1;
        }
        if q > 0 {
            rems.push((scaled - q * total, symbol));
        }
        let weight = q.max(1);
        assigned += weight;
        weights.push(weight);
    }

    let target = 1u64 << precision;
    if assigned < target {
        // The residual is below the number of unclamped symbols, and their
        // gaps all beat any clamped symbol's, so no symbol gets two units.
        let extra = (target - assigned) as usize;
        let by_gap_desc = |a: &(u64, usize), b: &(u64, usize)| b.0.cmp(&a.0).then(a.1.cmp(&b.1));
        if extra < rems.len() {
            rems.select_nth_unstable_by(extra - 1, by_gap_desc);
        }
        for &(_, symbol) in &rems[..extra] {
            weights[symbol] += 1;
        }
    } else if assigned > target {
        // Gaps of eligible symbols are below `total` and a second removal
        // from any symbol would cost at least `total`, so as long as there
        // are enough eligible symbols each gives up at most one unit.
        let excess = (assigned - target) as usize;
        rems.retain(|&(_, symbol)| weights[symbol] > 1);
        if excess > rems.len() {
            return false;
        }
        let by_gap_asc = |a: &(u64, usize), b: &(u64, usize)| a.0.cmp(&b.0).then(a.1.cmp(&b.1));
        if excess < rems.len() {
            rems.select_nth_unstable_by(excess - 1, by_gap_asc);
        }
        for &(_, symbol) in &rems[..excess] {
            weights[symbol] -= 1;
        }
    }
    true
}

/// Largest-remainder apportionment handing out one unit at a time through
/// a priority queue. Works for any total.
fn apportion_general(counts: &[u64], precision: u32, total: u128, weights: &mut Vec<u64>) {
    weights.clear();
    let mut gaps = Vec::with_capacity(counts.len());
    let mut assigned: u128 = 0;
    for (symbol, &count) in counts.iter().enumerate() {
        let scaled = u128::from(count) << precision;
        let weight = (scaled / total).max(1);
        assigned += weight;
        weights.push(weight as u64);
        gaps.push(Deficit {
            gap: scaled as i128 - (weight * total) as i128,
            symbol,
        });
    }

    let total = total as i128;
    let target = 1u128 << precision;
    if assigned < target {
        let mut heap = BinaryHeap::from(gaps);
        for _ in 0..target - assigned {
            let mut top = heap.peek_mut().expect("alphabet is nonempty");
            weights[top.symbol] += 1;
            top.gap -= total;
        }
    } else if assigned > target {
        // smallest gap first, lowest index on ties
        let mut heap: BinaryHeap<_> = gaps
            .into_iter()
            .filter(|d| weights[d.symbol] > 1)
            .map(|d| (Reverse(d.gap), Reverse(d.symbol)))
            .collect();
        for _ in 0..assigned - target {
            let (Reverse(gap), Reverse(symbol)) = heap
                .pop()
                .expect("total weight above target implies a weight above 1");
            weights[symbol] -= 1;
            if weights[symbol] > 1 {
                heap.push((Reverse(gap + total), Reverse(symbol)));
            }
        }
    }
}

/// Source of per-position distributions.
///
/// [`distribution`](Self::distribution) describes the next symbol given
/// every symbol passed to [`observe`](Self::observe) so far. Two models
/// constructed the same way and fed the same history must return equal
/// distributions.
pub trait SymbolModel {
    fn alphabet_size(&self) -> usize;

    fn precision(&self) -> u32;

    fn distribution(&self) -> &QuantizedDistribution;

    /// Advances the model past `symbol`.
    fn observe(&mut self, symbol: usize) -> Result<()>;

    /// Returns to the empty history.
    fn reset(&mut self);
}

impl<M: SymbolModel + ?Sized> SymbolModel for &mut M {
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }

    fn precision(&self) -> u32 {
        (**self).precision()
    }

    fn distribution(&self) -> &QuantizedDistribution {
        (**self).distribution()
    }

    fn observe(&mut self, symbol: usize) -> Result<()> {
        (**self).observe(symbol)
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}

/// The same distribution at every position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticModel {
    dist: QuantizedDistribution,
}

impl StaticModel {
    pub fn new(dist: QuantizedDistribution) -> Self {
        Self { dist }
    }

    pub fn from_counts(counts: &[u64], precision: u32) -> Result<Self> {
        Ok(Self::new(QuantizedDistribution::quantize_counts(
            counts, precision,
        )?))
    }
}

impl SymbolModel for StaticModel {
    fn alphabet_size(&self) -> usize {
        self.dist.alphabet_size()
    }

    fn precision(&self) -> u32 {
        self.dist.precision()
    }

    fn distribution(&self) -> &QuantizedDistribution {
        &self.dist
    }

    fn observe(&mut self, symbol: usize) -> Result<()> {
        if symbol >= self.dist.alphabet_size() {
            return Err(Error::UnknownSymbol {
                symbol,
                alphabet_size: self.dist.alphabet_size(),
            });
        }
        Ok(())
    }

    fn reset(&mut self) {}
}

/// Order-0 adaptive model: every symbol starts with a count of one, and each
/// observed symbol bumps its count. The distribution at each position is
/// [`QuantizedDistribution::quantize_counts`] of the current counts.
#[derive(Debug, Clone)]
pub struct AdaptiveOrder0 {
    counts: Vec<u64>,
    dist: QuantizedDistribution,
}

impl AdaptiveOrder0 {
    pub fn new(alphabet_size: usize, precision: u32) -> Result<Self> {
        let counts = vec![1; alphabet_size];
        let dist = QuantizedDistribution::quantize_counts(&counts, precision)?;
        Ok(Self { counts, dist })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl SymbolModel for AdaptiveOrder0 {
    fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    fn precision(&self) -> u32 {
        self.dist.precision
    }

    fn distribution(&self) -> &QuantizedDistribution {
        &self.dist
    }

    fn observe(&mut self, symbol: usize) -> Result<()> {
        let count = self.counts.get_mut(symbol).ok_or(Error::UnknownSymbol {
            symbol,
            alphabet_size: self.dist.alphabet_size(),
        })?;
        *count += 1;
        apportion(&self.counts, self.dist.precision, &mut self.dist.weights)?;
        self.dist.rebuild_cumulatives();
        Ok(())
    }

    fn reset(&mut self) {
        self.counts.fill(1);
        apportion(&self.counts, self.dist.precision, &mut self.dist.weights)
            .expect("initial counts were valid at construction");
        self.dist.rebuild_cumulatives();
    }
}

/// Serializable description of a model, from which fresh instances can be
/// built for encoding or decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Static(QuantizedDistribution),
    AdaptiveOrder0 { alphabet_size: usize },
}

impl ModelSpec {
    pub fn alphabet_size(&self) -> usize {
        match self {
            ModelSpec::Static(dist) => dist.alphabet_size(),
            ModelSpec::AdaptiveOrder0 { alphabet_size } => *alphabet_size,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Static(_) => "static",
            ModelSpec::AdaptiveOrder0 { .. } => "adaptive-order0",
        }
    }

    /// A model at the start of its history. `precision` is the codec's
    /// probability precision; a static distribution must already match it.
    pub fn instantiate(&self, precision: u32) -> Result<AnyModel> {
        match self {
            ModelSpec::Static(dist) => {
                if dist.precision() != precision {
                    return Err(Error::PrecisionMismatch {
                        model: dist.precision(),
                        codec: precision,
                    });
                }
                let dist = dist.clone().with_lookup_table();
                Ok(AnyModel::Static(StaticModel::new(dist)))
            }
            ModelSpec::AdaptiveOrder0 { alphabet_size } => Ok(AnyModel::AdaptiveOrder0(
                AdaptiveOrder0::new(*alphabet_size, precision)?,
            )),
        }
    }
}

/// Either built-in model.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Static(StaticModel),
    AdaptiveOrder0(AdaptiveOrder0),
}

impl SymbolModel for AnyModel {
    fn alphabet_size(&self) -> usize {
        match self {
            AnyModel::Static(m) => m.alphabet_size(),
            AnyModel::AdaptiveOrder0(m) => m.alphabet_size(),
        }
    }

    fn precision(&self) -> u32 {
        match self {
            AnyModel::Static(m) => m.precision(),
            AnyModel::AdaptiveOrder0(m) => m.precision(),
        }
    }

    fn distribution(&self) -> &QuantizedDistribution {
        match self {
            AnyModel::Static(m) => m.distribution(),
            AnyModel::AdaptiveOrder0(m) => m.distribution(),
        }
    }

    fn observe(&mut self, symbol: usize) -> Result<()> {
        match self {
            AnyModel::Static(m) => m.observe(symbol),
            AnyModel::AdaptiveOrder0(m) => m.observe(symbol),
        }
    }

    fn reset(&mut self) {
        match self {
            AnyModel::Static(m) => m.reset(),
            AnyModel::AdaptiveOrder0(m) => m.reset(),
        }
    }
}

/// Joint information content of `data` under the model's per-position
/// distributions, in bits. The model is advanced through `data`.
pub fn shannon_info<M: SymbolModel>(model: &mut M, data: &[usize]) -> Result<f64> {
    let precision = model.precision();
    let mut bits = 0.0;
    for &symbol in data {
        bits += model
            .distribution()
            .slot_from_symbol(symbol)?
            .information(precision);
        model.observe(symbol)?;
    }
    Ok(bits)
}
