//! Built-in invariant checks, runnable from the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::message::{decode_head, encode_head, rank_within_symbol, Message};
use crate::models::{AdaptiveOrder0, AnyModel, QuantizedDistribution, StaticModel};
use crate::params::CodecParams;
use crate::stream::{decode_inspect, encode_inspect, verify_bound};

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Randomized stream trials per parameter set.
    pub trials: usize,
    /// Corrupts every pushed message before popping it again. Used to check
    /// that the suite notices a broken codec.
    pub inject_fault: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            trials: 200,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn total_cases(&self) -> u64 {
        self.checks.iter().map(|c| c.cases).sum()
    }
}

/// The four-symbol distribution with weights `[1, 2, 3, 2]` at precision 3.
pub fn example_distribution() -> QuantizedDistribution {
    QuantizedDistribution::from_weights(vec![1, 2, 3, 2], 3).expect("weights sum to 8")
}

pub fn run(options: &SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let checks = vec![
        bijection(),
        roundtrip_small(&mut rng, options.inject_fault),
        tiling(&mut rng),
        density(),
        quantize_scale_invariance(&mut rng),
        streams(&mut rng, CodecParams::small(), options.trials),
        streams(&mut rng, CodecParams::default(), options.trials),
    ];
    SelftestReport { checks }
}

fn bijection() -> CheckResult {
    let params = CodecParams::small();
    let dist = example_distribution();
    let mut seen = vec![false; 4 << 16];
    let mut result = CheckResult {
        name: "bijection at (16, 8, 3)",
        cases: 0,
        failures: 0,
    };
    for head in params.head_lower()..(params.head_upper() as u64) {
        result.cases += 1;
        let ok = match decode_head(head, |bar| dist.slot_from_bar(bar), &params) {
            Ok((new_head, slot)) => {
                let key = (new_head as usize) * 4 + slot.symbol;
                let fresh = !std::mem::replace(&mut seen[key], true);
                let drop = (head as f64).log2() - (new_head as f64).log2();
                fresh
                    && encode_head(new_head, slot, &params) == Ok(head)
                    && drop <= slot.information(3) + params.epsilon() + 1e-9
            }
            Err(_) => false,
        };
        result.failures += u64::from(!ok);
    }
    result
}

fn roundtrip_small(rng: &mut ChaCha8Rng, inject_fault: bool) -> CheckResult {
    let params = CodecParams::small();
    let dist = example_distribution();
    let mut result = CheckResult {
        name: "push/pop inverse at (16, 8, 3)",
        cases: 0,
        failures: 0,
    };
    for head in params.head_lower()..(params.head_upper() as u64) {
        let tail: Vec<u64> = (0..rng.gen_range(0..=3))
            .map(|_| rng.gen_range(0..256))
            .collect();
        let m = Message::from_parts(params, head, tail).expect("head in range");

        for symbol in 0..4 {
            result.cases += 1;
            let slot = dist.slot_from_symbol(symbol).expect("symbol in alphabet");
            let mut pushed = m.clone();
            let mut ok = pushed.push(slot).is_ok() && params.head_in_range(pushed.head());
            if inject_fault {
                let (h, t) = pushed.into_parts();
                pushed = Message::from_parts(params, h ^ 1, t).expect("flip keeps range");
            }
            ok &= pushed.pop(|bar| dist.slot_from_bar(bar)) == Ok(slot) && pushed == m;
            result.failures += u64::from(!ok);
        }

        result.cases += 1;
        let mut popped = m.clone();
        let ok = match popped.pop(|bar| dist.slot_from_bar(bar)) {
            Ok(slot) => popped.push(slot).is_ok() && popped == m,
            // a short tail can legitimately run dry
            Err(crate::Error::TailUnderflow) => true,
            Err(_) => false,
        };
        result.failures += u64::from(!ok);
    }
    result
}

fn random_distribution(
    rng: &mut ChaCha8Rng,
    max_alphabet: usize,
    precision: u32,
) -> QuantizedDistribution {
    let size = rng.gen_range(1..=max_alphabet.min(1 << precision));
    let counts: Vec<u64> = (0..size)
        .map(|_| match rng.gen_range(0..4) {
            0 => 0,
            1 => rng.gen_range(0..1000),
            _ => rng.gen_range(0..10),
        })
        .collect();
    let counts = if counts.iter().all(|&c| c == 0) {
        vec![1; size]
    } else {
        counts
    };
    QuantizedDistribution::quantize_counts(&counts, precision).expect("valid counts")
}

fn tiling(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut result = CheckResult {
        name: "interval tiling",
        cases: 0,
        failures: 0,
    };
    for precision in 1..=12 {
        for _ in 0..4 {
            let dist = random_distribution(rng, 300, precision);
            let tabled = dist.clone().with_lookup_table();
            for bar in 0..1u64 << precision {
                result.cases += 1;
                let slot = dist.slot_from_bar(bar);
                let ok = slot.cumulative <= bar
                    && bar < slot.cumulative + slot.weight
                    && tabled.slot_from_bar(bar) == slot
                    && dist.slot_from_symbol(slot.symbol) == Ok(slot);
                result.failures += u64::from(!ok);
            }
        }
    }
    result
}

fn density() -> CheckResult {
    let dist = example_distribution();
    let mut result = CheckResult {
        name: "density of decoded symbols",
        cases: 0,
        failures: 0,
    };
    let mut counts = [0u64; 4];
    for s in 1..=4096u64 {
        let n = s - 1;
        let (rank, slot) = rank_within_symbol(n, |bar| dist.slot_from_bar(bar), 3);
        result.cases += 1;
        result.failures += u64::from(rank != counts[slot.symbol]);
        counts[slot.symbol] += 1;
        for (x, &count) in counts.iter().enumerate() {
            let p = dist.weights()[x];
            result.cases += 1;
            let gap = (count as f64 / s as f64 - dist.probability(x)).abs();
            let mut ok = gap <= p as f64 / s as f64 + 1e-12;
            if s % 8 == 0 {
                ok &= count == (s / 8) * p;
            }
            result.failures += u64::from(!ok);
        }
    }
    result
}

fn quantize_scale_invariance(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut result = CheckResult {
        name: "quantization scale invariance",
        cases: 0,
        failures: 0,
    };
    for _ in 0..500 {
        let size = rng.gen_range(1..=64);
        let mut counts: Vec<u64> = (0..size).map(|_| rng.gen_range(0..50)).collect();
        counts[0] += 1;
        let precision = rng.gen_range(6..=16);
        let a = QuantizedDistribution::quantize_counts(&counts, precision);
        let scaled: Vec<u64> = counts.iter().map(|c| c * 7).collect();
        let b = QuantizedDistribution::quantize_counts(&scaled, precision);
        result.cases += 1;
        let ok = matches!((&a, &b), (Ok(a), Ok(b)) if a.weights() == b.weights()
            && a.weights().iter().sum::<u64>() == 1 << precision
            && a.weights().iter().all(|&w| w >= 1));
        result.failures += u64::from(!ok);
    }
    result
}

fn streams(rng: &mut ChaCha8Rng, params: CodecParams, trials: usize) -> CheckResult {
    let mut result = CheckResult {
        name: if params == CodecParams::small() {
            "stream roundtrip and rate bounds at (16, 8, 3)"
        } else {
            "stream roundtrip and rate bounds at (64, 32, 16)"
        },
        cases: 0,
        failures: 0,
    };
    let precision = params.precision();
    for trial in 0..trials {
        let dist = random_distribution(rng, 256, precision);
        let len = rng.gen_range(0..=1024);
        let data: Vec<usize> = (0..len)
            .map(|_| {
                dist.slot_from_bar(rng.gen_range(0..1u64 << precision))
                    .symbol
            })
            .collect();
        let spec_model = |adaptive: bool| -> AnyModel {
            if adaptive {
                AnyModel::AdaptiveOrder0(
                    AdaptiveOrder0::new(dist.alphabet_size(), precision).expect("alphabet fits"),
                )
            } else {
                AnyModel::Static(StaticModel::new(dist.clone()))
            }
        };
        let adaptive = trial % 2 == 1;

        result.cases += 1;
        let mut landed = true;
        let encoded = encode_inspect(&data, &mut spec_model(adaptive), params, |trace, m| {
            landed &= trace.landed(m.tail().last().copied(), &params);
        });
        let Ok((message, report)) = encoded else {
            result.failures += 1;
            continue;
        };
        let mut per_pop = true;
        let mut decoder = spec_model(adaptive);
        let decoded = decode_inspect(message, len, &mut decoder, |event| {
            let h = event.slot.information(precision);
            per_pop &=
                event.effective_before - event.effective_after <= h + params.epsilon() + 1e-9;
            per_pop &= params.head_in_range(event.head_after);
        });
        let ok = landed
            && per_pop
            && verify_bound(&report).passed()
            && matches!(decoded, Ok(d) if d.symbols == data && d.clean_end());
        result.failures += u64::from(!ok);
    }
    result
}
