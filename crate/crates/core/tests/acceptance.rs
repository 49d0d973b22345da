//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! hard criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stack_rans::bytes::{compress_bytes, decompress_bytes, ModelKind};
use stack_rans::message::{decode_head, encode_head, rank_within_symbol, PushTrace};
use stack_rans::models::AnyModel;
use stack_rans::stream::{decode_inspect, encode_inspect, verify_bound, BOUND_SLACK};
use stack_rans::{AdaptiveOrder0, CodecParams, Message, QuantizedDistribution, StaticModel};

/// Slack on the per-pop effective-length inequality.
const POP_SLACK: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// Tally of push landings for the renormalization criterion.
#[derive(Default)]
struct Landings {
    pushes: u64,
    misses: u64,
}

impl Landings {
    fn record(&mut self, trace: &PushTrace, message: &Message) {
        self.pushes += 1;
        if !trace.landed(message.tail().last().copied(), message.params()) {
            self.misses += 1;
        }
    }
}

fn fig2_weights_at(precision: u32) -> Vec<u64> {
    let scale = 1u64 << (precision - 3);
    [1, 2, 3, 2].iter().map(|w| w * scale).collect()
}

fn fig2_entropy() -> f64 {
    // 1/8 * 3 + 2/8 * 2 + 3/8 * log2(8/3) + 2/8 * 2
    3.0 / 8.0 + 0.5 + 0.5 + 3.0 / 8.0 * (8.0f64 / 3.0).log2()
}

/// Rate bound and per-pop bound over 1000 random (model, data) trials.
fn rate_trials(landings: &mut Landings) -> (Outcome, Outcome) {
    let params = CodecParams::default();
    let precision = params.precision();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_margin = f64::INFINITY;
    let mut flat_failures = 0;
    let mut pops = 0u64;
    let mut pop_failures = 0u64;
    let mut worst_pop_slack = f64::INFINITY;
    let mut roundtrip_failures = 0;

    for trial in 0..1000 {
        let alphabet = rng.gen_range(2..=256);
        let counts: Vec<u64> = (0..alphabet)
            .map(|_| match rng.gen_range(0..3) {
                0 => 0,
                1 => rng.gen_range(1..10),
                _ => rng.gen_range(1..10_000),
            })
            .collect();
        let mut counts = counts;
        counts[0] += 1;
        let source = QuantizedDistribution::quantize_counts(&counts, precision).unwrap();
        let len = rng.gen_range(0..=4096);
        let data: Vec<usize> = (0..len)
            .map(|_| {
                source
                    .slot_from_bar(rng.gen_range(0..1 << precision))
                    .symbol
            })
            .collect();

        let adaptive = trial % 2 == 1;
        let fresh = || {
            if adaptive {
                AnyModel::AdaptiveOrder0(AdaptiveOrder0::new(alphabet, precision).unwrap())
            } else {
                // a mismatched static model half the time
                let dist = if trial % 4 == 0 {
                    source.clone()
                } else {
                    QuantizedDistribution::uniform(alphabet, precision).unwrap()
                };
                AnyModel::Static(StaticModel::new(dist))
            }
        };

        let (message, report) =
            encode_inspect(&data, &mut fresh(), params, |t, m| landings.record(t, m)).unwrap();
        let margin = report.shannon_bits
            + report.n_symbols as f64 * params.epsilon()
            + f64::from(params.head_bits())
            - report.actual_bits as f64;
        worst_margin = worst_margin.min(margin);
        if margin < -BOUND_SLACK || !verify_bound(&report).passed() {
            flat_failures += 1;
        }

        let decoded = decode_inspect(message, len, &mut fresh(), |event| {
            pops += 1;
            let allowed = event.slot.information(precision) + params.epsilon();
            let drop = event.effective_before - event.effective_after;
            worst_pop_slack = worst_pop_slack.min(allowed - drop);
            if drop > allowed + POP_SLACK {
                pop_failures += 1;
            }
        })
        .unwrap();
        if decoded.symbols != data || !decoded.clean_end() {
            roundtrip_failures += 1;
        }
    }

    let rate = Outcome::new(
        flat_failures == 0 && roundtrip_failures == 0,
        format!(
            "1000 trials, {flat_failures} bound violations, {roundtrip_failures} roundtrip failures, \
             smallest margin {worst_margin:.4} bits"
        ),
    );
    let per_pop = Outcome::new(
        pop_failures == 0 && pops > 0,
        format!(
            "{pops} pops, {pop_failures} violations, smallest slack {worst_pop_slack:.3e} bits"
        ),
    );
    (rate, per_pop)
}

/// 100 000 symbols from the four-symbol example distribution.
fn near_entropy(landings: &mut Landings) -> Outcome {
    let params = CodecParams::default();
    let dist = QuantizedDistribution::from_weights(fig2_weights_at(16), 16)
        .unwrap()
        .with_lookup_table();
    let n = 100_000usize;
    let entropy = fig2_entropy();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let limit = 67.0;

    // iid sample: overhead against its own information content
    let iid: Vec<usize> = (0..n)
        .map(|_| dist.slot_from_bar(rng.gen_range(0..1 << 16)).symbol)
        .collect();
    let (message, report) =
        encode_inspect(&iid, &mut StaticModel::new(dist.clone()), params, |t, m| {
            landings.record(t, m)
        })
        .unwrap();
    let iid_overhead = report.actual_bits as f64 - report.shannon_bits;
    let iid_ok = iid_overhead < limit
        && decode_inspect(message, n, &mut StaticModel::new(dist.clone()), |_| {})
            .is_ok_and(|d| d.symbols == iid && d.clean_end());

    // sequence with exactly typical symbol frequencies, so that its
    // information content is N times the entropy
    let mut typical: Vec<usize> = [1usize, 2, 3, 2]
        .iter()
        .enumerate()
        .flat_map(|(x, &w)| std::iter::repeat_n(x, n / 8 * w))
        .collect();
    typical.shuffle(&mut rng);
    let (message, report) = encode_inspect(
        &typical,
        &mut StaticModel::new(dist.clone()),
        params,
        |t, m| landings.record(t, m),
    )
    .unwrap();
    let typical_overhead = report.actual_bits as f64 - n as f64 * entropy;
    let typical_ok = typical_overhead < limit
        && (report.shannon_bits - n as f64 * entropy).abs() < 1e-6
        && decode_inspect(message, n, &mut StaticModel::new(dist), |_| {})
            .is_ok_and(|d| d.symbols == typical && d.clean_end());

    Outcome::new(
        iid_ok && typical_ok,
        format!(
            "entropy {entropy:.4} bits/symbol; iid overhead {iid_overhead:.2} bits, \
             typical-sequence overhead {typical_overhead:.2} bits (limit {limit})"
        ),
    )
}

/// Every valid head at (16, 8, 3), with tails of 0 to 3 random words.
fn exhaustive_bijection(landings: &mut Landings) -> Outcome {
    let params = CodecParams::small();
    let dist = QuantizedDistribution::from_weights(vec![1, 2, 3, 2], 3).unwrap();
    let lookup = |bar| dist.slot_from_bar(bar);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut heads = 0u64;
    let mut bijection_failures = 0u64;
    let mut push_pop_checks = 0u64;
    let mut underflows = 0u64;
    let mut failures = 0u64;

    for head in params.head_lower()..(params.head_upper() as u64) {
        heads += 1;
        let (new_head, slot) = decode_head(head, lookup, &params).unwrap();
        if encode_head(new_head, slot, &params) != Ok(head) {
            bijection_failures += 1;
        }
        for tail_len in 0..=3 {
            let tail: Vec<u64> = (0..tail_len).map(|_| rng.gen_range(0..256)).collect();
            let m = Message::from_parts(params, head, tail).unwrap();

            let mut popped = m.clone();
            match popped.pop(lookup) {
                Ok(slot) => {
                    push_pop_checks += 1;
                    let trace = popped.push_traced(slot).unwrap();
                    landings.record(&trace, &popped);
                    failures += u64::from(popped != m);
                }
                Err(stack_rans::Error::TailUnderflow) => underflows += 1,
                Err(_) => failures += 1,
            }

            for symbol in 0..4 {
                push_pop_checks += 1;
                let slot = dist.slot_from_symbol(symbol).unwrap();
                let mut pushed = m.clone();
                let trace = pushed.push_traced(slot).unwrap();
                landings.record(&trace, &pushed);
                failures += u64::from(pushed.pop(lookup) != Ok(slot) || pushed != m);
            }
        }
    }
    Outcome::new(
        heads == 65_280 && bijection_failures == 0 && failures == 0,
        format!(
            "{heads} heads, {bijection_failures} bijection failures, {push_pop_checks} push/pop checks, \
             {failures} failures ({underflows} pops ran out of tail)"
        ),
    )
}

/// Counting oracle for the density criterion: scans intervals linearly.
fn oracle_symbol(n: u64, weights: &[u64]) -> usize {
    let mut bar = n % 8;
    for (x, &w) in weights.iter().enumerate() {
        if bar < w {
            return x;
        }
        bar -= w;
    }
    unreachable!("weights tile [0, 8)")
}

fn density() -> Outcome {
    let weights = [1u64, 2, 3, 2];
    let dist = QuantizedDistribution::from_weights(weights.to_vec(), 3).unwrap();
    let mut failures = 0u64;
    let mut checks = 0u64;
    let mut worst = 0.0f64;
    for s in 1..=4096u64 {
        let mut counts = [0u64; 4];
        for n in 0..s {
            counts[oracle_symbol(n, &weights)] += 1;
        }
        // the codec's rank of s - 1 is the number of smaller integers with the same symbol
        let (rank, slot) = rank_within_symbol(s - 1, |bar| dist.slot_from_bar(bar), 3);
        checks += 1;
        failures += u64::from(
            slot.symbol != oracle_symbol(s - 1, &weights) || rank + 1 != counts[slot.symbol],
        );
        for x in 0..4 {
            checks += 1;
            let p = weights[x] as f64 / 8.0;
            let gap = (counts[x] as f64 / s as f64 - p).abs();
            worst = worst.max(gap * s as f64 / weights[x] as f64);
            let exact_on_whole_intervals = s % 8 != 0 || counts[x] == s / 8 * weights[x];
            if gap > weights[x] as f64 / s as f64 || !exact_on_whole_intervals {
                failures += 1;
            }
        }
    }
    Outcome::new(
        failures == 0,
        format!(
            "{checks} checks over s = 1..=4096, {failures} failures, worst gap {worst:.3} of p_x/s"
        ),
    )
}

fn random_file(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let len = rng.gen_range(0..=64 * 1024);
    match rng.gen_range(0..4) {
        0 => (0..len).map(|_| rng.gen()).collect(),
        1 => {
            let skew: Vec<u8> = (0..rng.gen_range(1..20)).map(|_| rng.gen()).collect();
            (0..len)
                .map(|_| skew[rng.gen_range(0..skew.len())])
                .collect()
        }
        2 => {
            let text = b"the quick brown fox jumps over the lazy dog\n";
            (0..len)
                .map(|i| text[(i * 7 + i / 13) % text.len()])
                .collect()
        }
        _ => {
            let mut v = vec![rng.gen::<u8>(); len];
            for _ in 0..len / 100 {
                let i = rng.gen_range(0..len);
                v[i] = rng.gen();
            }
            v
        }
    }
}

fn cli_roundtrips() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_rans");
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut files: Vec<Vec<u8>> = (0..100).map(|_| random_file(&mut rng)).collect();
    files.push(fs::read(fixtures.join("golden_1k.txt")).unwrap());

    let mut runs = 0;
    let mut failures = Vec::new();
    let input = dir.path().join("input");
    let packed = dir.path().join("input.rans");
    let restored = dir.path().join("restored");
    for (i, data) in files.iter().enumerate() {
        fs::write(&input, data).unwrap();
        for model in ["static", "adaptive"] {
            runs += 1;
            let ok = Command::new(bin)
                .args(["compress", "--model", model, "--stats-format", "kv", "-o"])
                .arg(&packed)
                .arg(&input)
                .output()
                .is_ok_and(|o| o.status.success())
                && Command::new(bin)
                    .args(["decompress", "-o"])
                    .arg(&restored)
                    .arg(&packed)
                    .output()
                    .is_ok_and(|o| o.status.success() && o.stderr.is_empty())
                && fs::read(&restored).is_ok_and(|r| &r == data);
            if !ok {
                failures.push(format!("file {i} ({} bytes, {model})", data.len()));
            }
        }
    }

    // the checked-in container must decode to the checked-in plaintext
    let golden_ok = Command::new(bin)
        .args(["decompress", "-o"])
        .arg(&restored)
        .arg(fixtures.join("golden_1k.rans"))
        .output()
        .is_ok_and(|o| o.status.success())
        && fs::read(&restored).ok() == fs::read(fixtures.join("golden_1k.txt")).ok();

    Outcome::new(
        failures.is_empty() && golden_ok,
        format!(
            "{runs} compress/decompress runs, {} failures{}, golden fixture {}",
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" ({})", failures.join(", "))
            },
            if golden_ok { "ok" } else { "MISMATCH" }
        ),
    )
}

fn throughput() -> (Outcome, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<u8> = (0..1 << 20)
        .map(|_| {
            let r: f64 = rng.gen();
            (r * r * 64.0) as u8
        })
        .collect();
    let start = Instant::now();
    let (container, _) = compress_bytes(&data, ModelKind::Static, CodecParams::default()).unwrap();
    let restored = decompress_bytes(&container).unwrap();
    let elapsed = start.elapsed();
    let ok = restored.data == data && restored.clean_end;
    (
        Outcome::new(
            ok,
            format!(
                "1 MiB static encode+decode in {:.3} s (target < 2 s)",
                elapsed.as_secs_f64()
            ),
        ),
        elapsed,
    )
}

fn main() -> ExitCode {
    let mut all_passed = true;
    let mut report =
        |id: &str, name: &str, outcome: Outcome, elapsed: Duration, limit: Option<f64>| {
            let within_time = limit.is_none_or(|l| elapsed.as_secs_f64() < l);
            let passed = outcome.passed && within_time;
            all_passed &= passed;
            let limit = limit.map(|l| format!(" / {l} s")).unwrap_or_default();
            println!(
                "criterion {id} {}: {name}: {} [{:.2} s{limit}]",
                if passed { "PASS" } else { "FAIL" },
                outcome.detail,
                elapsed.as_secs_f64(),
            );
        };

    let mut landings = Landings::default();

    let start = Instant::now();
    let (rate, per_pop) = rate_trials(&mut landings);
    let elapsed = start.elapsed();
    report(
        "1",
        "flat length bound l(m0) <= h + N*eps + r_s",
        rate,
        elapsed,
        Some(30.0),
    );

    let start = Instant::now();
    let outcome = near_entropy(&mut landings);
    report(
        "2",
        "near-entropy compression",
        outcome,
        start.elapsed(),
        Some(5.0),
    );

    let start = Instant::now();
    let outcome = exhaustive_bijection(&mut landings);
    report(
        "3",
        "exhaustive bijection at (16, 8, 3)",
        outcome,
        start.elapsed(),
        Some(10.0),
    );

    report(
        "4",
        "per-pop effective length bound",
        per_pop,
        elapsed,
        None,
    );

    let outcome = Outcome::new(
        landings.misses == 0 && landings.pushes > 0,
        format!(
            "{} pushes, {} outside the landing interval",
            landings.pushes, landings.misses
        ),
    );
    report(
        "5",
        "renormalization lands in the encodable interval",
        outcome,
        Duration::ZERO,
        None,
    );

    let start = Instant::now();
    let outcome = density();
    report(
        "6",
        "density of decoded symbols",
        outcome,
        start.elapsed(),
        None,
    );

    let start = Instant::now();
    let outcome = cli_roundtrips();
    report(
        "7",
        "lossless CLI round trip",
        outcome,
        start.elapsed(),
        Some(60.0),
    );

    // tracked, not a hard failure
    let (outcome, elapsed) = throughput();
    let label = if !outcome.passed {
        all_passed = false;
        "FAIL"
    } else if elapsed.as_secs_f64() < 2.0 {
        "PASS"
    } else {
        "WARN"
    };
    println!("criterion 8 {label}: throughput: {}", outcome.detail);

    if all_passed {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
