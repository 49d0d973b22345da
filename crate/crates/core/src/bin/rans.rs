use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stack_rans::bytes::{compress_bytes, decompress_bytes, ModelKind};
use stack_rans::selftest::{self, SelftestOptions};
use stack_rans::stream::verify_bound;
use stack_rans::{CodecParams, Container, RateReport};

const EXIT_USAGE: u8 = 1;
const EXIT_CORRUPT: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

#[derive(Parser)]
#[command(name = "rans", version, about = "Stack-based rANS compressor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a container
    Compress(CodecArgs),
    /// Restore the original bytes from a container
    Decompress(CodecArgs),
    /// Report compression rate against the length bound without writing output
    Stats(CodecArgs),
    /// Run the built-in invariant checks
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct CodecArgs {
    input: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelArg::Static)]
    model: ModelArg,
    /// Head width in bits
    #[arg(long)]
    rs: Option<u32>,
    /// Tail word width in bits
    #[arg(long)]
    rt: Option<u32>,
    /// Probability precision in bits
    #[arg(long)]
    r: Option<u32>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Human)]
    stats_format: StatsFormat,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = SelftestOptions::default().trials)]
    trials: usize,
    #[arg(long, default_value_t = SelftestOptions::default().seed)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Static,
    Adaptive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsFormat {
    Human,
    /// Newline-delimited key=value pairs
    Kv,
}

enum Failure {
    Usage(String),
    Corrupt(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl CodecArgs {
    fn params(&self) -> Result<CodecParams, Failure> {
        CodecParams::new(
            self.rs.unwrap_or(CodecParams::DEFAULT_HEAD_BITS),
            self.rt.unwrap_or(CodecParams::DEFAULT_WORD_BITS),
            self.r.unwrap_or(CodecParams::DEFAULT_PRECISION),
        )
        .map_err(|e| Failure::Usage(e.to_string()))
    }

    fn kind(&self) -> ModelKind {
        match self.model {
            ModelArg::Static => ModelKind::Static,
            ModelArg::Adaptive => ModelKind::Adaptive,
        }
    }
}

fn default_output(input: &Path, decompress: bool) -> PathBuf {
    let name = input.as_os_str().to_string_lossy();
    match (decompress, name.strip_suffix(".rans")) {
        (true, Some(stem)) if !stem.is_empty() => PathBuf::from(stem),
        (true, _) => PathBuf::from(format!("{name}.out")),
        (false, _) => PathBuf::from(format!("{name}.rans")),
    }
}

fn print_report(
    out: &mut impl Write,
    format: StatsFormat,
    report: &RateReport,
    model: &str,
    container_bytes: usize,
) -> io::Result<()> {
    let check = verify_bound(report);
    let rows: [(&str, String); 13] = [
        ("model", model.to_string()),
        ("r_s", report.head_bits.to_string()),
        ("r_t", report.word_bits.to_string()),
        ("r", report.precision.to_string()),
        ("n_symbols", report.n_symbols.to_string()),
        ("shannon_bits", format!("{:.6}", report.shannon_bits)),
        ("actual_bits", report.actual_bits.to_string()),
        ("effective_bits", format!("{:.6}", report.effective_bits)),
        ("epsilon", format!("{:.6e}", report.epsilon)),
        ("bound_bits", format!("{:.6}", report.bound_bits())),
        ("margin_bits", format!("{:.6}", check.flat_margin)),
        (
            "effective_margin_bits",
            format!("{:.6}", check.effective_margin),
        ),
        ("container_bytes", container_bytes.to_string()),
    ];
    for (key, value) in rows {
        match format {
            StatsFormat::Kv => writeln!(out, "{key}={value}")?,
            StatsFormat::Human => writeln!(out, "{key:<22} {value}")?,
        }
    }
    let verdict = if check.passed() { "pass" } else { "FAIL" };
    match format {
        StatsFormat::Kv => writeln!(out, "bound_check={verdict}"),
        StatsFormat::Human => writeln!(out, "{:<22} {verdict}", "bound_check"),
    }
}

fn compress(args: &CodecArgs, write_output: bool) -> Result<(), Failure> {
    let params = args.params()?;
    let data = fs::read(&args.input)?;
    let (container, report) =
        compress_bytes(&data, args.kind(), params).map_err(|e| Failure::Usage(e.to_string()))?;
    let bytes = container
        .to_bytes()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if write_output {
        let path = args
            .output
            .clone()
            .unwrap_or_else(|| default_output(&args.input, false));
        fs::write(path, &bytes)?;
    }
    let mut out = io::stdout().lock();
    print_report(
        &mut out,
        args.stats_format,
        &report,
        container.model.name(),
        bytes.len(),
    )?;
    Ok(())
}

fn decompress(args: &CodecArgs) -> Result<(), Failure> {
    let bytes = fs::read(&args.input)?;
    let container = Container::from_bytes(&bytes).map_err(|e| Failure::Corrupt(e.to_string()))?;
    let header = container.params;
    let flag_mismatch = args.rs.is_some_and(|v| v != header.head_bits())
        || args.rt.is_some_and(|v| v != header.word_bits())
        || args.r.is_some_and(|v| v != header.precision());
    if flag_mismatch {
        eprintln!("warning: parameter flags ignored, container header says {header}");
    }
    let restored = decompress_bytes(&container).map_err(|e| Failure::Corrupt(e.to_string()))?;
    if !restored.clean_end {
        eprintln!("warning: stream did not end in the initial message; output may be corrupt");
    }
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| default_output(&args.input, true));
    fs::write(path, restored.data)?;
    Ok(())
}

fn run_selftest(args: &SelftestArgs) -> ExitCode {
    let report = selftest::run(&SelftestOptions {
        seed: args.seed,
        trials: args.trials,
        inject_fault: args.inject_fault,
    });
    for check in &report.checks {
        let verdict = if check.passed() { "ok  " } else { "FAIL" };
        println!(
            "{verdict} {:<50} {:>9} cases {:>7} failures",
            check.name, check.cases, check.failures
        );
    }
    println!(
        "{} checks, {} cases: {}",
        report.checks.len(),
        report.total_cases(),
        if report.passed() { "pass" } else { "FAIL" }
    );
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Compress(args) => compress(args, true),
        Command::Stats(args) => compress(args, false),
        Command::Decompress(args) => decompress(args),
        Command::Selftest(args) => return run_selftest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Corrupt(msg)) => {
            eprintln!("error: corrupt input: {msg}");
            ExitCode::from(EXIT_CORRUPT)
        }
    }
}
