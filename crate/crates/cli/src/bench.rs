//! Benchmark harness: warm-up passes, timed passes, min and mean.

use std::fs;
use std::hint::black_box;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;
use lanecode::corpus::{self, Corpus, CorpusSpec};
use lanecode::engine::{self, Direction};
use lanecode::{EngineKind, TranscodeOutcome, Transcoder};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Engines to time, comma separated; defaults to every available engine.
    #[arg(long, value_delimiter = ',')]
    pub engine: Vec<EngineKind>,
    /// A file path, or a corpus spec `class:size[:seed]`.
    #[arg(long = "in")]
    pub input: String,
    /// Encoding of an input file; generated corpora are timed in both directions.
    #[arg(long, default_value = "utf8")]
    pub format: String,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,
    /// Also append JSON records to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Do not pin the process to one CPU.
    #[arg(long)]
    pub no_pin: bool,
}

#[derive(Debug)]
pub enum BenchError {
    Usage(String),
    Mismatch(String),
}

/// One engine on one input in one direction.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub input: String,
    pub direction: String,
    pub engine: String,
    pub version: &'static str,
    pub bytes: usize,
    pub chars: usize,
    pub iterations: usize,
    pub warmup: usize,
    pub min_ns: u128,
    pub mean_ns: u128,
    /// Input bytes per second at the minimum time; `None` if the minimum is 0 ns.
    pub bytes_per_sec: Option<f64>,
    pub chars_per_sec: Option<f64>,
    /// (mean - min) / min.
    pub min_mean_gap: Option<f64>,
    /// Whether the gap is under 1%.
    pub gap_ok: bool,
    pub clock_resolution_ns: u128,
}

impl BenchReport {
    fn human(&self) -> String {
        let rate = |x: Option<f64>, unit: &str| match x {
            Some(v) => format!("{:.3} G{unit}/s", v / 1e9),
            None => "n/a".to_string(),
        };
        format!(
            "{:<12} {:<14} {:>10} B  min {:>10.3} us  mean {:>10.3} us  {}  {}  gap {}{}",
            self.engine,
            self.direction,
            self.bytes,
            self.min_ns as f64 / 1e3,
            self.mean_ns as f64 / 1e3,
            rate(self.bytes_per_sec, "B"),
            rate(self.chars_per_sec, "char"),
            self.min_mean_gap
                .map_or("n/a".to_string(), |g| format!("{:.2}%", g * 100.0)),
            if self.gap_ok { "" } else { " (noisy)" },
        )
    }
}

/// Smallest observable step of the monotonic clock.
pub fn clock_resolution() -> Duration {
    #[cfg(unix)]
    {
        let mut ts = libc::timespec {
            tv_sec: 0,
            tv_nsec: 0,
        };
        // SAFETY: ts is a valid out-pointer.
        if unsafe { libc::clock_getres(libc::CLOCK_MONOTONIC, &mut ts) } == 0 {
            return Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32);
        }
    }
    let mut best = Duration::MAX;
    for _ in 0..1000 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

/// Pins the process to the CPU it is running on. Returns whether it worked.
pub fn pin_to_current_cpu() -> bool {
    #[cfg(target_os = "linux")]
    {
        // SAFETY: plain libc calls on a zeroed cpu_set_t.
        unsafe {
            let cpu = libc::sched_getcpu();
            if cpu < 0 {
                return false;
            }
            let mut set: libc::cpu_set_t = std::mem::zeroed();
            libc::CPU_SET(cpu as usize, &mut set);
            libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
        }
    }
    #[cfg(not(target_os = "linux"))]
    {
        false
    }
}

/// Result of one pass, kept to compare engines.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PassOutput {
    outcome: TranscodeOutcome,
    payload: Vec<u8>,
}

fn one_pass(
    t: &Transcoder,
    direction: Direction,
    c: &Corpus,
    buf16: &mut [u16],
    buf8: &mut [u8],
) -> TranscodeOutcome {
    match direction {
        Direction::Utf8ToUtf16 => t.utf8_to_utf16(black_box(&c.utf8), buf16),
        Direction::Utf16ToUtf8 => t.utf16_to_utf8(black_box(&c.utf16), buf8),
    }
}

/// Times `engines` on `corpus` in `direction`. Fails if any engine's output
/// differs from the first engine's.
pub fn measure(
    label: &str,
    corpus: &Corpus,
    direction: Direction,
    engines: &[EngineKind],
    iterations: usize,
    warmup: usize,
) -> Result<Vec<BenchReport>, BenchError> {
    let resolution = clock_resolution().as_nanos();
    let mut buf16 = vec![0u16; corpus.utf8.len()];
    let mut buf8 = vec![0u8; 3 * corpus.utf16.len()];
    let bytes = match direction {
        Direction::Utf8ToUtf16 => corpus.utf8.len(),
        Direction::Utf16ToUtf8 => 2 * corpus.utf16.len(),
    };
    let chars = corpus.chars();
    let mut reference: Option<(EngineKind, PassOutput)> = None;
    let mut reports = Vec::new();
    for &kind in engines {
        let t = Transcoder::new(kind).map_err(|e| BenchError::Usage(e.to_string()))?;
        std::thread::sleep(Duration::from_millis(1));
        for _ in 0..warmup {
            black_box(one_pass(&t, direction, corpus, &mut buf16, &mut buf8));
        }
        let mut times = Vec::with_capacity(iterations);
        let mut outcome = TranscodeOutcome::ok(0, 0);
        for _ in 0..iterations {
            let start = Instant::now();
            outcome = black_box(one_pass(&t, direction, corpus, &mut buf16, &mut buf8));
            times.push(start.elapsed().as_nanos());
        }
        let payload = match direction {
            Direction::Utf8ToUtf16 => {
                lanecode::endian::words_to_le_bytes(&buf16[..outcome.written])
            }
            Direction::Utf16ToUtf8 => buf8[..outcome.written].to_vec(),
        };
        let out = PassOutput { outcome, payload };
        match &reference {
            None => reference = Some((kind, out)),
            Some((first, expected)) if *expected != out => {
                return Err(BenchError::Mismatch(format!(
                    "{kind} and {first} disagree on {label} ({direction}): {} vs {}",
                    out.outcome, expected.outcome
                )))
            }
            Some(_) => {}
        }
        let min = *times.iter().min().expect("iterations >= 1");
        let mean = times.iter().sum::<u128>() / times.len() as u128;
        let per_sec = |units: usize| match (units, min) {
            (0, _) => Some(0.0),
            (_, 0) => None,
            (u, m) => Some(u as f64 * 1e9 / m as f64),
        };
        let gap = (min > 0).then(|| (mean - min) as f64 / min as f64);
        reports.push(BenchReport {
            input: label.to_string(),
            direction: direction.to_string(),
            engine: kind.name(),
            version: lanecode::VERSION,
            bytes,
            chars,
            iterations,
            warmup,
            min_ns: min,
            mean_ns: mean,
            bytes_per_sec: per_sec(bytes),
            chars_per_sec: per_sec(chars),
            min_mean_gap: gap,
            gap_ok: gap.is_none_or(|g| g < 0.01),
            clock_resolution_ns: resolution,
        });
    }
    Ok(reports)
}

fn load(args: &BenchArgs) -> Result<(Corpus, Vec<Direction>), BenchError> {
    let path = PathBuf::from(&args.input);
    if path.exists() {
        let bytes =
            fs::read(&path).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))?;
        let ingest = |r: Result<Corpus, corpus::IngestError>| {
            r.map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
        };
        return match args.format.as_str() {
            "utf8" => Ok((
                ingest(corpus::ingest_utf8(&bytes))?,
                vec![Direction::Utf8ToUtf16],
            )),
            "utf16le" => Ok((
                ingest(corpus::ingest_utf16le(&bytes))?,
                vec![Direction::Utf16ToUtf8],
            )),
            other => Err(BenchError::Usage(format!(
                "unsupported bench format {other:?}; use utf8 or utf16le"
            ))),
        };
    }
    let spec: CorpusSpec = args.input.parse().map_err(|_| {
        BenchError::Usage(format!(
            "{:?} is neither a file nor a corpus spec",
            args.input
        ))
    })?;
    Ok((
        corpus::generate(&spec),
        vec![Direction::Utf8ToUtf16, Direction::Utf16ToUtf8],
    ))
}

pub fn run(args: &BenchArgs) -> Result<(), BenchError> {
    if args.iterations == 0 {
        return Err(BenchError::Usage("--iterations must be at least 1".into()));
    }
    let engines = if args.engine.is_empty() {
        engine::detect()
    } else {
        args.engine.clone()
    };
    let (corpus, directions) = load(args)?;
    let pinned = !args.no_pin && pin_to_current_cpu();
    println!(
        "lanecode {} | input {} | {} bytes UTF-8, {} chars | clock resolution {} ns | pinned: {pinned}",
        lanecode::VERSION,
        args.input,
        corpus.utf8.len(),
        corpus.chars(),
        clock_resolution().as_nanos()
    );
    let mut records = Vec::new();
    for direction in directions {
        for r in measure(
            &args.input,
            &corpus,
            direction,
            &engines,
            args.iterations,
            args.warmup,
        )? {
            println!("{}", r.human());
            records.push(serde_json::to_string(&r).expect("report serializes"));
        }
    }
    for line in &records {
        println!("{line}");
    }
    if let Some(path) = &args.report {
        use std::io::Write;
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))?;
        for line in &records {
            writeln!(f, "{line}").map_err(|e| BenchError::Usage(e.to_string()))?;
        }
    }
    Ok(())
}
