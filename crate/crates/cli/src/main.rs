//! `lanecode`: transcode, validate, generate, benchmark and fuzz.
//!
//! Exit status: 0 on success, 1 on malformed input or a failed check,
//! 2 on usage and I/O errors.

mod bench;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lanecode::corpus::{self, CorpusSpec};
use lanecode::difftest::{self, CampaignConfig, EngineSelection, Repro};
use lanecode::engine::{self, ENGINE_ENV};
use lanecode::{endian, EngineKind, TranscodeOutcome, Transcoder};

#[derive(Parser)]
#[command(
    name = "lanecode",
    version,
    about = "UTF-8 / UTF-16 transcoder built on vector mask algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Utf8,
    Utf16le,
    Utf16be,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a file between UTF-8 and UTF-16.
    Transcode {
        #[arg(long, value_enum)]
        from: Format,
        #[arg(long, value_enum)]
        to: Format,
        /// scalar, emulated[:N] or native; defaults to $LANECODE_ENGINE, then the fastest available.
        #[arg(long)]
        engine: Option<EngineKind>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Check that a file is well-formed.
    Validate {
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        engine: Option<EngineKind>,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write a synthetic corpus.
    Generate {
        #[arg(long)]
        class: corpus::ScriptClass,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Utf8)]
        format: Format,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Time engines on a file or a generated corpus.
    Bench(bench::BenchArgs),
    /// Compare every engine against the scalar reference on random inputs.
    Difftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per direction.
        #[arg(long, default_value_t = 10_000)]
        cases: u64,
        #[arg(long, default_value_t = 4096)]
        max_len: usize,
        /// Run every emulated width on every case instead of rotating.
        #[arg(long)]
        all_engines: bool,
        /// Where to write the minimized reproducer on failure.
        #[arg(long, default_value = "lanecode-repro.txt")]
        repro: PathBuf,
        /// Re-run a reproducer instead of a campaign.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// List engines usable on this host.
    Engines,
}

/// Failure of a command, mapped to an exit status.
enum Fail {
    Check(String),
    Usage(String),
}

type CmdResult = Result<(), Fail>;

fn io_err(path: &Path, e: std::io::Error) -> Fail {
    Fail::Usage(format!("{}: {e}", path.display()))
}

fn transcoder(engine: Option<EngineKind>) -> Result<Transcoder, Fail> {
    match engine {
        Some(k) => Transcoder::new(k),
        None => Transcoder::auto(),
    }
    .map_err(|e| Fail::Usage(e.to_string()))
}

fn read(path: &Path) -> Result<Vec<u8>, Fail> {
    fs::read(path).map_err(|e| io_err(path, e))
}

/// Splits raw bytes into UTF-16 words; an odd trailing byte is reported
/// as malformed at the index of the incomplete word.
fn decode_words(bytes: &[u8], format: Format) -> (Vec<u16>, bool) {
    let (words, odd) = match format {
        Format::Utf16le => endian::words_from_le_bytes(bytes),
        Format::Utf16be => endian::words_from_be_bytes(bytes),
        Format::Utf8 => unreachable!("not a UTF-16 format"),
    };
    (words, odd.is_some())
}

fn encode_words(words: &[u16], format: Format) -> Vec<u8> {
    match format {
        Format::Utf16le => endian::words_to_le_bytes(words),
        Format::Utf16be => endian::words_to_be_bytes(words),
        Format::Utf8 => unreachable!("not a UTF-16 format"),
    }
}

fn truncated_outcome(o: TranscodeOutcome, odd: bool, units: usize) -> TranscodeOutcome {
    if odd && o.is_ok() {
        TranscodeOutcome::malformed(units, o.written)
    } else {
        o
    }
}

fn report(o: &TranscodeOutcome, unit: &str) -> CmdResult {
    match o.error_position() {
        None => Ok(()),
        Some(p) => Err(Fail::Check(format!("malformed input at {unit} {p}"))),
    }
}

fn cmd_transcode(
    from: Format,
    to: Format,
    engine: Option<EngineKind>,
    input: &Path,
    output: &Path,
) -> CmdResult {
    let t = transcoder(engine)?;
    let bytes = read(input)?;
    let (outcome, out, unit) = match (from, to) {
        (Format::Utf8, Format::Utf16le | Format::Utf16be) => {
            let (o, words) = t.utf8_to_utf16_vec(&bytes);
            (o, encode_words(&words, to), "byte")
        }
        (Format::Utf16le | Format::Utf16be, Format::Utf8) => {
            let (words, odd) = decode_words(&bytes, from);
            let (o, out) = t.utf16_to_utf8_vec(&words);
            (truncated_outcome(o, odd, words.len()), out, "word")
        }
        _ => {
            return Err(Fail::Usage(format!(
                "unsupported conversion {from:?} -> {to:?}; one side must be utf8 and the other utf16le or utf16be"
            )))
        }
    };
    fs::write(output, &out).map_err(|e| io_err(output, e))?;
    report(&outcome, unit)
}

fn cmd_validate(format: Format, engine: Option<EngineKind>, input: &Path) -> CmdResult {
    let t = transcoder(engine)?;
    let bytes = read(input)?;
    let (o, unit) = match format {
        Format::Utf8 => (t.validate_utf8(&bytes), "byte"),
        _ => {
            let (words, odd) = decode_words(&bytes, format);
            (
                truncated_outcome(t.validate_utf16(&words), odd, words.len()),
                "word",
            )
        }
    };
    report(&o, unit)?;
    println!("valid ({} {unit}s)", o.consumed);
    Ok(())
}

fn cmd_generate(spec: CorpusSpec, format: Format, output: &Path) -> CmdResult {
    let c = corpus::generate(&spec);
    let bytes = match format {
        Format::Utf8 => c.utf8,
        _ => encode_words(&c.utf16, format),
    };
    fs::write(output, bytes).map_err(|e| io_err(output, e))
}

fn cmd_difftest(config: CampaignConfig, repro_path: &Path, replay: Option<&Path>) -> CmdResult {
    if let Some(path) = replay {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let repro =
            Repro::parse(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
        if !engine::is_available(repro.engine) {
            return Err(Fail::Usage(format!(
                "engine {} is not available on this host",
                repro.engine
            )));
        }
        return match repro.replay() {
            Ok(()) => {
                println!("replay passed: {} agrees with scalar", repro.engine);
                Ok(())
            }
            Err(d) => Err(Fail::Check(format!("replay failed: {d}"))),
        };
    }
    let step = (config.cases / 10).max(1);
    let report = difftest::run_campaign(&config, |done| {
        if done % step == 0 {
            eprintln!("  {done}/{} cases per direction", config.cases);
        }
    });
    match report.failure {
        None => {
            println!(
                "PASS: {} UTF-8 and {} UTF-16 cases agree with scalar ({} and {} malformed); seed {}",
                report.cases_run[0], report.cases_run[1], report.malformed[0], report.malformed[1], config.seed
            );
            Ok(())
        }
        Some(f) => {
            let repro = Repro {
                engine: f.discrepancy.engine,
                input: f.shrunk.clone(),
                origin: Some((f.case.seed, f.case.index)),
            };
            fs::write(repro_path, repro.to_text()).map_err(|e| io_err(repro_path, e))?;
            Err(Fail::Check(format!(
                "FAIL at case {} (seed {}): {}\nshrunk to {} units; reproducer written to {}",
                f.case.index,
                f.case.seed,
                f.discrepancy,
                f.shrunk.len(),
                repro_path.display()
            )))
        }
    }
}

fn cmd_engines() -> CmdResult {
    let caps = engine::capabilities();
    println!("lanecode {}", lanecode::VERSION);
    for kind in engine::detect() {
        println!("  {kind}");
    }
    println!("preferred: {}", engine::preferred());
    println!(
        "cpu: avx512f={} avx512bw={} avx512dq={} avx512vbmi={} avx512vbmi2={} bmi2={} (native compiled: {})",
        caps.avx512f, caps.avx512bw, caps.avx512dq, caps.avx512vbmi, caps.avx512vbmi2, caps.bmi2, caps.native_compiled
    );
    if let Ok(v) = std::env::var(ENGINE_ENV) {
        println!("{ENGINE_ENV}={v}");
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Transcode {
            from,
            to,
            engine,
            input,
            output,
        } => cmd_transcode(from, to, engine, &input, &output),
        Command::Validate {
            format,
            engine,
            input,
        } => cmd_validate(format, engine, &input),
        Command::Generate {
            class,
            size,
            seed,
            format,
            output,
        } => cmd_generate(CorpusSpec::new(class, size, seed), format, &output),
        Command::Bench(args) => bench::run(&args).map_err(|e| match e {
            bench::BenchError::Usage(m) => Fail::Usage(m),
            bench::BenchError::Mismatch(m) => Fail::Check(m),
        }),
        Command::Difftest {
            seed,
            cases,
            max_len,
            all_engines,
            repro,
            replay,
        } => {
            if cases == 0 {
                return Err(Fail::Usage("--cases must be at least 1".into()));
            }
            let selection = if all_engines {
                EngineSelection::All
            } else {
                EngineSelection::Rotating
            };
            cmd_difftest(
                CampaignConfig {
                    seed,
                    cases,
                    max_len,
                    selection,
                },
                &repro,
                replay.as_deref(),
            )
        }
        Command::Engines => cmd_engines(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Check(msg)) => {
            eprintln!("lanecode: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("lanecode: {msg}");
            ExitCode::from(2)
        }
    }
}
