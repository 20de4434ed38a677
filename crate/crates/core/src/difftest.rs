//! Differential testing of every engine against the scalar reference.
//!
//! Case `i` of a campaign with seed `s` is generated from ChaCha8 seeded with
//! `s` on stream `i`, so any single case can be regenerated without replaying
//! the ones before it.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{
    self, CorpusSpec, ErrorRecipe, PositionStrategy, ScriptClass, Utf16ErrorClass,
    Utf16ErrorRecipe, Utf8ErrorClass,
};
use crate::engine::{self, Direction, EngineKind, Transcoder};
use crate::{LaneCount, TranscodeOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseInput {
    Utf8(Vec<u8>),
    Utf16(Vec<u16>),
}

impl CaseInput {
    pub fn direction(&self) -> Direction {
        match self {
            CaseInput::Utf8(_) => Direction::Utf8ToUtf16,
            CaseInput::Utf16(_) => Direction::Utf16ToUtf8,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CaseInput::Utf8(v) => v.len(),
            CaseInput::Utf16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of running one engine: outcome plus output bytes (UTF-16 output
/// as little-endian bytes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observed {
    pub outcome: TranscodeOutcome,
    pub payload: Vec<u8>,
    /// Outcome of the validation-only entry point.
    pub validation: TranscodeOutcome,
}

pub fn observe(kind: EngineKind, input: &CaseInput) -> Observed {
    let t = Transcoder::new(kind).expect("engine availability checked by caller");
    match input {
        CaseInput::Utf8(bytes) => {
            let (outcome, words) = t.utf8_to_utf16_vec(bytes);
            Observed {
                outcome,
                payload: crate::endian::words_to_le_bytes(&words),
                validation: t.validate_utf8(bytes),
            }
        }
        CaseInput::Utf16(words) => {
            let (outcome, payload) = t.utf16_to_utf8_vec(words);
            Observed {
                outcome,
                payload,
                validation: t.validate_utf16(words),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub engine: EngineKind,
    pub input: CaseInput,
    pub expected: Observed,
    pub actual: Observed,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} input of {} units: expected {} ({} bytes), got {} ({} bytes)",
            self.engine,
            self.input.direction(),
            self.input.len(),
            self.expected.outcome,
            self.expected.payload.len(),
            self.actual.outcome,
            self.actual.payload.len()
        )
    }
}

/// Compares `engines` against the scalar reference on one input.
#[allow(clippy::result_large_err)]
pub fn check(input: &CaseInput, engines: &[EngineKind]) -> Result<(), Discrepancy> {
    let expected = observe(EngineKind::Scalar, input);
    for &engine in engines.iter().filter(|&&k| k != EngineKind::Scalar) {
        let actual = observe(engine, input);
        if actual != expected {
            return Err(Discrepancy {
                engine,
                input: input.clone(),
                expected,
                actual,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseKind {
    Valid,
    Mutated,
    Garbage,
}

/// One generated case with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub seed: u64,
    pub index: u64,
    pub kind: CaseKind,
    pub input: CaseInput,
}

pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_script(rng: &mut ChaCha8Rng) -> ScriptClass {
    ScriptClass::ALL[rng.random_range(0..ScriptClass::ALL.len())]
}

/// Position strategy with chunk boundaries weighted up.
fn random_position(rng: &mut ChaCha8Rng) -> PositionStrategy {
    match rng.random_range(0..8) {
        0 => PositionStrategy::Start,
        1 | 2 => PositionStrategy::Tail,
        3..=5 => PositionStrategy::ChunkBoundary,
        _ => PositionStrategy::Random,
    }
}

fn garbage_utf8(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    // draw from byte classes rather than uniformly, so leads meet continuations
    const CLASSES: [(u8, u8); 6] = [
        (0x00, 0x7F),
        (0x80, 0xBF),
        (0xC0, 0xDF),
        (0xE0, 0xEF),
        (0xF0, 0xF4),
        (0xF5, 0xFF),
    ];
    (0..len)
        .map(|_| {
            let (lo, hi) = CLASSES[rng.random_range(0..CLASSES.len())];
            rng.random_range(lo..=hi)
        })
        .collect()
}

fn garbage_utf16(rng: &mut ChaCha8Rng, len: usize) -> Vec<u16> {
    const CLASSES: [(u16, u16); 5] = [
        (0x0000, 0x007F),
        (0x0080, 0x07FF),
        (0x0800, 0xD7FF),
        (0xD800, 0xDBFF),
        (0xDC00, 0xDFFF),
    ];
    (0..len)
        .map(|_| {
            let (lo, hi) = CLASSES[rng.random_range(0..CLASSES.len())];
            rng.random_range(lo..=hi)
        })
        .collect()
}

fn valid_utf16(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u16> {
    let words = rng.random_range(0..=max_len);
    let spec = CorpusSpec::new(random_script(rng), 4 * words, rng.random());
    let mut v = corpus::generate(&spec).utf16;
    v.truncate(words);
    if v.last().is_some_and(|w| (0xD800..0xDC00).contains(w)) {
        v.pop();
    }
    v
}

/// Regenerates case `index` of the campaign with `seed`.
pub fn generate_case(seed: u64, index: u64, direction: Direction, max_len: usize) -> Case {
    let mut rng = case_rng(seed, index);
    let kind = match rng.random_range(0..20) {
        0..=7 => CaseKind::Valid,
        8..=16 => CaseKind::Mutated,
        _ => CaseKind::Garbage,
    };
    let input = match (direction, kind) {
        (Direction::Utf8ToUtf16, CaseKind::Garbage) => {
            let len = rng.random_range(0..=max_len);
            CaseInput::Utf8(garbage_utf8(&mut rng, len))
        }
        (Direction::Utf16ToUtf8, CaseKind::Garbage) => {
            let len = rng.random_range(0..=max_len);
            CaseInput::Utf16(garbage_utf16(&mut rng, len))
        }
        (Direction::Utf8ToUtf16, _) => {
            let spec = CorpusSpec::new(
                random_script(&mut rng),
                rng.random_range(0..=max_len),
                rng.random(),
            );
            let mut data = corpus::generate(&spec).utf8;
            if kind == CaseKind::Mutated {
                for _ in 0..rng.random_range(1..=3) {
                    let recipe = ErrorRecipe {
                        class: Utf8ErrorClass::ALL[rng.random_range(0..Utf8ErrorClass::ALL.len())],
                        position: random_position(&mut rng),
                    };
                    // only the first mutation applies to valid input
                    match corpus::mutate_utf8(&data, &recipe, &mut rng) {
                        Ok(m) => data = m.data,
                        Err(_) => break,
                    }
                }
                data.truncate(max_len);
            }
            CaseInput::Utf8(data)
        }
        (Direction::Utf16ToUtf8, _) => {
            let mut data = valid_utf16(&mut rng, max_len);
            if kind == CaseKind::Mutated {
                let recipe = Utf16ErrorRecipe {
                    class: Utf16ErrorClass::ALL[rng.random_range(0..Utf16ErrorClass::ALL.len())],
                    position: random_position(&mut rng),
                };
                if let Ok(m) = corpus::mutate_utf16(&data, &recipe, &mut rng) {
                    data = m.data;
                }
                data.truncate(max_len);
            }
            CaseInput::Utf16(data)
        }
    };
    Case {
        seed,
        index,
        kind,
        input,
    }
}

/// Which engines a campaign compares against scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineSelection {
    /// One emulated width per case, rotating through 8/16/32/64, plus native.
    Rotating,
    /// Every available engine on every case.
    All,
}

impl EngineSelection {
    pub fn engines_for(&self, index: u64) -> Vec<EngineKind> {
        let available = engine::detect();
        match self {
            EngineSelection::All => available,
            EngineSelection::Rotating => {
                let n = LaneCount::ALL[(index % LaneCount::ALL.len() as u64) as usize];
                let mut v = vec![EngineKind::Emulated(n)];
                v.extend(available.into_iter().filter(|&k| k == EngineKind::Native));
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Cases per direction.
    pub cases: u64,
    pub max_len: usize,
    pub selection: EngineSelection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub case: Case,
    pub discrepancy: Discrepancy,
    /// Smallest input found that still fails for the same engine.
    pub shrunk: CaseInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CampaignReport {
    /// Cases run per direction, UTF-8 input first.
    pub cases_run: [u64; 2],
    /// Inputs the scalar reference rejected, per direction.
    pub malformed: [u64; 2],
    pub failure: Option<Box<Failure>>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `cases` per direction, stopping at the first discrepancy.
pub fn run_campaign(config: &CampaignConfig, mut progress: impl FnMut(u64)) -> CampaignReport {
    let mut report = CampaignReport::default();
    for index in 0..config.cases {
        for (d, direction) in [Direction::Utf8ToUtf16, Direction::Utf16ToUtf8]
            .into_iter()
            .enumerate()
        {
            let case = generate_case(config.seed, index, direction, config.max_len);
            let engines = config.selection.engines_for(index);
            report.cases_run[d] += 1;
            match check(&case.input, &engines) {
                Ok(()) => {
                    let scalar = observe(EngineKind::Scalar, &case.input);
                    report.malformed[d] += !scalar.outcome.is_ok() as u64;
                }
                Err(discrepancy) => {
                    let shrunk = shrink(&case.input, discrepancy.engine);
                    report.failure = Some(Box::new(Failure {
                        case,
                        discrepancy,
                        shrunk,
                    }));
                    return report;
                }
            }
        }
        progress(index + 1);
    }
    report
}

/// Minimizes a failing input with delta debugging: drop chunks while the
/// engine still disagrees with scalar, then simplify units one at a time.
pub fn shrink(input: &CaseInput, engine: EngineKind) -> CaseInput {
    let fails = |c: &CaseInput| check(c, &[engine]).is_err();
    assert!(fails(input), "shrink needs a failing input");
    match input {
        CaseInput::Utf8(v) => CaseInput::Utf8(ddmin(v.clone(), b'a', |x| {
            fails(&CaseInput::Utf8(x.to_vec()))
        })),
        CaseInput::Utf16(v) => CaseInput::Utf16(ddmin(v.clone(), 0x61, |x| {
            fails(&CaseInput::Utf16(x.to_vec()))
        })),
    }
}

fn ddmin<T: Copy + PartialEq>(mut v: Vec<T>, simple: T, fails: impl Fn(&[T]) -> bool) -> Vec<T> {
    let mut chunk = v.len().div_ceil(2).max(1);
    loop {
        let mut removed = false;
        let mut start = 0;
        while start < v.len() {
            let end = (start + chunk).min(v.len());
            let candidate: Vec<T> = v[..start].iter().chain(&v[end..]).copied().collect();
            if fails(&candidate) {
                v = candidate;
                removed = true;
            } else {
                start = end;
            }
        }
        if chunk == 1 && !removed {
            break;
        }
        if !removed {
            chunk = chunk.div_ceil(2);
        }
    }
    for i in 0..v.len() {
        if v[i] != simple {
            let old = v[i];
            v[i] = simple;
            if !fails(&v) {
                v[i] = old;
            }
        }
    }
    v
}

/// Reproducer text format, one `key value` pair per line.
pub const REPRO_HEADER: &str = "lanecode-repro 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repro {
    pub engine: EngineKind,
    pub input: CaseInput,
    /// Seed and index of the originating case, if known.
    pub origin: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReproError {
    #[error("missing header line {REPRO_HEADER:?}")]
    Header,
    #[error("missing field {0}")]
    Missing(&'static str),
    #[error("bad value for {0}: {1}")]
    Bad(&'static str, String),
}

impl Repro {
    pub fn to_text(&self) -> String {
        let mut s = format!("{REPRO_HEADER}\n");
        writeln!(s, "engine {}", self.engine).unwrap();
        writeln!(s, "direction {}", self.input.direction()).unwrap();
        if let Some((seed, index)) = self.origin {
            writeln!(s, "seed {seed}\nindex {index}").unwrap();
        }
        s.push_str("input ");
        match &self.input {
            CaseInput::Utf8(v) => v.iter().for_each(|b| write!(s, "{b:02x}").unwrap()),
            CaseInput::Utf16(v) => v.iter().for_each(|w| write!(s, "{w:04x}").unwrap()),
        }
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, ReproError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(REPRO_HEADER) {
            return Err(ReproError::Header);
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            if let Some((k, v)) = line.trim().split_once(' ') {
                fields.insert(k.to_string(), v.trim().to_string());
            } else if !line.trim().is_empty() {
                fields.insert(line.trim().to_string(), String::new());
            }
        }
        let get = |k: &'static str| fields.get(k).ok_or(ReproError::Missing(k));
        let bad = |k: &'static str, v: &str| ReproError::Bad(k, v.to_string());
        let engine = get("engine")?
            .parse()
            .map_err(|_| bad("engine", get("engine").unwrap()))?;
        let hex = get("input")?;
        let digits = |width: usize| -> Result<Vec<u32>, ReproError> {
            if hex.len() % width != 0 {
                return Err(bad("input", hex));
            }
            (0..hex.len())
                .step_by(width)
                .map(|i| u32::from_str_radix(&hex[i..i + width], 16).map_err(|_| bad("input", hex)))
                .collect()
        };
        let input = match get("direction")?.as_str() {
            "utf8-to-utf16" => CaseInput::Utf8(digits(2)?.into_iter().map(|x| x as u8).collect()),
            "utf16-to-utf8" => CaseInput::Utf16(digits(4)?.into_iter().map(|x| x as u16).collect()),
            other => return Err(bad("direction", other)),
        };
        let origin = match (fields.get("seed"), fields.get("index")) {
            (Some(s), Some(i)) => Some((
                s.parse().map_err(|_| bad("seed", s))?,
                i.parse().map_err(|_| bad("index", i))?,
            )),
            _ => None,
        };
        Ok(Repro {
            engine,
            input,
            origin,
        })
    }

    /// Re-runs the comparison; `Err` means the failure reproduces.
    #[allow(clippy::result_large_err)]
    pub fn replay(&self) -> Result<(), Discrepancy> {
        check(&self.input, &[self.engine])
    }
}
