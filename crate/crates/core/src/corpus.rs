//! Deterministic text corpora and error-injecting mutations.
//!
//! Generated text imitates the shape of per-language lipsum files: words of
//! characters drawn from a class-specific code point pool, separated by
//! ASCII whitespace. Output length is exact; when the next character does
//! not fit, the remaining (at most 3) bytes are filled with ASCII.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, so a seed
//! reproduces the same corpus on every platform and release of `rand_chacha`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::endian;
use crate::scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScriptClass {
    AsciiLatin,
    TwobyteHeavy,
    ThreebyteHeavy,
    FourbyteEmoji,
    Mixed,
}

impl ScriptClass {
    pub const ALL: [ScriptClass; 5] = [
        ScriptClass::AsciiLatin,
        ScriptClass::TwobyteHeavy,
        ScriptClass::ThreebyteHeavy,
        ScriptClass::FourbyteEmoji,
        ScriptClass::Mixed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScriptClass::AsciiLatin => "ascii-latin",
            ScriptClass::TwobyteHeavy => "twobyte-heavy",
            ScriptClass::ThreebyteHeavy => "threebyte-heavy",
            ScriptClass::FourbyteEmoji => "fourbyte-emoji",
            ScriptClass::Mixed => "mixed",
        }
    }

    /// UTF-8 sequence length that must make up at least 80% of the bytes,
    /// for the classes that promise one.
    pub fn dominant_length(&self) -> Option<usize> {
        match self {
            ScriptClass::AsciiLatin => Some(1),
            ScriptClass::TwobyteHeavy => Some(2),
            ScriptClass::ThreebyteHeavy => Some(3),
            ScriptClass::FourbyteEmoji => Some(4),
            ScriptClass::Mixed => None,
        }
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} {value:?}")]
pub struct ParseNameError {
    kind: &'static str,
    value: String,
}

impl FromStr for ScriptClass {
    type Err = ParseNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScriptClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ParseNameError {
                kind: "script class",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CorpusSpec {
    pub script_class: ScriptClass,
    pub size_bytes: usize,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(script_class: ScriptClass, size_bytes: usize, seed: u64) -> Self {
        Self {
            script_class,
            size_bytes,
            seed,
        }
    }
}

impl fmt::Display for CorpusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.script_class, self.size_bytes, self.seed)
    }
}

/// Parses `class:size[:seed]`, e.g. `twobyte-heavy:1048576:7`. The seed
/// defaults to 0.
impl FromStr for CorpusSpec {
    type Err = ParseNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseNameError {
            kind: "corpus spec",
            value: s.to_string(),
        };
        let mut parts = s.split(':');
        let class = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let size = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let seed = match parts.next() {
            Some(x) => x.parse().map_err(|_| bad())?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(CorpusSpec::new(class, size, seed))
    }
}

/// The same text in both encodings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub utf8: Vec<u8>,
    pub utf16: Vec<u16>,
}

impl Corpus {
    pub fn from_text(text: &str) -> Self {
        Self {
            utf8: text.as_bytes().to_vec(),
            utf16: text.encode_utf16().collect(),
        }
    }

    /// Number of characters (identical in both encodings).
    pub fn chars(&self) -> usize {
        scalar::count_chars_utf8(&self.utf8)
    }

    pub fn utf16le_bytes(&self) -> Vec<u8> {
        endian::words_to_le_bytes(&self.utf16)
    }

    pub fn histogram(&self) -> ClassHistogram {
        ClassHistogram::of_utf8(&self.utf8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8 (first error at byte {0})")]
    InvalidUtf8(usize),
    #[error("input is not valid UTF-16LE (first error at word {0})")]
    InvalidUtf16(usize),
    #[error("UTF-16 input has an odd number of bytes")]
    OddLength,
}

/// Loads an external UTF-8 file for benchmarking.
pub fn ingest_utf8(bytes: &[u8]) -> Result<Corpus, IngestError> {
    let (outcome, utf16) = scalar::transcode_utf8_to_utf16le(bytes);
    match outcome.error_position() {
        Some(p) => Err(IngestError::InvalidUtf8(p)),
        None => Ok(Corpus {
            utf8: bytes.to_vec(),
            utf16,
        }),
    }
}

/// Loads an external UTF-16LE file for benchmarking.
pub fn ingest_utf16le(bytes: &[u8]) -> Result<Corpus, IngestError> {
    let (words, odd) = endian::words_from_le_bytes(bytes);
    if odd.is_some() {
        return Err(IngestError::OddLength);
    }
    let (outcome, utf8) = scalar::transcode_utf16le_to_utf8(&words);
    match outcome.error_position() {
        Some(p) => Err(IngestError::InvalidUtf16(p)),
        None => Ok(Corpus { utf8, utf16: words }),
    }
}

/// Bytes of UTF-8 text broken down by the length of the sequence they
/// belong to. Index 0 counts 1-byte sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassHistogram {
    pub bytes: [usize; 4],
}

impl ClassHistogram {
    /// Expects valid UTF-8; continuation bytes are attributed to the
    /// preceding lead.
    pub fn of_utf8(text: &[u8]) -> Self {
        let mut h = ClassHistogram::default();
        for &b in text {
            let len = match b {
                0x00..=0x7F => 1,
                0xC0..=0xDF => 2,
                0xE0..=0xEF => 3,
                0xF0..=0xFF => 4,
                _ => continue,
            };
            h.bytes[len - 1] += len;
        }
        h
    }

    pub fn total(&self) -> usize {
        self.bytes.iter().sum()
    }

    /// Share of bytes in `len`-byte sequences; 0 for empty text.
    pub fn fraction(&self, len: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.bytes[len - 1] as f64 / t as f64,
        }
    }
}

const LATIN_WORDS: &[&str] = &[
    "lorem",
    "ipsum",
    "dolor",
    "sit",
    "amet",
    "consectetur",
    "adipiscing",
    "elit",
    "sed",
    "do",
    "eiusmod",
    "tempor",
    "incididunt",
    "ut",
    "labore",
    "et",
    "dolore",
    "magna",
    "aliqua",
    "enim",
    "ad",
    "minim",
    "veniam",
    "quis",
    "nostrud",
    "exercitation",
    "ullamco",
    "laboris",
    "nisi",
    "aliquip",
    "ex",
    "ea",
    "commodo",
    "consequat",
    "duis",
    "aute",
    "irure",
    "in",
    "reprehenderit",
    "voluptate",
    "velit",
    "esse",
    "cillum",
    "fugiat",
    "nulla",
    "pariatur",
];

fn pick(rng: &mut ChaCha8Rng, ranges: &[(u32, u32)]) -> char {
    let total: u32 = ranges.iter().map(|(lo, hi)| hi - lo + 1).sum();
    let mut k = rng.random_range(0..total);
    for &(lo, hi) in ranges {
        let span = hi - lo + 1;
        if k < span {
            return char::from_u32(lo + k).expect("pools hold scalar values only");
        }
        k -= span;
    }
    unreachable!()
}

/// Latin-1 supplement letters through NKo, skipping the C1 controls.
const TWOBYTE_POOL: &[(u32, u32)] = &[(0x00A0, 0x07FF)];
const THREEBYTE_POOL: &[(u32, u32)] = &[(0x4E00, 0x9FFF), (0x3040, 0x30FF)];
const FOURBYTE_POOL: &[(u32, u32)] = &[(0x1F300, 0x1FAFF)];

/// Appends one word (plus its separator) of the given class.
fn push_word(rng: &mut ChaCha8Rng, class: ScriptClass, out: &mut Vec<char>) {
    match class {
        ScriptClass::AsciiLatin => {
            out.extend(LATIN_WORDS[rng.random_range(0..LATIN_WORDS.len())].chars());
            out.push(match rng.random_range(0..12) {
                0 => ',',
                1 => '.',
                2 => '\n',
                _ => ' ',
            });
        }
        ScriptClass::TwobyteHeavy => {
            for _ in 0..rng.random_range(4..=10) {
                out.push(pick(rng, TWOBYTE_POOL));
            }
            out.push(' ');
        }
        ScriptClass::ThreebyteHeavy => {
            for _ in 0..rng.random_range(5..=20) {
                out.push(pick(rng, THREEBYTE_POOL));
            }
            out.push(if rng.random_bool(0.5) {
                '\u{3002}'
            } else {
                ' '
            });
        }
        ScriptClass::FourbyteEmoji => {
            for _ in 0..rng.random_range(2..=8) {
                out.push(pick(rng, FOURBYTE_POOL));
            }
            out.push(' ');
        }
        ScriptClass::Mixed => {
            let sub = [
                ScriptClass::AsciiLatin,
                ScriptClass::TwobyteHeavy,
                ScriptClass::ThreebyteHeavy,
                ScriptClass::FourbyteEmoji,
            ][rng.random_range(0..4)];
            push_word(rng, sub, out);
            if rng.random_bool(0.3) {
                out.push('\t');
            }
        }
    }
}

/// Generates exactly `spec.size_bytes` bytes of valid UTF-8 and the
/// matching UTF-16.
pub fn generate(spec: &CorpusSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut text = String::with_capacity(spec.size_bytes);
    let mut word = Vec::new();
    'fill: while text.len() < spec.size_bytes {
        word.clear();
        push_word(&mut rng, spec.script_class, &mut word);
        for &c in &word {
            if text.len() + c.len_utf8() > spec.size_bytes {
                break 'fill;
            }
            text.push(c);
        }
    }
    while text.len() < spec.size_bytes {
        text.push(char::from(b'a' + rng.random_range(0..26u8)));
    }
    Corpus::from_text(&text)
}

/// The six ways a UTF-8 sequence can be invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Utf8ErrorClass {
    /// A byte in 0xF5..=0xFF.
    ForbiddenByte,
    /// A lead byte followed by too few continuation bytes.
    MissingContinuation,
    /// A continuation byte without a lead.
    StrayContinuation,
    /// A sequence longer than the shortest form of its code point.
    Overlong,
    /// A 4-byte sequence above U+10FFFF.
    TooLarge,
    /// A 3-byte encoding of U+D800..=U+DFFF.
    Surrogate,
}

impl Utf8ErrorClass {
    pub const ALL: [Utf8ErrorClass; 6] = [
        Utf8ErrorClass::ForbiddenByte,
        Utf8ErrorClass::MissingContinuation,
        Utf8ErrorClass::StrayContinuation,
        Utf8ErrorClass::Overlong,
        Utf8ErrorClass::TooLarge,
        Utf8ErrorClass::Surrogate,
    ];

    /// Invalid bytes to splice in at a character boundary.
    fn payload(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        let cont = |rng: &mut ChaCha8Rng| rng.random_range(0x80..=0xBFu8);
        match self {
            Utf8ErrorClass::ForbiddenByte => vec![rng.random_range(0xF5..=0xFF)],
            Utf8ErrorClass::MissingContinuation => match rng.random_range(0..6) {
                0 => vec![rng.random_range(0xC2..=0xDF)],
                1 => vec![rng.random_range(0xE1..=0xEC)],
                2 => vec![rng.random_range(0xE1..=0xEC), cont(rng)],
                3 => vec![rng.random_range(0xF1..=0xF3)],
                4 => vec![rng.random_range(0xF1..=0xF3), cont(rng)],
                _ => vec![rng.random_range(0xF1..=0xF3), cont(rng), cont(rng)],
            },
            Utf8ErrorClass::StrayContinuation => vec![cont(rng)],
            Utf8ErrorClass::Overlong => match rng.random_range(0..3) {
                0 => vec![rng.random_range(0xC0..=0xC1), cont(rng)],
                1 => vec![0xE0, rng.random_range(0x80..=0x9F), cont(rng)],
                _ => vec![0xF0, rng.random_range(0x80..=0x8F), cont(rng), cont(rng)],
            },
            Utf8ErrorClass::TooLarge => {
                vec![0xF4, rng.random_range(0x90..=0xBF), cont(rng), cont(rng)]
            }
            Utf8ErrorClass::Surrogate => vec![0xED, rng.random_range(0xA0..=0xBF), cont(rng)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Utf8ErrorClass::ForbiddenByte => "forbidden-byte",
            Utf8ErrorClass::MissingContinuation => "missing-continuation",
            Utf8ErrorClass::StrayContinuation => "stray-continuation",
            Utf8ErrorClass::Overlong => "overlong",
            Utf8ErrorClass::TooLarge => "too-large",
            Utf8ErrorClass::Surrogate => "surrogate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Utf16ErrorClass {
    /// A high surrogate not followed by a low surrogate.
    LoneHigh,
    /// A low surrogate not preceded by a high surrogate.
    LoneLow,
    /// An existing pair written low-then-high.
    SwappedPair,
}

impl Utf16ErrorClass {
    pub const ALL: [Utf16ErrorClass; 3] = [
        Utf16ErrorClass::LoneHigh,
        Utf16ErrorClass::LoneLow,
        Utf16ErrorClass::SwappedPair,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Utf16ErrorClass::LoneHigh => "lone-high",
            Utf16ErrorClass::LoneLow => "lone-low",
            Utf16ErrorClass::SwappedPair => "swapped-pair",
        }
    }
}

/// Where a mutation lands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositionStrategy {
    Start,
    /// Straddling a vector-chunk boundary of one of the supported lane counts.
    ChunkBoundary,
    /// Within the last 64 code units.
    Tail,
    Random,
}

impl PositionStrategy {
    pub const ALL: [PositionStrategy; 4] = [
        PositionStrategy::Start,
        PositionStrategy::ChunkBoundary,
        PositionStrategy::Tail,
        PositionStrategy::Random,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ErrorRecipe {
    pub class: Utf8ErrorClass,
    pub position: PositionStrategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Utf16ErrorRecipe {
    pub class: Utf16ErrorClass,
    pub position: PositionStrategy,
}

/// A mutated input and where validation must fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutation<T> {
    pub data: Vec<T>,
    /// Index of the injected fault.
    pub target: usize,
    /// First error reported by the scalar validator.
    pub expected_error: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("mutations apply to valid input only (error at {0})")]
    InvalidInput(usize),
    #[error("recipe {0} does not apply to this input")]
    Inapplicable(&'static str),
}

/// Picks an index in `0..=len` according to `strategy`; chunk boundaries
/// are multiples of one of `strides`.
fn target_index(
    rng: &mut ChaCha8Rng,
    len: usize,
    strategy: PositionStrategy,
    strides: &[usize],
) -> usize {
    match strategy {
        PositionStrategy::Start => 0,
        PositionStrategy::Random => rng.random_range(0..=len),
        PositionStrategy::Tail => rng.random_range(len.saturating_sub(64)..=len),
        PositionStrategy::ChunkBoundary => {
            let stride = strides[rng.random_range(0..strides.len())];
            let k = rng.random_range(0..=len / stride);
            // land just before the boundary so multi-unit payloads cross it
            (k * stride)
                .saturating_sub(rng.random_range(0..=1))
                .min(len)
        }
    }
}

/// Splices an invalid sequence into valid UTF-8 at a character boundary.
pub fn mutate_utf8(
    input: &[u8],
    recipe: &ErrorRecipe,
    rng: &mut ChaCha8Rng,
) -> Result<Mutation<u8>, MutationError> {
    if let Some(p) = scalar::validate_utf8(input).error_position() {
        return Err(MutationError::InvalidInput(p));
    }
    let mut at = target_index(rng, input.len(), recipe.position, &[8, 16, 32, 64]);
    while at > 0 && at < input.len() && (input[at] & 0xC0) == 0x80 {
        at -= 1;
    }
    let mut data = Vec::with_capacity(input.len() + 4);
    data.extend_from_slice(&input[..at]);
    data.extend(recipe.class.payload(rng));
    data.extend_from_slice(&input[at..]);
    let expected_error = scalar::validate_utf8(&data)
        .error_position()
        .expect("an injected error is always detected");
    Ok(Mutation {
        data,
        target: at,
        expected_error,
    })
}

/// Injects a surrogate sequencing error into valid UTF-16.
///
/// Chunk boundaries for UTF-16 are multiples of the per-iteration advance
/// `n/2 - 1`.
pub fn mutate_utf16(
    input: &[u16],
    recipe: &Utf16ErrorRecipe,
    rng: &mut ChaCha8Rng,
) -> Result<Mutation<u16>, MutationError> {
    if let Some(p) = scalar::validate_utf16le(input).error_position() {
        return Err(MutationError::InvalidInput(p));
    }
    let is_lo = |w: u16| (0xDC00..0xE000).contains(&w);
    let strides = [3, 7, 15, 31];
    let mut data = input.to_vec();
    let at = match recipe.class {
        Utf16ErrorClass::LoneHigh | Utf16ErrorClass::LoneLow => {
            let mut at = target_index(rng, input.len(), recipe.position, &strides);
            if at < input.len() && is_lo(input[at]) {
                at -= 1;
            }
            let w = match recipe.class {
                Utf16ErrorClass::LoneHigh => rng.random_range(0xD800..=0xDBFF),
                _ => rng.random_range(0xDC00..=0xDFFF),
            };
            data.insert(at, w);
            at
        }
        Utf16ErrorClass::SwappedPair => {
            let pairs: Vec<usize> = (1..input.len())
                .filter(|&i| is_lo(input[i]))
                .map(|i| i - 1)
                .collect();
            if pairs.is_empty() {
                return Err(MutationError::Inapplicable(
                    Utf16ErrorClass::SwappedPair.name(),
                ));
            }
            let want = target_index(rng, input.len(), recipe.position, &strides);
            let k = pairs.partition_point(|&p| p < want).min(pairs.len() - 1);
            let at = pairs[k];
            data.swap(at, at + 1);
            at
        }
    };
    let expected_error = scalar::validate_utf16le(&data)
        .error_position()
        .expect("an injected error is always detected");
    Ok(Mutation {
        data,
        target: at,
        expected_error,
    })
}
