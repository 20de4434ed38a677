//! Backend selection and a single entry point for both directions.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::outcome::TranscodeOutcome;
use crate::scalar;
use crate::substrate::LaneCount;
use crate::utf16_to_utf8::Utf16ToUtf8;
use crate::utf8_to_utf16::Utf8ToUtf16;

/// Environment variable that overrides the engine picked by [`Transcoder::auto`].
///
/// Accepted values: `scalar`, `emulated`, `emulated:N` (N in 8, 16, 32, 64)
/// and `native`.
pub const ENGINE_ENV: &str = "LANECODE_ENGINE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Utf8ToUtf16,
    Utf16ToUtf8,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Utf8ToUtf16 => "utf8-to-utf16",
            Direction::Utf16ToUtf8 => "utf16-to-utf8",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineKind {
    /// The character-at-a-time reference.
    Scalar,
    /// The vector algorithms on the lane emulator.
    Emulated(LaneCount),
    /// The vector algorithms on AVX-512 hardware (64 lanes).
    Native,
}

impl EngineKind {
    pub const fn default_emulated() -> Self {
        EngineKind::Emulated(LaneCount::N64)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineKind::Scalar => f.write_str("scalar"),
            EngineKind::Emulated(n) => write!(f, "emulated:{n}"),
            EngineKind::Native => f.write_str("native"),
        }
    }
}

impl FromStr for EngineKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EngineError::Parse(s.to_string());
        match s.trim().to_ascii_lowercase().as_str() {
            "scalar" => Ok(EngineKind::Scalar),
            "native" => Ok(EngineKind::Native),
            "emulated" => Ok(EngineKind::default_emulated()),
            other => {
                let n = other.strip_prefix("emulated:").ok_or_else(bad)?;
                let n: usize = n.parse().map_err(|_| bad())?;
                LaneCount::new(n)
                    .map(EngineKind::Emulated)
                    .map_err(|_| bad())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("engine {0} is not available on this host")]
    Unavailable(EngineKind),
    #[error("unrecognized engine {0:?}; expected scalar, emulated[:8|16|32|64] or native")]
    Parse(String),
}

/// CPU features relevant to the native backend, probed once per process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    pub avx512f: bool,
    pub avx512bw: bool,
    pub avx512dq: bool,
    pub avx512vbmi: bool,
    pub avx512vbmi2: bool,
    pub bmi2: bool,
    /// Whether this build contains the native kernels at all.
    pub native_compiled: bool,
}

impl Capabilities {
    pub fn native_available(&self) -> bool {
        self.native_compiled
            && self.avx512f
            && self.avx512bw
            && self.avx512dq
            && self.avx512vbmi
            && self.avx512vbmi2
            && self.bmi2
    }

    fn probe() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::is_x86_feature_detected as has;
            Capabilities {
                avx512f: has!("avx512f"),
                avx512bw: has!("avx512bw"),
                avx512dq: has!("avx512dq"),
                avx512vbmi: has!("avx512vbmi"),
                avx512vbmi2: has!("avx512vbmi2"),
                bmi2: has!("bmi2"),
                native_compiled: cfg!(feature = "native"),
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            Capabilities::default()
        }
    }
}

/// Host capabilities; detection runs on first use and never again.
pub fn capabilities() -> &'static Capabilities {
    static CAPS: OnceLock<Capabilities> = OnceLock::new();
    CAPS.get_or_init(Capabilities::probe)
}

/// Engines usable on this host: scalar, every emulated width, and native
/// when the CPU supports it.
pub fn detect() -> Vec<EngineKind> {
    let mut kinds = vec![EngineKind::Scalar];
    kinds.extend(LaneCount::ALL.iter().map(|&n| EngineKind::Emulated(n)));
    if capabilities().native_available() {
        kinds.push(EngineKind::Native);
    }
    kinds
}

pub fn is_available(kind: EngineKind) -> bool {
    match kind {
        EngineKind::Scalar | EngineKind::Emulated(_) => true,
        EngineKind::Native => capabilities().native_available(),
    }
}

/// The engine named by [`ENGINE_ENV`], if set.
pub fn engine_from_env() -> Result<Option<EngineKind>, EngineError> {
    match std::env::var(ENGINE_ENV) {
        Ok(v) if !v.trim().is_empty() => v.parse().map(Some),
        _ => Ok(None),
    }
}

/// Fastest engine on this host, ignoring the environment.
pub fn preferred() -> EngineKind {
    if capabilities().native_available() {
        EngineKind::Native
    } else {
        EngineKind::default_emulated()
    }
}

/// Transcoding and validation through one selected engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transcoder {
    kind: EngineKind,
}

impl Transcoder {
    pub fn new(kind: EngineKind) -> Result<Self, EngineError> {
        if is_available(kind) {
            Ok(Self { kind })
        } else {
            Err(EngineError::Unavailable(kind))
        }
    }

    /// Uses [`ENGINE_ENV`] when set, otherwise [`preferred`].
    pub fn auto() -> Result<Self, EngineError> {
        Self::new(engine_from_env()?.unwrap_or_else(preferred))
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    /// `output` needs at most `input.len()` words.
    pub fn utf8_to_utf16(&self, input: &[u8], output: &mut [u16]) -> TranscodeOutcome {
        match self.kind {
            EngineKind::Scalar => scalar::transcode_utf8_to_utf16le_into(input, output),
            EngineKind::Emulated(n) => Utf8ToUtf16::new(n).run(input, output),
            EngineKind::Native => native_utf8_to_utf16(input, output),
        }
    }

    /// `output` needs at most `3 * input.len()` bytes.
    pub fn utf16_to_utf8(&self, input: &[u16], output: &mut [u8]) -> TranscodeOutcome {
        match self.kind {
            EngineKind::Scalar => scalar::transcode_utf16le_to_utf8_into(input, output),
            EngineKind::Emulated(n) => Utf16ToUtf8::new(n).run(input, output),
            EngineKind::Native => native_utf16_to_utf8(input, output),
        }
    }

    pub fn validate_utf8(&self, input: &[u8]) -> TranscodeOutcome {
        match self.kind {
            EngineKind::Scalar => scalar::validate_utf8(input),
            EngineKind::Emulated(n) => Utf8ToUtf16::new(n).validate(input),
            EngineKind::Native => native_validate_utf8(input),
        }
    }

    pub fn validate_utf16(&self, input: &[u16]) -> TranscodeOutcome {
        match self.kind {
            EngineKind::Scalar => scalar::validate_utf16le(input),
            EngineKind::Emulated(n) => Utf16ToUtf8::new(n).validate(input),
            EngineKind::Native => native_validate_utf16(input),
        }
    }

    /// Allocating convenience wrapper; the vector holds exactly `written` words.
    pub fn utf8_to_utf16_vec(&self, input: &[u8]) -> (TranscodeOutcome, Vec<u16>) {
        let mut out = vec![0u16; scalar::utf16_capacity_for_utf8(input.len())];
        let o = self.utf8_to_utf16(input, &mut out);
        out.truncate(o.written);
        (o, out)
    }

    pub fn utf16_to_utf8_vec(&self, input: &[u16]) -> (TranscodeOutcome, Vec<u8>) {
        let mut out = vec![0u8; scalar::utf8_capacity_for_utf16(input.len())];
        let o = self.utf16_to_utf8(input, &mut out);
        out.truncate(o.written);
        (o, out)
    }
}

#[cfg(all(feature = "native", target_arch = "x86_64"))]
use crate::native;

#[cfg(not(all(feature = "native", target_arch = "x86_64")))]
mod native {
    use crate::TranscodeOutcome;
    pub fn utf8_to_utf16(_: &[u8], _: &mut [u16]) -> Option<TranscodeOutcome> {
        None
    }
    pub fn utf16_to_utf8(_: &[u16], _: &mut [u8]) -> Option<TranscodeOutcome> {
        None
    }
    pub fn validate_utf8(_: &[u8]) -> Option<TranscodeOutcome> {
        None
    }
    pub fn validate_utf16(_: &[u16]) -> Option<TranscodeOutcome> {
        None
    }
}

const NATIVE_GONE: &str = "native engine was available at construction";

fn native_utf8_to_utf16(input: &[u8], output: &mut [u16]) -> TranscodeOutcome {
    native::utf8_to_utf16(input, output).expect(NATIVE_GONE)
}

fn native_utf16_to_utf8(input: &[u16], output: &mut [u8]) -> TranscodeOutcome {
    native::utf16_to_utf8(input, output).expect(NATIVE_GONE)
}

fn native_validate_utf8(input: &[u8]) -> TranscodeOutcome {
    native::validate_utf8(input).expect(NATIVE_GONE)
}

fn native_validate_utf16(input: &[u16]) -> TranscodeOutcome {
    native::validate_utf16(input).expect(NATIVE_GONE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_engine_names() {
        assert_eq!("scalar".parse::<EngineKind>(), Ok(EngineKind::Scalar));
        assert_eq!(
            "emulated".parse::<EngineKind>(),
            Ok(EngineKind::Emulated(LaneCount::N64))
        );
        assert_eq!(
            "Emulated:16".parse::<EngineKind>(),
            Ok(EngineKind::Emulated(LaneCount::N16))
        );
        assert!("emulated:12".parse::<EngineKind>().is_err());
        assert!("gpu".parse::<EngineKind>().is_err());
        for k in detect() {
            assert_eq!(k.name().parse::<EngineKind>(), Ok(k));
        }
    }

    #[test]
    fn detection_is_stable() {
        assert_eq!(detect(), detect());
        assert!(std::ptr::eq(capabilities(), capabilities()));
        let kinds = detect();
        assert_eq!(kinds[0], EngineKind::Scalar);
        assert_eq!(
            kinds.contains(&EngineKind::Native),
            capabilities().native_available()
        );
    }

    #[test]
    fn unavailable_native_is_rejected() {
        if !capabilities().native_available() {
            assert_eq!(
                Transcoder::new(EngineKind::Native),
                Err(EngineError::Unavailable(EngineKind::Native))
            );
        }
    }

    #[test]
    fn engines_agree_on_worked_example() {
        let bytes = "@§∈𝒪".as_bytes();
        let words = [0x0040, 0x00A7, 0x2208, 0xD835, 0xDCAA];
        for kind in detect() {
            let t = Transcoder::new(kind).unwrap();
            assert_eq!(
                t.utf8_to_utf16_vec(bytes),
                (TranscodeOutcome::ok(10, 5), words.to_vec())
            );
            assert_eq!(
                t.utf16_to_utf8_vec(&words),
                (TranscodeOutcome::ok(5, 10), bytes.to_vec())
            );
            assert_eq!(
                t.utf8_to_utf16_vec(&[]),
                (TranscodeOutcome::ok(0, 0), vec![])
            );
            assert_eq!(t.validate_utf8(bytes), TranscodeOutcome::ok(10, 0));
            assert_eq!(
                t.validate_utf16(&words[..4]),
                TranscodeOutcome::malformed(3, 0)
            );
        }
    }
}
