//! UTF-8 and UTF-16 transcoding built from vector mask algebra.
//!
//! The transcoders are written against a portable emulation of an `n`-lane
//! vector unit ([`substrate`]), so the same code runs at 8, 16, 32 or 64
//! lanes. A scalar reference implementation ([`scalar`]) defines the
//! expected output and error positions, and an optional AVX-512 backend
//! runs the same algorithms on hardware.
//!
//! ```
//! use lanecode::{EngineKind, Transcoder};
//!
//! let t = Transcoder::new(EngineKind::default_emulated()).unwrap();
//! let (outcome, words) = t.utf8_to_utf16_vec("@§∈𝒪".as_bytes());
//! assert!(outcome.is_ok());
//! assert_eq!(words, [0x0040, 0x00A7, 0x2208, 0xD835, 0xDCAA]);
//! ```

pub mod corpus;
pub mod difftest;
pub mod endian;
pub mod engine;
#[cfg(all(feature = "native", target_arch = "x86_64"))]
pub mod native;
mod outcome;
pub mod scalar;
pub mod substrate;
pub mod utf16_to_utf8;
pub mod utf8_to_utf16;

pub use engine::{Capabilities, Direction, EngineError, EngineKind, Transcoder};
pub use outcome::{InvalidAt, Malformed, Status, TranscodeOutcome};
pub use substrate::{ByteVec, DwordVec, LaneCount, LaneMask, WordVec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
