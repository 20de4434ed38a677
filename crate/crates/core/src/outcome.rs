use std::fmt;

use thiserror::Error;

/// How a transcoding or validation call ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    /// The input is not well formed; `consumed` marks the first offending unit.
    MalformedInput,
    /// The output buffer filled up; `consumed` marks where transcoding stopped.
    OutputTooSmall,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::MalformedInput => "malformed-input",
            Status::OutputTooSmall => "output-too-small",
        })
    }
}

/// Result triple shared by every engine.
///
/// `consumed` counts input code units (bytes or 16-bit words). For
/// malformed input it is the length of the longest valid prefix, which is
/// also the index of the first unit of the offending sequence. `written`
/// counts output code units and is zero for validation-only calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TranscodeOutcome {
    pub status: Status,
    pub consumed: usize,
    pub written: usize,
}

impl TranscodeOutcome {
    pub const fn ok(consumed: usize, written: usize) -> Self {
        Self {
            status: Status::Ok,
            consumed,
            written,
        }
    }

    pub const fn malformed(consumed: usize, written: usize) -> Self {
        Self {
            status: Status::MalformedInput,
            consumed,
            written,
        }
    }

    pub const fn output_too_small(consumed: usize, written: usize) -> Self {
        Self {
            status: Status::OutputTooSmall,
            consumed,
            written,
        }
    }

    pub const fn is_ok(&self) -> bool {
        matches!(self.status, Status::Ok)
    }

    /// Position of the first invalid unit, if the input was malformed.
    pub const fn error_position(&self) -> Option<usize> {
        match self.status {
            Status::MalformedInput => Some(self.consumed),
            _ => None,
        }
    }
}

impl fmt::Display for TranscodeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (consumed {}, written {})",
            self.status, self.consumed, self.written
        )
    }
}

/// Malformed input detected by a length or validation helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("malformed input at code unit {position}")]
pub struct Malformed {
    pub position: usize,
}

/// Offset of the first invalid code unit within the current vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvalidAt(pub usize);
