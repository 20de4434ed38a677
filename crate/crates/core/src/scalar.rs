//! Character-at-a-time reference transcoders.
//!
//! These follow the encoding tables directly and make no attempt at speed;
//! the vector engines are tested for byte-exact agreement with them.
//!
//! Error positions always point at the first code unit of the offending
//! sequence. A stray continuation byte or an invalid byte reports itself.
//! A lead byte that is missing continuations, or whose sequence decodes to
//! an overlong form, a surrogate or a value above U+10FFFF, reports the
//! lead byte.

use std::fmt;

use crate::outcome::{Malformed, TranscodeOutcome};

/// A Unicode scalar value: at most U+10FFFF and not a surrogate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodePoint(u32);

impl CodePoint {
    pub const MAX: CodePoint = CodePoint(0x10FFFF);

    pub const fn new(value: u32) -> Option<Self> {
        if value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF) {
            None
        } else {
            Some(CodePoint(value))
        }
    }

    #[inline]
    pub const fn value(self) -> u32 {
        self.0
    }

    pub const fn utf8_len(self) -> usize {
        match self.0 {
            0..=0x7F => 1,
            0x80..=0x7FF => 2,
            0x800..=0xFFFF => 3,
            _ => 4,
        }
    }

    pub const fn utf16_len(self) -> usize {
        if self.0 < 0x10000 {
            1
        } else {
            2
        }
    }

    pub fn encode_utf8(self, out: &mut Vec<u8>) {
        let v = self.0;
        match self.utf8_len() {
            1 => out.push(v as u8),
            2 => out.extend_from_slice(&[0xC0 | (v >> 6) as u8, 0x80 | (v & 0x3F) as u8]),
            3 => out.extend_from_slice(&[
                0xE0 | (v >> 12) as u8,
                0x80 | ((v >> 6) & 0x3F) as u8,
                0x80 | (v & 0x3F) as u8,
            ]),
            _ => out.extend_from_slice(&[
                0xF0 | (v >> 18) as u8,
                0x80 | ((v >> 12) & 0x3F) as u8,
                0x80 | ((v >> 6) & 0x3F) as u8,
                0x80 | (v & 0x3F) as u8,
            ]),
        }
    }

    pub fn encode_utf16(self, out: &mut Vec<u16>) {
        if self.0 < 0x10000 {
            out.push(self.0 as u16);
        } else {
            let v = self.0 - 0x10000;
            out.push(0xD800 + (v >> 10) as u16);
            out.push(0xDC00 + (v & 0x3FF) as u16);
        }
    }
}

impl From<char> for CodePoint {
    fn from(c: char) -> Self {
        CodePoint(c as u32)
    }
}

impl From<CodePoint> for char {
    fn from(c: CodePoint) -> char {
        char::from_u32(c.0).expect("CodePoint is always a scalar value")
    }
}

impl fmt::Debug for CodePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U+{:04X}", self.0)
    }
}

/// Decodes the UTF-8 sequence starting at `input[i]`, returning the scalar
/// value and the sequence length, or `None` if the sequence is malformed.
pub fn decode_utf8_at(input: &[u8], i: usize) -> Option<(CodePoint, usize)> {
    let lead = input[i];
    let (len, bits) = match lead {
        0x00..=0x7F => return Some((CodePoint(lead as u32), 1)),
        0xC2..=0xDF => (2, lead & 0x1F),
        0xE0..=0xEF => (3, lead & 0x0F),
        0xF0..=0xF4 => (4, lead & 0x07),
        // continuation bytes, C0/C1 and F5..FF never start a sequence
        _ => return None,
    };
    let tail = input.get(i + 1..i + len)?;
    let mut value = bits as u32;
    for &b in tail {
        if b & 0xC0 != 0x80 {
            return None;
        }
        value = value << 6 | (b & 0x3F) as u32;
    }
    let shortest = [0, 0, 0x80, 0x800, 0x10000][len];
    if value < shortest {
        return None;
    }
    CodePoint::new(value).map(|c| (c, len))
}

/// Decodes the UTF-16 character starting at `input[i]`.
pub fn decode_utf16_at(input: &[u16], i: usize) -> Option<(CodePoint, usize)> {
    let w = input[i];
    match w {
        0xD800..=0xDBFF => match input.get(i + 1) {
            Some(&lo @ 0xDC00..=0xDFFF) => {
                let v = 0x10000 + (((w - 0xD800) as u32) << 10) + (lo - 0xDC00) as u32;
                Some((CodePoint(v), 2))
            }
            _ => None,
        },
        0xDC00..=0xDFFF => None,
        _ => Some((CodePoint(w as u32), 1)),
    }
}

pub fn validate_utf8(input: &[u8]) -> TranscodeOutcome {
    let mut i = 0;
    while i < input.len() {
        match decode_utf8_at(input, i) {
            Some((_, len)) => i += len,
            None => return TranscodeOutcome::malformed(i, 0),
        }
    }
    TranscodeOutcome::ok(i, 0)
}

pub fn validate_utf16le(input: &[u16]) -> TranscodeOutcome {
    let mut i = 0;
    while i < input.len() {
        match decode_utf16_at(input, i) {
            Some((_, len)) => i += len,
            None => return TranscodeOutcome::malformed(i, 0),
        }
    }
    TranscodeOutcome::ok(i, 0)
}

/// Transcodes the valid prefix of `input`; the returned words are exactly
/// `outcome.written` long.
pub fn transcode_utf8_to_utf16le(input: &[u8]) -> (TranscodeOutcome, Vec<u16>) {
    let mut out = Vec::with_capacity(input.len());
    let mut i = 0;
    while i < input.len() {
        match decode_utf8_at(input, i) {
            Some((c, len)) => {
                c.encode_utf16(&mut out);
                i += len;
            }
            None => {
                let written = out.len();
                return (TranscodeOutcome::malformed(i, written), out);
            }
        }
    }
    (TranscodeOutcome::ok(i, out.len()), out)
}

pub fn transcode_utf16le_to_utf8(input: &[u16]) -> (TranscodeOutcome, Vec<u8>) {
    let mut out = Vec::with_capacity(input.len() * 3);
    let mut i = 0;
    while i < input.len() {
        match decode_utf16_at(input, i) {
            Some((c, len)) => {
                c.encode_utf8(&mut out);
                i += len;
            }
            None => {
                let written = out.len();
                return (TranscodeOutcome::malformed(i, written), out);
            }
        }
    }
    (TranscodeOutcome::ok(i, out.len()), out)
}

/// Buffer-filling variant of [`transcode_utf8_to_utf16le`]. Stops before
/// the first character that does not fit and reports output-too-small.
pub fn transcode_utf8_to_utf16le_into(input: &[u8], output: &mut [u16]) -> TranscodeOutcome {
    let mut i = 0;
    let mut written = 0;
    let mut units = Vec::with_capacity(2);
    while i < input.len() {
        let Some((c, len)) = decode_utf8_at(input, i) else {
            return TranscodeOutcome::malformed(i, written);
        };
        units.clear();
        c.encode_utf16(&mut units);
        let Some(dst) = output.get_mut(written..written + units.len()) else {
            return TranscodeOutcome::output_too_small(i, written);
        };
        dst.copy_from_slice(&units);
        written += units.len();
        i += len;
    }
    TranscodeOutcome::ok(i, written)
}

/// Buffer-filling variant of [`transcode_utf16le_to_utf8`].
pub fn transcode_utf16le_to_utf8_into(input: &[u16], output: &mut [u8]) -> TranscodeOutcome {
    let mut i = 0;
    let mut written = 0;
    let mut units = Vec::with_capacity(4);
    while i < input.len() {
        let Some((c, len)) = decode_utf16_at(input, i) else {
            return TranscodeOutcome::malformed(i, written);
        };
        units.clear();
        c.encode_utf8(&mut units);
        let Some(dst) = output.get_mut(written..written + units.len()) else {
            return TranscodeOutcome::output_too_small(i, written);
        };
        dst.copy_from_slice(&units);
        written += units.len();
        i += len;
    }
    TranscodeOutcome::ok(i, written)
}

/// Exact number of UTF-16 words `input` transcodes to.
pub fn utf16_length_from_utf8(input: &[u8]) -> Result<usize, Malformed> {
    let mut i = 0;
    let mut words = 0;
    while i < input.len() {
        let (c, len) = decode_utf8_at(input, i).ok_or(Malformed { position: i })?;
        words += c.utf16_len();
        i += len;
    }
    Ok(words)
}

/// Exact number of UTF-8 bytes `input` transcodes to.
pub fn utf8_length_from_utf16(input: &[u16]) -> Result<usize, Malformed> {
    let mut i = 0;
    let mut bytes = 0;
    while i < input.len() {
        let (c, len) = decode_utf16_at(input, i).ok_or(Malformed { position: i })?;
        bytes += c.utf8_len();
        i += len;
    }
    Ok(bytes)
}

/// Output words that always suffice for `input_len` bytes of UTF-8, valid or not.
pub const fn utf16_capacity_for_utf8(input_len: usize) -> usize {
    input_len
}

/// Output bytes that always suffice for `input_len` words of UTF-16, valid or not.
pub const fn utf8_capacity_for_utf16(input_len: usize) -> usize {
    input_len * 3
}

/// Counts characters; malformed input counts up to the first error.
pub fn count_chars_utf8(input: &[u8]) -> usize {
    let mut i = 0;
    let mut chars = 0;
    while i < input.len() {
        match decode_utf8_at(input, i) {
            Some((_, len)) => {
                i += len;
                chars += 1;
            }
            None => break,
        }
    }
    chars
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Status;
    use proptest::prelude::*;

    fn malformed_at(o: TranscodeOutcome) -> Option<usize> {
        o.error_position()
    }

    #[test]
    fn spec_utf8_validation_examples() {
        assert_eq!(malformed_at(validate_utf8(&[0xC0, 0x80])), Some(0));
        assert_eq!(malformed_at(validate_utf8(&[0xED, 0xA0, 0x80])), Some(0));
        assert!(validate_utf8(&[0xF4, 0x8F, 0xBF, 0xBF]).is_ok());
        assert_eq!(
            malformed_at(validate_utf8(&[0xF4, 0x90, 0x80, 0x80])),
            Some(0)
        );
        assert_eq!(malformed_at(validate_utf8(&[0x41, 0x80])), Some(1));
        assert_eq!(malformed_at(validate_utf8(&[0xE2, 0x88, 0x41])), Some(0));
        assert_eq!(malformed_at(validate_utf8(&[0x41, 0xF5])), Some(1));
    }

    #[test]
    fn worked_example_to_utf16() {
        let bytes = [0x40, 0xC2, 0xA7, 0xE2, 0x88, 0x88, 0xF0, 0x9D, 0x92, 0xAA];
        let (o, words) = transcode_utf8_to_utf16le(&bytes);
        assert_eq!(o, TranscodeOutcome::ok(10, 5));
        assert_eq!(words, [0x0040, 0x00A7, 0x2208, 0xD835, 0xDCAA]);
        let (o, back) = transcode_utf16le_to_utf8(&words);
        assert_eq!(o, TranscodeOutcome::ok(5, 10));
        assert_eq!(back, bytes);
    }

    #[test]
    fn nabla_fraktur_p() {
        let bytes = [0x78, 0xE2, 0x88, 0x87, 0xF0, 0x9D, 0x94, 0x93];
        let (_, words) = transcode_utf8_to_utf16le(&bytes);
        assert_eq!(words, [0x0078, 0x2207, 0xD835, 0xDD13]);
        let std_words: Vec<u16> = "x\u{2207}\u{1D513}".encode_utf16().collect();
        assert_eq!(words, std_words);
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            transcode_utf8_to_utf16le(&[]),
            (TranscodeOutcome::ok(0, 0), vec![])
        );
        assert_eq!(
            transcode_utf16le_to_utf8(&[]),
            (TranscodeOutcome::ok(0, 0), vec![])
        );
    }

    #[test]
    fn utf16_sequencing_examples() {
        assert_eq!(
            transcode_utf16le_to_utf8(&[0xD835, 0xDCAA]).1,
            [0xF0, 0x9D, 0x92, 0xAA]
        );
        let (o, out) = transcode_utf16le_to_utf8(&[0xDC00, 0x0041]);
        assert_eq!(o, TranscodeOutcome::malformed(0, 0));
        assert!(out.is_empty());
        let (o, out) = transcode_utf16le_to_utf8(&[0x0041, 0xD801, 0x0042]);
        assert_eq!(o, TranscodeOutcome::malformed(1, 1));
        assert_eq!(out, b"A");
        // a high surrogate at the very end has nothing to pair with
        assert_eq!(
            validate_utf16le(&[0x41, 0xD800]),
            TranscodeOutcome::malformed(1, 0)
        );
    }

    #[test]
    fn into_variants_stop_on_character_boundaries() {
        let bytes = "a\u{1D4AA}b".as_bytes();
        let mut out = [0u16; 2];
        assert_eq!(
            transcode_utf8_to_utf16le_into(bytes, &mut out),
            TranscodeOutcome::output_too_small(1, 1)
        );
        let mut out = [0u16; 4];
        assert_eq!(
            transcode_utf8_to_utf16le_into(bytes, &mut out),
            TranscodeOutcome::ok(6, 4)
        );
        let words = [0x41, 0x2208];
        let mut small = [0u8; 3];
        assert_eq!(
            transcode_utf16le_to_utf8_into(&words, &mut small),
            TranscodeOutcome::output_too_small(1, 1)
        );
        assert_eq!(
            transcode_utf16le_to_utf8_into(&[0x41, 0xDC00], &mut small),
            TranscodeOutcome::malformed(1, 1)
        );
    }

    #[test]
    fn length_helpers() {
        assert_eq!(utf16_length_from_utf8(b"abc"), Ok(3));
        assert_eq!(utf16_length_from_utf8(&[0xE2, 0x88, 0x88]), Ok(1));
        assert_eq!(utf16_length_from_utf8(&[0xF0, 0x9D, 0x92, 0xAA]), Ok(2));
        assert_eq!(
            utf16_length_from_utf8(&[0x41, 0xFF]),
            Err(Malformed { position: 1 })
        );
        assert_eq!(utf8_length_from_utf16(&[0xD835, 0xDCAA, 0x41]), Ok(5));
        assert_eq!(utf8_capacity_for_utf16(10), 30);
        assert_eq!(utf16_capacity_for_utf8(7), 7);
    }

    #[test]
    fn code_point_rejects_surrogates_and_overflow() {
        assert!(CodePoint::new(0xD800).is_none());
        assert!(CodePoint::new(0xDFFF).is_none());
        assert!(CodePoint::new(0x110000).is_none());
        assert_eq!(CodePoint::new(0x10FFFF), Some(CodePoint::MAX));
    }

    #[test]
    fn every_scalar_value_round_trips() {
        let mut u8buf = Vec::new();
        let mut u16buf = Vec::new();
        for v in (0..=0x10FFFFu32).filter(|v| !(0xD800..=0xDFFF).contains(v)) {
            let c = CodePoint::new(v).unwrap();
            u8buf.clear();
            u16buf.clear();
            c.encode_utf8(&mut u8buf);
            c.encode_utf16(&mut u16buf);
            let ch = char::from(c);
            let mut std8 = [0u8; 4];
            let mut std16 = [0u16; 2];
            assert_eq!(u8buf, ch.encode_utf8(&mut std8).as_bytes());
            assert_eq!(u16buf, ch.encode_utf16(&mut std16));
            assert_eq!(decode_utf8_at(&u8buf, 0), Some((c, u8buf.len())));
            assert_eq!(decode_utf16_at(&u16buf, 0), Some((c, u16buf.len())));
        }
    }

    #[test]
    fn overlong_forms_are_rejected() {
        for lead in [0xC0u8, 0xC1] {
            for b in 0..=255u8 {
                assert_eq!(validate_utf8(&[lead, b]).status, Status::MalformedInput);
            }
        }
        for b1 in 0x80..=0x9Fu8 {
            for b2 in 0x80..=0xBFu8 {
                assert_eq!(validate_utf8(&[0xE0, b1, b2]).error_position(), Some(0));
            }
        }
        for b1 in 0x80..=0x8Fu8 {
            for b2 in 0x80..=0xBFu8 {
                assert_eq!(
                    validate_utf8(&[0xF0, b1, b2, 0x80]).error_position(),
                    Some(0)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn matches_std_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let o = validate_utf8(&bytes);
            match std::str::from_utf8(&bytes) {
                Ok(_) => prop_assert_eq!(o, TranscodeOutcome::ok(bytes.len(), 0)),
                Err(e) => prop_assert_eq!(o.error_position(), Some(e.valid_up_to())),
            }
        }

        #[test]
        fn matches_std_on_arbitrary_words(words in proptest::collection::vec(
            prop_oneof![any::<u16>(), 0xD800u16..0xE000], 0..48)) {
            let (o, out) = transcode_utf16le_to_utf8(&words);
            let mut expect = String::new();
            let mut pos = 0;
            for r in char::decode_utf16(words.iter().copied()) {
                match r {
                    Ok(c) => { expect.push(c); pos += c.len_utf16(); }
                    Err(_) => break,
                }
            }
            prop_assert_eq!(o.consumed, pos);
            prop_assert_eq!(o.is_ok(), pos == words.len());
            prop_assert_eq!(out, expect.as_bytes());
        }
    }
}
