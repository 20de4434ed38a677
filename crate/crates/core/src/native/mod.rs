//! AVX-512 kernels for 64 lanes.
//!
//! Each kernel is a direct translation of the emulated engine at `n = 64`,
//! so both produce the same outcome, the same output and the same path
//! choices for every input. Entry points return `None` when the CPU lacks
//! any of AVX-512 F/BW/DQ/VBMI/VBMI2 or BMI2.

mod utf16_to_utf8;
mod utf8_to_utf16;

use crate::engine::capabilities;
use crate::TranscodeOutcome;

pub fn is_supported() -> bool {
    capabilities().native_available()
}

pub fn utf8_to_utf16(input: &[u8], output: &mut [u16]) -> Option<TranscodeOutcome> {
    // SAFETY: the required features were detected at runtime.
    is_supported().then(|| unsafe { utf8_to_utf16::run(input, Some(output)) })
}

pub fn validate_utf8(input: &[u8]) -> Option<TranscodeOutcome> {
    // SAFETY: as above.
    is_supported().then(|| TranscodeOutcome {
        written: 0,
        ..unsafe { utf8_to_utf16::run(input, None) }
    })
}

pub fn utf16_to_utf8(input: &[u16], output: &mut [u8]) -> Option<TranscodeOutcome> {
    // SAFETY: as above.
    is_supported().then(|| unsafe { utf16_to_utf8::run(input, Some(output)) })
}

pub fn validate_utf16(input: &[u16]) -> Option<TranscodeOutcome> {
    // SAFETY: as above.
    is_supported().then(|| TranscodeOutcome {
        written: 0,
        ..unsafe { utf16_to_utf8::run(input, None) }
    })
}

#[inline(always)]
fn prefix64(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

#[inline(always)]
fn prefix32(k: usize) -> u32 {
    prefix64(k) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{utf16_to_utf8::Utf16ToUtf8, utf8_to_utf16::Utf8ToUtf16, LaneCount};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_utf8(input: &[u8]) {
        let mut a = vec![0u16; input.len()];
        let mut b = vec![0u16; input.len()];
        let expect = Utf8ToUtf16::new(LaneCount::N64).run(input, &mut a);
        let got = utf8_to_utf16(input, &mut b).unwrap();
        assert_eq!(got, expect, "{input:02x?}");
        assert_eq!(a[..expect.written], b[..got.written]);
        assert_eq!(
            validate_utf8(input).unwrap(),
            TranscodeOutcome {
                written: 0,
                ..expect
            }
        );
    }

    fn check_utf16(input: &[u16]) {
        let mut a = vec![0u8; 3 * input.len()];
        let mut b = vec![0u8; 3 * input.len()];
        let expect = Utf16ToUtf8::new(LaneCount::N64).run(input, &mut a);
        let got = utf16_to_utf8(input, &mut b).unwrap();
        assert_eq!(got, expect, "{input:04x?}");
        assert_eq!(a[..expect.written], b[..got.written]);
        assert_eq!(
            validate_utf16(input).unwrap(),
            TranscodeOutcome {
                written: 0,
                ..expect
            }
        );
    }

    #[test]
    fn matches_emulator_on_samples() {
        if !is_supported() {
            return;
        }
        let text = "x∇𝔓 ±1=𝒪 Grüße, 世界! ".repeat(17);
        check_utf8(text.as_bytes());
        let words: Vec<u16> = text.encode_utf16().collect();
        check_utf16(&words);
        check_utf8(&[]);
        check_utf16(&[]);
        check_utf16(&[0xD800]);
        check_utf16(
            &[0x41; 31]
                .iter()
                .copied()
                .chain([0xD83D, 0xDE00])
                .collect::<Vec<_>>(),
        );
    }

    #[test]
    fn matches_emulator_on_random_inputs() {
        if !is_supported() {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alphabet = ["a", "é", "ߞ", "€", "中", "😀", "\u{10FFFF}"];
        for _ in 0..3000 {
            let len = rng.random_range(0..300);
            let mut s = String::new();
            while s.len() < len {
                s.push_str(alphabet[rng.random_range(0..alphabet.len())]);
            }
            let mut bytes = s.clone().into_bytes();
            let mut words: Vec<u16> = s.encode_utf16().collect();
            if rng.random_bool(0.5) && !bytes.is_empty() {
                let i = rng.random_range(0..bytes.len());
                bytes[i] = rng.random();
            }
            if rng.random_bool(0.5) && !words.is_empty() {
                let i = rng.random_range(0..words.len());
                words[i] = 0xD800 | rng.random_range(0..0x800);
            }
            check_utf8(&bytes);
            check_utf16(&words);
        }
    }

    #[test]
    fn small_output_buffers() {
        if !is_supported() {
            return;
        }
        let text = "€".repeat(100);
        let mut out = vec![0u16; 10];
        let o = utf8_to_utf16(text.as_bytes(), &mut out).unwrap();
        let mut out2 = vec![0u16; 10];
        assert_eq!(
            o,
            Utf8ToUtf16::new(LaneCount::N64).run(text.as_bytes(), &mut out2)
        );
        let words: Vec<u16> = text.encode_utf16().collect();
        let mut out = vec![0u8; 50];
        let mut out2 = vec![0u8; 50];
        assert_eq!(
            utf16_to_utf8(&words, &mut out).unwrap(),
            Utf16ToUtf8::new(LaneCount::N64).run(&words, &mut out2)
        );
    }
}
