//! UTF-16LE to UTF-8 over the lane emulator.
//!
//! Each iteration loads `n/2` words and encodes the first `n/2 - 1`; the
//! last word is a lookahead so a high surrogate in the final committed lane
//! can see its low surrogate. A one-bit carry tells the next iteration
//! whether its first word completes a pair that was already emitted.
//!
//! Every word is widened to 32 bits, surrogate pairs are joined into code
//! points, and a multishift spreads each code point over four bytes before
//! tag bits are applied. A byte-wise keep mask then squeezes out the padding
//! and the spent low surrogates.

use crate::outcome::{InvalidAt, TranscodeOutcome};
use crate::substrate::{
    masked_load_words, masked_store, ByteVec, DwordVec, LaneCount, LaneMask, WordVec,
};

/// Word-class masks over one input vector, plus the lookahead lane `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf16ClassMasks {
    pub l: LaneMask,
    pub m_234: LaneMask,
    pub m_12: LaneMask,
    pub m_hi: LaneMask,
    pub m_lo: LaneMask,
}

pub fn lookahead(n: LaneCount) -> LaneMask {
    let half = n.words() as u32;
    LaneMask::bit(half - 1, half)
}

pub fn classify(w_in: &WordVec) -> Utf16ClassMasks {
    let l = lookahead(w_in.lane_count());
    let tagged = *w_in & WordVec::splat(w_in.lane_count(), 0xFC00);
    Utf16ClassMasks {
        l,
        m_234: w_in.ge_splat(0x0080) & !l,
        m_12: w_in.lt_splat(0x0800),
        m_hi: tagged.eq_splat(0xD800) & !l,
        m_lo: tagged.eq_splat(0xDC00),
    }
}

/// Bytes produced by one iteration, in up to two compressed chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emitted {
    pub chunks: [(ByteVec, usize); 2],
}

impl Emitted {
    fn single(v: ByteVec, len: usize) -> Self {
        Self {
            chunks: [(v, len), (ByteVec::zero(v.lane_count()), 0)],
        }
    }

    pub fn len(&self) -> usize {
        self.chunks[0].1 + self.chunks[1].1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        for (v, len) in &self.chunks {
            out.extend_from_slice(&v.as_slice()[..*len]);
        }
        out
    }
}

/// All words ASCII: truncate to bytes. The lookahead byte is computed but
/// never committed.
pub fn fast_path_ascii(w_in: &WordVec) -> Emitted {
    Emitted::single(w_in.truncate(), w_in.len() - 1)
}

/// Lanes of the lookahead word, as a byte mask over a word vector.
fn lookahead_bytes(n: LaneCount) -> LaneMask {
    let width = n.bytes() as u32;
    LaneMask::new(0b11 << (width - 2), width)
}

/// All words below U+0800: build 2-byte sequences in place.
pub fn fast_path_12(w_in: &WordVec, masks: &Utf16ClassMasks) -> Emitted {
    let n = w_in.lane_count();
    let shuffled = (*w_in << 8) | (*w_in >> 6);
    let two_byte = (shuffled & WordVec::splat(n, 0x3F3F)) | WordVec::splat(n, 0x80C0);
    let w_out = WordVec::select(masks.m_234, &two_byte, w_in);
    let threshold = WordVec::select(
        masks.l,
        &WordVec::splat(n, 0xFFFF),
        &WordVec::splat(n, 0x0800),
    );
    // A lookahead word ending in 0xFF would pass the 0xFF threshold; it is
    // never committed, so its lanes are cleared explicitly.
    let m_keep = w_out.bytes_ge(&threshold) & !lookahead_bytes(n);
    let n_out = masks.m_234.popcount() as usize + w_in.len() - 1;
    debug_assert_eq!(m_keep.popcount() as usize, n_out);
    Emitted::single(w_out.to_le_bytes().compress(m_keep), n_out)
}

/// Joins each high surrogate with the low surrogate in the next lane.
pub fn join_surrogates(w_in: &WordVec, m_hi: LaneMask) -> DwordVec {
    let n = w_in.lane_count();
    let wide = w_in.widen();
    let w_lo = wide.rotate_down(1);
    let joined = (wide << 10) + w_lo + DwordVec::splat(n, 0xFCA0_2400);
    DwordVec::select(m_hi, &joined, &wide)
}

/// Intermediate vectors of the encoding step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    pub w_shifted: DwordVec,
    pub w_tag: DwordVec,
    pub w_out: DwordVec,
    pub w_keep: DwordVec,
    pub m_keep: [LaneMask; 2],
    pub emitted: Emitted,
}

pub const MULTISHIFT_OFFSETS: [u8; 4] = [18, 12, 6, 0];

pub fn encode(w_joined: &DwordVec, w_in: &WordVec, masks: &Utf16ClassMasks) -> Encoding {
    let n = w_in.lane_count();
    let splat = |x| DwordVec::splat(n, x);
    let w_shifted = w_joined.multishift(MULTISHIFT_OFFSETS);
    let two_byte = w_joined.lt_splat(0x800);
    let w_tag = DwordVec::select(
        masks.m_hi,
        &splat(0x8080_80F0),
        &DwordVec::select(two_byte, &splat(0x80C0_0000), &splat(0x8080_E000)),
    );
    let w_out = DwordVec::select(
        masks.m_234,
        &((w_shifted & splat(0x3F3F_3F3F)) | w_tag),
        &(w_in.widen() << 24),
    );
    let w_keep = DwordVec::select(
        masks.m_lo | masks.l,
        &splat(0xFFFF_FFFF),
        &splat(0x0001_0101),
    );
    let [k0, k1] = w_out.bytes_ge(&w_keep);
    // Same lookahead guard as the 1/2-byte path: the lookahead lane is the
    // last dword of the upper half.
    let m_keep = [
        k0,
        k1 & !LaneMask::new(0xF << (n.bytes() - 4), n.bytes() as u32),
    ];
    let [b0, b1] = w_out.to_le_byte_halves();
    let emitted = Emitted {
        chunks: [
            (b0.compress(m_keep[0]), m_keep[0].popcount() as usize),
            (b1.compress(m_keep[1]), m_keep[1].popcount() as usize),
        ],
    };
    Encoding {
        w_shifted,
        w_tag,
        w_out,
        w_keep,
        m_keep,
        emitted,
    }
}

/// Checks surrogate sequencing given the incoming carry `c`; returns the
/// outgoing carry.
pub fn validate_sequencing(m_hi: LaneMask, m_lo: LaneMask, c: bool) -> Result<bool, InvalidAt> {
    let half = m_hi.width();
    let carry = LaneMask::new(c as u64, half);
    let expected_lo = (m_hi << 1) | carry;
    if expected_lo == m_lo {
        return Ok(m_hi.test(half - 2));
    }
    let hi_without_lo = m_hi & !(m_lo >> 1);
    let lo_without_hi = m_lo & !expected_lo;
    Err(InvalidAt((hi_without_lo | lo_without_hi).ctz() as usize))
}

/// Every variable of one surrogate-path iteration, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf16IterState {
    pub w_in: WordVec,
    pub masks: Utf16ClassMasks,
    pub w_joined: DwordVec,
    pub encoding: Encoding,
    pub c: bool,
    pub c_out: bool,
}

pub fn general_iteration(w_in: &WordVec, c: bool) -> Result<Utf16IterState, InvalidAt> {
    let masks = classify(w_in);
    general_after_classify(w_in, &masks, c)
}

fn general_after_classify(
    w_in: &WordVec,
    masks: &Utf16ClassMasks,
    c: bool,
) -> Result<Utf16IterState, InvalidAt> {
    let c_out = validate_sequencing(masks.m_hi, masks.m_lo, c)?;
    let w_joined = join_surrogates(w_in, masks.m_hi);
    let encoding = encode(&w_joined, w_in, masks);
    Ok(Utf16IterState {
        w_in: *w_in,
        masks: *masks,
        w_joined,
        encoding,
        c,
        c_out,
    })
}

/// Code path an iteration took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Path {
    Ascii,
    OneTwoByte,
    NoSurrogates,
    Surrogates,
}

/// Outcome of one successful iteration over `n/2 - 1` words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub path: Path,
    pub emitted: Emitted,
    pub c_out: bool,
}

/// Per-iteration record handed to [`Utf16ToUtf8::run_traced`] observers.
#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub pos: usize,
    pub final_iteration: bool,
    pub c: bool,
    pub result: &'a Result<Step, InvalidAt>,
}

/// The emulated UTF-16 to UTF-8 engine at a fixed lane count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf16ToUtf8 {
    lanes: LaneCount,
    fast_paths: bool,
}

impl Default for Utf16ToUtf8 {
    fn default() -> Self {
        Self::new(LaneCount::default())
    }
}

impl Utf16ToUtf8 {
    pub fn new(lanes: LaneCount) -> Self {
        Self {
            lanes,
            fast_paths: true,
        }
    }

    /// Disabling fast paths sends every iteration through surrogate
    /// joining and validation.
    pub fn with_fast_paths(self, enabled: bool) -> Self {
        Self {
            fast_paths: enabled,
            ..self
        }
    }

    pub fn lanes(&self) -> LaneCount {
        self.lanes
    }

    /// One iteration over `w_in` with incoming surrogate carry `c`.
    pub fn step(&self, w_in: &WordVec, c: bool) -> Result<Step, InvalidAt> {
        let masks = classify(w_in);
        if self.fast_paths {
            if masks.m_234.is_zero() {
                return Ok(Step {
                    path: Path::Ascii,
                    emitted: fast_path_ascii(w_in),
                    c_out: false,
                });
            }
            if (masks.m_12 | masks.l).is_ones() {
                return Ok(Step {
                    path: Path::OneTwoByte,
                    emitted: fast_path_12(w_in, &masks),
                    c_out: false,
                });
            }
            if (masks.m_hi | masks.m_lo).is_zero() {
                let encoding = encode(&w_in.widen(), w_in, &masks);
                return Ok(Step {
                    path: Path::NoSurrogates,
                    emitted: encoding.emitted,
                    c_out: false,
                });
            }
        }
        let state = general_after_classify(w_in, &masks, c)?;
        Ok(Step {
            path: Path::Surrogates,
            emitted: state.encoding.emitted,
            c_out: state.c_out,
        })
    }

    /// Transcodes `input` into `output`.
    ///
    /// Output capacity is checked per iteration; `3 * input.len()` bytes
    /// always suffice.
    pub fn run(&self, input: &[u16], output: &mut [u8]) -> TranscodeOutcome {
        self.run_traced(input, Some(output), |_| {})
    }

    /// Validates `input` without producing output.
    pub fn validate(&self, input: &[u16]) -> TranscodeOutcome {
        let o = self.run_traced(input, None, |_| {});
        TranscodeOutcome { written: 0, ..o }
    }

    /// [`run`](Self::run) with a callback observing every iteration.
    pub fn run_traced(
        &self,
        input: &[u16],
        mut output: Option<&mut [u8]>,
        mut observe: impl FnMut(Trace<'_>),
    ) -> TranscodeOutcome {
        let n = self.lanes;
        let half = n.words();
        let width = n.bytes() as u32;
        let mut pos = 0;
        let mut written = 0;
        let mut end = input.len();
        let mut failed = false;
        let mut c = false;
        while pos < end {
            let remaining = end - pos;
            let final_iteration = failed || remaining < half;
            let load = if final_iteration {
                LaneMask::prefix(remaining as u32, half as u32)
            } else {
                LaneMask::ones(half as u32)
            };
            let w_in = masked_load_words(n, &input[pos..end], load);
            let result = self.step(&w_in, c);
            observe(Trace {
                pos,
                final_iteration,
                c,
                result: &result,
            });
            match result {
                Err(InvalidAt(l)) => {
                    debug_assert!(l < remaining);
                    end = pos + l;
                    failed = true;
                }
                Ok(step) => {
                    let advance = remaining.min(half - 1);
                    // zero padding encodes to one NUL byte per padded lane
                    let n_out = step.emitted.len() - (half - 1 - advance);
                    if let Some(out) = output.as_deref_mut() {
                        let dst = &mut out[written..];
                        let [(v0, k0), (v1, _)] = step.emitted.chunks;
                        let first = n_out.min(k0);
                        let stored = masked_store(dst, LaneMask::prefix(first as u32, width), &v0)
                            .and_then(|()| {
                                let rest = LaneMask::prefix((n_out - first) as u32, width);
                                masked_store(&mut dst[first..], rest, &v1)
                            });
                        if stored.is_err() {
                            // a carried low surrogate was written with its high half
                            return TranscodeOutcome::output_too_small(pos + c as usize, written);
                        }
                    }
                    pos += advance;
                    written += n_out;
                    c = step.c_out;
                }
            }
        }
        if end < input.len() {
            TranscodeOutcome::malformed(end, written)
        } else {
            TranscodeOutcome::ok(pos, written)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar;

    const N8: LaneCount = LaneCount::N8;

    fn words8(w: [u16; 4]) -> WordVec {
        WordVec::from_slice(N8, &w)
    }

    #[test]
    fn classify_examples() {
        let m = classify(&words8([0x41, 0x42, 0xD835, 0xDCAA]));
        assert!(m.m_234.test(2));
        assert_eq!(m.m_hi.to_element_order(), "0010");
        assert_eq!(m.m_lo.to_element_order(), "0001");
        assert_eq!(m.l.to_element_order(), "0001");
        let la = classify(&words8([0x41, 0x42, 0x43, 0xD835]));
        assert!(
            la.m_hi.is_zero(),
            "lookahead high surrogate is not classified"
        );
        assert!(classify(&words8([1, 2, 3, 0x7F])).m_234.is_zero());
    }

    #[test]
    fn join_examples() {
        let joined = join_surrogates(
            &words8([0xD835, 0xDCAA, 0xD800, 0xDC00]),
            LaneMask::new(0b0101, 4),
        );
        assert_eq!(joined.get(0), 0x1D4AA);
        assert_eq!(joined.get(2), 0x10000);
        let plain = words8([0x41, 0x2208, 0x7FF, 0]);
        assert_eq!(join_surrogates(&plain, LaneMask::zero(4)), plain.widen());
    }

    fn encode_one(words: [u16; 4]) -> Vec<u8> {
        let w = words8(words);
        let st = general_iteration(&w, false).unwrap();
        st.encoding.emitted.to_vec()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_one([0x2208, 0, 0, 0]), [0xE2, 0x88, 0x88, 0, 0]);
        assert_eq!(
            encode_one([0xD835, 0xDCAA, 0x41, 0]),
            [0xF0, 0x9D, 0x92, 0xAA, 0x41]
        );
        assert_eq!(
            encode_one([0x0800, 0x7FF, 0x80, 0]),
            [0xE0, 0xA0, 0x80, 0xDF, 0xBF, 0xC2, 0x80]
        );
    }

    #[test]
    fn two_byte_path_examples() {
        let w = words8([0x00B1, 0x07FF, 0x41, 0x00FF]);
        let e = fast_path_12(&w, &classify(&w));
        assert_eq!(e.to_vec(), [0xC2, 0xB1, 0xDF, 0xBF, 0x41]);
    }

    #[test]
    fn lookahead_ending_in_ff_is_dropped() {
        // U+00FF in the lookahead has low byte 0xFF on both paths
        let n = LaneCount::N16;
        let mut words = [0x41u16; 8];
        words[0] = 0x00E9;
        words[7] = 0x00FF;
        let e = Utf16ToUtf8::new(n)
            .step(&WordVec::from_slice(n, &words), false)
            .unwrap();
        assert_eq!(e.path, Path::OneTwoByte);
        assert_eq!(
            e.emitted.to_vec(),
            [0xC3, 0xA9, 0x41, 0x41, 0x41, 0x41, 0x41, 0x41]
        );
        words[0] = 0x2208;
        words[7] = 0xDCFF;
        let e = Utf16ToUtf8::new(n).step(&WordVec::from_slice(n, &words), false);
        assert_eq!(e.unwrap_err(), InvalidAt(7));
        words[6] = 0xD800;
        let e = Utf16ToUtf8::new(n)
            .step(&WordVec::from_slice(n, &words), false)
            .unwrap();
        assert_eq!(
            e.emitted.to_vec(),
            [0xE2, 0x88, 0x88, 0x41, 0x41, 0x41, 0x41, 0x41, 0xF0, 0x90, 0x83, 0xBF]
        );
        assert!(e.c_out);
    }

    #[test]
    fn sequencing_examples() {
        let ok = classify(&words8([0xD835, 0xDCAA, 0x41, 0x41]));
        assert_eq!(validate_sequencing(ok.m_hi, ok.m_lo, false), Ok(false));
        let carried = classify(&words8([0xDC00, 0x41, 0x41, 0x41]));
        assert_eq!(
            validate_sequencing(carried.m_hi, carried.m_lo, true),
            Ok(false)
        );
        assert_eq!(
            validate_sequencing(carried.m_hi, carried.m_lo, false),
            Err(InvalidAt(0))
        );
        let lone = classify(&words8([0x41, 0xD801, 0x42, 0x43]));
        assert_eq!(
            validate_sequencing(lone.m_hi, lone.m_lo, false),
            Err(InvalidAt(1))
        );
        let carry_out = classify(&words8([0x41, 0x41, 0xD801, 0xDC01]));
        assert_eq!(
            validate_sequencing(carry_out.m_hi, carry_out.m_lo, false),
            Ok(true)
        );
    }

    #[test]
    fn runs_worked_example_at_every_width() {
        let words = [0x0040, 0x00A7, 0x2208, 0xD835, 0xDCAA];
        let expect = [0x40, 0xC2, 0xA7, 0xE2, 0x88, 0x88, 0xF0, 0x9D, 0x92, 0xAA];
        for n in LaneCount::ALL {
            let mut out = [0u8; 15];
            let o = Utf16ToUtf8::new(n).run(&words, &mut out);
            assert_eq!(o, TranscodeOutcome::ok(5, 10), "n={n}");
            assert_eq!(&out[..10], &expect);
        }
    }

    #[test]
    fn run_empty() {
        assert_eq!(
            Utf16ToUtf8::default().run(&[], &mut []),
            TranscodeOutcome::ok(0, 0)
        );
    }

    #[test]
    fn dangling_high_surrogate_at_end() {
        for n in LaneCount::ALL {
            for len in 1..40 {
                let mut words = vec![0x263A; len];
                words[len - 1] = 0xD83D;
                let o = Utf16ToUtf8::new(n).validate(&words);
                assert_eq!(
                    o,
                    TranscodeOutcome::malformed(len - 1, 0),
                    "n={n} len={len}"
                );
            }
        }
    }

    #[test]
    fn matches_scalar_on_mixed_text() {
        let text: Vec<u16> = "Grüße, 世界! 🎉 ok ∑ \u{10FFFF}"
            .repeat(9)
            .encode_utf16()
            .collect();
        let (expect, bytes) = scalar::transcode_utf16le_to_utf8(&text);
        for n in LaneCount::ALL {
            for fast in [true, false] {
                let mut out = vec![0u8; text.len() * 3];
                let o = Utf16ToUtf8::new(n)
                    .with_fast_paths(fast)
                    .run(&text, &mut out);
                assert_eq!(o, expect);
                assert_eq!(&out[..o.written], &bytes[..]);
            }
        }
    }
}
