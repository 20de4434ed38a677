//! UTF-8 to UTF-16LE over the lane emulator.
//!
//! Each iteration loads `n` bytes, finds the last byte of every sequence
//! (`m_end`), gathers the last three bytes of each sequence with byte
//! permutes, and sums them into UTF-16 words. Four-byte sequences are
//! decoded as an overlapping 3-byte and 2-byte sequence and turned into a
//! surrogate pair afterwards. At most `n/2` words are produced per
//! iteration; the input advances by whole characters only, so anything not
//! consumed is simply reloaded by the next iteration.
//!
//! Validation happens inside the loop. When a check fails, the input is cut
//! at the reported offset and the remainder is reprocessed as a final,
//! zero-padded iteration, which converges on the first error.

use crate::outcome::{InvalidAt, TranscodeOutcome};
use crate::substrate::{masked_load, masked_store_words, ByteVec, LaneCount, LaneMask, WordVec};

/// Byte-class masks over one input vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf8ClassMasks {
    pub m1: LaneMask,
    pub m234: LaneMask,
    pub m34: LaneMask,
    pub m4: LaneMask,
    pub m3: LaneMask,
    pub m2: LaneMask,
    pub m1234: LaneMask,
    pub m_plus1: LaneMask,
    pub m_plus2: LaneMask,
    pub m_plus3: LaneMask,
    pub m_end: LaneMask,
    pub m_c: LaneMask,
}

pub fn classify(w_in: &ByteVec) -> Utf8ClassMasks {
    let m1 = w_in.lt_splat(0x80);
    let m234 = w_in.ge_splat(0xC0);
    let m34 = w_in.ge_splat(0xE0);
    let m4 = w_in.ge_splat(0xF0);
    let m1234 = m1 | m234;
    let m_plus3 = m4 << 3;
    let m_end = ((m_plus3 | m1234) >> 1) | m_plus3;
    let m_plus1 = m234 << 1;
    let m_plus2 = m34 << 2;
    Utf8ClassMasks {
        m1,
        m234,
        m34,
        m4,
        m3: m34 & !m4,
        m2: m234 & !m34,
        m1234,
        m_plus1,
        m_plus2,
        m_plus3,
        m_end,
        m_c: m_plus1 | m_plus2 | m_plus3,
    }
}

/// Rejects the lead bytes 0xC0 and 0xC1, which only occur in overlong
/// encodings of ASCII.
pub fn check_overlong_2byte(w_in: &ByteVec, m234: LaneMask) -> Result<(), InvalidAt> {
    let bad = m234 & w_in.lt_splat(0xC2);
    if bad.is_zero() {
        Ok(())
    } else {
        Err(InvalidAt(bad.ctz() as usize))
    }
}

/// Checks that continuation bytes sit exactly where `m_c` expects them.
pub fn check_continuations(m_c: LaneMask, m1234: LaneMask) -> Result<(), InvalidAt> {
    let expected = !m1234;
    if m_c == expected {
        return Ok(());
    }
    let x = (m_c ^ expected).ctz();
    if expected.test(x) {
        // a continuation byte nobody asked for
        Err(InvalidAt(x as usize))
    } else {
        // a lead byte where a continuation was due: blame the lead before it
        let m_pre = LaneMask::prefix(x, m1234.width());
        Err(InvalidAt((m1234 & m_pre).bit_width() as usize - 1))
    }
}

/// Intermediate vectors of the character assembly step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assembly {
    pub w_stripped: ByteVec,
    /// Index of the last byte of each sequence; only the first `n/2` lanes matter.
    pub p: ByteVec,
    pub w_end: WordVec,
    pub w_minus1: WordVec,
    pub w_minus2: WordVec,
    pub w_sum: WordVec,
}

pub fn assemble(w_in: &ByteVec, masks: &Utf8ClassMasks) -> Assembly {
    let n = w_in.lane_count();
    let w_stripped = ByteVec::select(masks.m1, w_in, &(*w_in & ByteVec::splat(n, 0x3F)));
    let p = ByteVec::identity(n).compress(masks.m_end);
    let w_end = w_stripped.permute(&p).widen();

    let m_minus1 = !masks.m1 >> 1;
    let m_minus2 = masks.m34 & (LaneMask::ones(n.bytes() as u32) >> 2);
    let p_minus1 = p - ByteVec::splat(n, 1);
    let p_minus2 = p - ByteVec::splat(n, 2);
    let w_minus1 = w_stripped.mask_zero(m_minus1).permute(&p_minus1).widen();
    let w_minus2 = w_stripped.mask_zero(m_minus2).permute(&p_minus2).widen();

    let w_sum = (w_minus2 << 12) | (w_minus1 << 6) | w_end;
    Assembly {
        w_stripped,
        p,
        w_end,
        w_minus1,
        w_minus2,
        w_sum,
    }
}

/// Output words after surrogate fixup, with the surrogate positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Surrogates {
    pub w_out: WordVec,
    pub m_lo: LaneMask,
    pub m_hi: LaneMask,
}

pub fn fixup_surrogates(w_sum: &WordVec, m_end: LaneMask, m_plus3: LaneMask) -> Surrogates {
    let n = w_sum.lane_count();
    let half = n.words() as u32;
    // Shift before truncating: a low surrogate in word n/2 still marks a
    // high surrogate in word n/2 - 1.
    let m_lo_wide = m_end.pext(m_plus3);
    let m_lo = m_lo_wide.resize(half);
    let m_hi = (m_lo_wide >> 1).resize(half);

    let hi = (*w_sum >> 4) + WordVec::splat(n, 0xD7C0);
    let lo = *w_sum | WordVec::splat(n, 0xDC00);
    let w_out = WordVec::select(m_hi, &hi, &WordVec::select(m_lo, &lo, w_sum));
    Surrogates { w_out, m_lo, m_hi }
}

/// Out-of-range checks on the assembled words. Returns `M_3` on success.
///
/// `check_4byte` is false on the BMP-only path, where no high surrogates
/// can be present.
pub fn validate_ranges(
    w_out: &WordVec,
    masks: &Utf8ClassMasks,
    m_hi: LaneMask,
    check_4byte: bool,
) -> Result<LaneMask, InvalidAt> {
    let n = w_out.lane_count();
    let half = n.words() as u32;
    let m_3 = masks.m_end.pext(masks.m3 << 2).resize(half);
    let biased = *w_out - WordVec::splat(n, 0xD800);
    let below_800 = m_3 & w_out.lt_splat(0x800);
    let m_3s = m_3 & biased.lt_splat(0x800);
    let mut bad = below_800 | m_3s;
    if check_4byte {
        bad = bad | (m_hi & biased.ge_splat(0x400));
    }
    if bad.is_zero() {
        return Ok(m_3);
    }
    let starts = masks.m_plus3 | masks.m1234;
    Err(InvalidAt(
        starts.pdep(bad.resize(n.bytes() as u32)).ctz() as usize
    ))
}

/// Which words of the iteration are committed and how far both buffers move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commit {
    pub m_out: LaneMask,
    pub m_processed: LaneMask,
    pub n_in: usize,
    pub n_out: usize,
}

pub fn commit(m_end: LaneMask, m_hi: LaneMask, b: LaneMask) -> Commit {
    let half = m_hi.width();
    let m_out = !(m_hi & LaneMask::bit(half - 1, half));
    let m_processed = (b & m_end).pdep(m_out.resize(m_end.width()));
    assert!(!m_processed.is_zero(), "iteration made no progress");
    Commit {
        m_out,
        m_processed,
        n_in: m_processed.bit_width() as usize,
        n_out: m_processed.popcount() as usize,
    }
}

/// Every variable of one general-path iteration, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf8IterState {
    pub w_in: ByteVec,
    pub b: LaneMask,
    pub masks: Utf8ClassMasks,
    pub assembly: Assembly,
    pub w_out: WordVec,
    pub m_lo: LaneMask,
    pub m_hi: LaneMask,
    pub m_3: LaneMask,
    pub commit: Commit,
}

/// Runs the general path (or its BMP-only simplification) on one vector.
pub fn general_iteration(
    w_in: &ByteVec,
    b: LaneMask,
    bmp_only: bool,
) -> Result<Utf8IterState, InvalidAt> {
    let masks = classify(w_in);
    check_overlong_2byte(w_in, masks.m234)?;
    general_after_classify(w_in, b, &masks, bmp_only)
}

fn general_after_classify(
    w_in: &ByteVec,
    b: LaneMask,
    masks: &Utf8ClassMasks,
    bmp_only: bool,
) -> Result<Utf8IterState, InvalidAt> {
    debug_assert!(!bmp_only || masks.m4.is_zero());
    check_continuations(masks.m_c, masks.m1234)?;
    let assembly = assemble(w_in, masks);
    let half = w_in.lane_count().words() as u32;
    let (w_out, m_lo, m_hi) = if bmp_only {
        (assembly.w_sum, LaneMask::zero(half), LaneMask::zero(half))
    } else {
        let s = fixup_surrogates(&assembly.w_sum, masks.m_end, masks.m_plus3);
        (s.w_out, s.m_lo, s.m_hi)
    };
    let m_3 = validate_ranges(&w_out, masks, m_hi, !bmp_only)?;
    let commit = commit(masks.m_end, m_hi, b);
    Ok(Utf8IterState {
        w_in: *w_in,
        b,
        masks: *masks,
        assembly,
        w_out,
        m_lo,
        m_hi,
        m_3,
        commit,
    })
}

/// Widens the first `n/2` bytes when they are all ASCII.
pub fn fast_path_ascii(w_in: &ByteVec, m1: LaneMask) -> Option<Step> {
    let half = w_in.lane_count().words();
    let low = LaneMask::prefix(half as u32, m1.width());
    if m1 & low != low {
        return None;
    }
    Some(Step {
        path: Path::Ascii,
        w_out: w_in.widen(),
        n_in: half,
        n_out: half,
    })
}

/// Path for vectors holding only 1- and 2-byte sequences (`m34 = 0`).
/// Consumes the first `n/2` bytes, plus one if a 2-byte sequence straddles
/// the middle.
pub fn fast_path_12(w_in: &ByteVec, masks: &Utf8ClassMasks) -> Result<Step, InvalidAt> {
    debug_assert!(masks.m34.is_zero());
    let n = w_in.lane_count();
    let half = n.words();
    let m2 = masks.m234;
    let m_end = !m2;
    check_continuations(m2 << 1, masks.m1234)?;

    let w_c2 = ByteVec::select(
        masks.m1,
        &ByteVec::zero(n),
        &(*w_in - ByteVec::splat(n, 0xC2)),
    );
    let w_end = w_in.compress(m_end).widen();
    let w_minus1 = w_c2.compress(masks.m1234).widen();
    let w_out = (w_minus1 << 6) + w_end;

    let straddles = (0x80..0xC0).contains(&w_in.get(half));
    let n_in = half + straddles as usize;
    let n_out = (masks.m1234 & LaneMask::prefix(half as u32, n.bytes() as u32)).popcount() as usize;
    Ok(Step {
        path: Path::OneTwoByte,
        w_out,
        n_in,
        n_out,
    })
}

/// Code path an iteration took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Path {
    Ascii,
    OneTwoByte,
    Bmp,
    General,
}

/// Outcome of one successful iteration: the first `n_out` words of `w_out`
/// are committed and the input advances by `n_in` bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub path: Path,
    pub w_out: WordVec,
    pub n_in: usize,
    pub n_out: usize,
}

/// Per-iteration record handed to [`Utf8ToUtf16::run_traced`] observers.
#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub pos: usize,
    pub final_iteration: bool,
    pub b: LaneMask,
    pub result: &'a Result<Step, InvalidAt>,
}

/// The emulated UTF-8 to UTF-16 engine at a fixed lane count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utf8ToUtf16 {
    lanes: LaneCount,
    fast_paths: bool,
}

impl Default for Utf8ToUtf16 {
    fn default() -> Self {
        Self::new(LaneCount::default())
    }
}

impl Utf8ToUtf16 {
    pub fn new(lanes: LaneCount) -> Self {
        Self {
            lanes,
            fast_paths: true,
        }
    }

    /// Disabling fast paths forces every iteration through the general path.
    pub fn with_fast_paths(self, enabled: bool) -> Self {
        Self {
            fast_paths: enabled,
            ..self
        }
    }

    pub fn lanes(&self) -> LaneCount {
        self.lanes
    }

    /// One iteration over `w_in`, of which the bytes in `b` are real input.
    pub fn step(
        &self,
        w_in: &ByteVec,
        b: LaneMask,
        final_iteration: bool,
    ) -> Result<Step, InvalidAt> {
        let fast = self.fast_paths && !final_iteration;
        let m1 = w_in.lt_splat(0x80);
        if fast {
            if let Some(step) = fast_path_ascii(w_in, m1) {
                return Ok(step);
            }
        }
        let masks = classify(w_in);
        check_overlong_2byte(w_in, masks.m234)?;
        if fast && masks.m34.is_zero() {
            return fast_path_12(w_in, &masks);
        }
        let bmp_only = self.fast_paths && masks.m4.is_zero();
        let state = general_after_classify(w_in, b, &masks, bmp_only)?;
        Ok(Step {
            path: if bmp_only { Path::Bmp } else { Path::General },
            w_out: state.w_out,
            n_in: state.commit.n_in,
            n_out: state.commit.n_out,
        })
    }

    /// Transcodes `input` into `output`.
    ///
    /// Output capacity is checked per iteration; an output buffer of
    /// `input.len()` words always suffices.
    pub fn run(&self, input: &[u8], output: &mut [u16]) -> TranscodeOutcome {
        self.run_traced(input, Some(output), |_| {})
    }

    /// Validates `input` without producing output.
    pub fn validate(&self, input: &[u8]) -> TranscodeOutcome {
        let o = self.run_traced(input, None, |_| {});
        TranscodeOutcome { written: 0, ..o }
    }

    /// [`run`](Self::run) with a callback observing every iteration.
    pub fn run_traced(
        &self,
        input: &[u8],
        mut output: Option<&mut [u16]>,
        mut observe: impl FnMut(Trace<'_>),
    ) -> TranscodeOutcome {
        let n = self.lanes;
        let width = n.bytes() as u32;
        let half = n.words() as u32;
        let mut pos = 0;
        let mut written = 0;
        let mut end = input.len();
        let mut failed = false;
        while pos < end {
            let remaining = end - pos;
            let final_iteration = failed || remaining < n.bytes();
            let b = if final_iteration {
                LaneMask::prefix(remaining as u32, width)
            } else {
                LaneMask::ones(width)
            };
            let w_in = masked_load(n, &input[pos..end], b);
            let result = self.step(&w_in, b, final_iteration);
            observe(Trace {
                pos,
                final_iteration,
                b,
                result: &result,
            });
            match result {
                Err(InvalidAt(l)) => {
                    debug_assert!(l < remaining);
                    end = pos + l;
                    failed = true;
                }
                Ok(step) => {
                    if let Some(out) = output.as_deref_mut() {
                        let m = LaneMask::prefix(step.n_out as u32, half);
                        if masked_store_words(&mut out[written..], m, &step.w_out).is_err() {
                            return TranscodeOutcome::output_too_small(pos, written);
                        }
                    }
                    pos += step.n_in;
                    written += step.n_out;
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
