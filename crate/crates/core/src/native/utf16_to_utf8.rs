use std::arch::x86_64::*;

use super::prefix64;
use crate::TranscodeOutcome;

const L: u32 = 1 << 31;

/// Bytes of one iteration in up to two compressed chunks.
struct Step {
    chunks: [(__m512i, usize); 2],
    c_out: bool,
}

#[inline]
#[target_feature(enable = "avx512f,avx512bw")]
fn splat16(x: u16) -> __m512i {
    _mm512_set1_epi16(x as i16)
}

#[inline]
#[target_feature(enable = "avx512f,avx512bw")]
fn splat32(x: u32) -> __m512i {
    _mm512_set1_epi32(x as i32)
}

/// Encodes one 16-lane half of widened (and possibly joined) code points.
#[target_feature(enable = "avx512f,avx512bw,avx512dq,avx512vbmi,avx512vbmi2,bmi2")]
fn encode_half(
    joined: __m512i,
    wide: __m512i,
    m_234: u16,
    m_hi: u16,
    keep_all: u16,
) -> (__m512i, u64) {
    let control = _mm512_set1_epi64(0x2026_2C32_0006_0C12);
    let shifted = _mm512_multishift_epi64_epi8(control, joined);
    let two_byte = _mm512_cmplt_epu32_mask(joined, splat32(0x800));
    let tag = _mm512_mask_blend_epi32(
        m_hi,
        _mm512_mask_blend_epi32(two_byte, splat32(0x8080_E000), splat32(0x80C0_0000)),
        splat32(0x8080_80F0),
    );
    let encoded = _mm512_or_si512(_mm512_and_si512(shifted, splat32(0x3F3F_3F3F)), tag);
    let w_out = _mm512_mask_blend_epi32(m_234, _mm512_slli_epi32::<24>(wide), encoded);
    let w_keep = _mm512_mask_blend_epi32(keep_all, splat32(0x0001_0101), splat32(0xFFFF_FFFF));
    (w_out, _mm512_cmpge_epu8_mask(w_out, w_keep))
}

#[target_feature(enable = "avx512f,avx512bw,avx512dq,avx512vbmi,avx512vbmi2,bmi2")]
fn step(w: __m512i, c: bool) -> Result<Step, usize> {
    let tagged = _mm512_and_si512(w, splat16(0xFC00));
    let m_234 = _mm512_cmpge_epu16_mask(w, splat16(0x80)) & !L;
    let m_12 = _mm512_cmplt_epu16_mask(w, splat16(0x800));
    let m_hi = _mm512_cmpeq_epi16_mask(tagged, splat16(0xD800)) & !L;
    let m_lo = _mm512_cmpeq_epi16_mask(tagged, splat16(0xDC00));

    if m_234 == 0 {
        let bytes = _mm512_castsi256_si512(_mm512_cvtepi16_epi8(w));
        return Ok(Step {
            chunks: [(bytes, 31), (bytes, 0)],
            c_out: false,
        });
    }
    if m_12 | L == u32::MAX {
        let shuffled = _mm512_or_si512(_mm512_slli_epi16::<8>(w), _mm512_srli_epi16::<6>(w));
        let two = _mm512_or_si512(_mm512_and_si512(shuffled, splat16(0x3F3F)), splat16(0x80C0));
        let w_out = _mm512_mask_blend_epi16(m_234, w, two);
        let threshold = _mm512_mask_blend_epi16(L, splat16(0x0800), splat16(0xFFFF));
        let m_keep = _mm512_cmpge_epu8_mask(w_out, threshold) & !(0b11 << 62);
        let len = m_keep.count_ones() as usize;
        debug_assert_eq!(len, m_234.count_ones() as usize + 31);
        let bytes = _mm512_maskz_compress_epi8(m_keep, w_out);
        return Ok(Step {
            chunks: [(bytes, len), (bytes, 0)],
            c_out: false,
        });
    }

    let mut c_out = false;
    let surrogates = m_hi | m_lo != 0;
    if surrogates {
        let expected_lo = (m_hi << 1) | c as u32;
        if expected_lo != m_lo {
            let bad = (m_hi & !(m_lo >> 1)) | (m_lo & !expected_lo);
            return Err(bad.trailing_zeros() as usize);
        }
        c_out = m_hi >> 30 & 1 == 1;
    }

    let wide_lo = _mm512_cvtepu16_epi32(_mm512_castsi512_si256(w));
    let wide_hi = _mm512_cvtepu16_epi32(_mm512_extracti64x4_epi64::<1>(w));
    let (joined_lo, joined_hi) = if surrogates {
        let next_lo = _mm512_alignr_epi32::<1>(wide_hi, wide_lo);
        let next_hi = _mm512_alignr_epi32::<1>(wide_lo, wide_hi);
        let bias = splat32(0xFCA0_2400);
        let j_lo = _mm512_add_epi32(
            _mm512_add_epi32(_mm512_slli_epi32::<10>(wide_lo), next_lo),
            bias,
        );
        let j_hi = _mm512_add_epi32(
            _mm512_add_epi32(_mm512_slli_epi32::<10>(wide_hi), next_hi),
            bias,
        );
        (
            _mm512_mask_blend_epi32(m_hi as u16, wide_lo, j_lo),
            _mm512_mask_blend_epi32((m_hi >> 16) as u16, wide_hi, j_hi),
        )
    } else {
        (wide_lo, wide_hi)
    };

    let keep_all = m_lo | L;
    let (out0, k0) = encode_half(
        joined_lo,
        wide_lo,
        m_234 as u16,
        m_hi as u16,
        keep_all as u16,
    );
    let (out1, k1) = encode_half(
        joined_hi,
        wide_hi,
        (m_234 >> 16) as u16,
        (m_hi >> 16) as u16,
        (keep_all >> 16) as u16,
    );
    let k1 = k1 & !(0xF << 60);
    Ok(Step {
        chunks: [
            (
                _mm512_maskz_compress_epi8(k0, out0),
                k0.count_ones() as usize,
            ),
            (
                _mm512_maskz_compress_epi8(k1, out1),
                k1.count_ones() as usize,
            ),
        ],
        c_out,
    })
}

/// # Safety
/// The CPU must support the features named in `step`.
#[target_feature(enable = "avx512f,avx512bw,avx512dq,avx512vbmi,avx512vbmi2,bmi2")]
pub(super) unsafe fn run(input: &[u16], mut output: Option<&mut [u8]>) -> TranscodeOutcome {
    const HALF: usize = 32;
    let mut pos = 0;
    let mut written = 0;
    let mut end = input.len();
    let mut failed = false;
    let mut c = false;
    while pos < end {
        let remaining = end - pos;
        let final_iteration = failed || remaining < HALF;
        let load = if final_iteration {
            prefix64(remaining) as u32
        } else {
            u32::MAX
        };
        // SAFETY: lanes outside `load` are not read; lanes inside lie in input[pos..end].
        let w = unsafe { _mm512_maskz_loadu_epi16(load, input.as_ptr().add(pos).cast()) };
        match step(w, c) {
            Err(l) => {
                debug_assert!(l < remaining);
                end = pos + l;
                failed = true;
            }
            Ok(s) => {
                let advance = remaining.min(HALF - 1);
                let len = s.chunks[0].1 + s.chunks[1].1;
                let n_out = len - (HALF - 1 - advance);
                if let Some(out) = output.as_deref_mut() {
                    if out.len() - written < n_out {
                        // a carried low surrogate was written with its high half
                        return TranscodeOutcome::output_too_small(pos + c as usize, written);
                    }
                    let first = n_out.min(s.chunks[0].1);
                    // SAFETY: first + (n_out - first) = n_out bytes fit in out[written..].
                    unsafe {
                        let dst = out.as_mut_ptr().add(written);
                        _mm512_mask_storeu_epi8(dst.cast(), prefix64(first), s.chunks[0].0);
                        _mm512_mask_storeu_epi8(
                            dst.add(first).cast(),
                            prefix64(n_out - first),
                            s.chunks[1].0,
                        );
                    }
                }
                pos += advance;
                written += n_out;
                c = s.c_out;
            }
        }
    }
    if end < input.len() {
        TranscodeOutcome::malformed(end, written)
    } else {
        TranscodeOutcome::ok(pos, written)
    }
}
