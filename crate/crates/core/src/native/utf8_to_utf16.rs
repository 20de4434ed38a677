use std::arch::x86_64::*;

use super::{prefix32, prefix64};
use crate::TranscodeOutcome;

struct Step {
    w_out: __m512i,
    n_in: usize,
    n_out: usize,
}

#[inline]
#[target_feature(enable = "avx512f,avx512bw")]
fn splat(x: u8) -> __m512i {
    _mm512_set1_epi8(x as i8)
}

#[inline(always)]
fn continuation_error(m_c: u64, m1234: u64) -> Option<usize> {
    let expected = !m1234;
    if m_c == expected {
        return None;
    }
    let x = (m_c ^ expected).trailing_zeros();
    if expected >> x & 1 == 1 {
        Some(x as usize)
    } else {
        let leads = m1234 & prefix64(x as usize);
        Some(63 - leads.leading_zeros() as usize)
    }
}

#[inline]
#[target_feature(enable = "avx512f,avx512bw")]
fn widen_low_half(v: __m512i) -> __m512i {
    _mm512_cvtepu8_epi16(_mm512_castsi512_si256(v))
}

#[target_feature(enable = "avx512f,avx512bw,avx512dq,avx512vbmi,avx512vbmi2,bmi2")]
fn step(w: __m512i, b: u64, final_iteration: bool) -> Result<Step, usize> {
    let m1 = _mm512_cmplt_epu8_mask(w, splat(0x80));
    if !final_iteration && m1 as u32 == u32::MAX {
        return Ok(Step {
            w_out: widen_low_half(w),
            n_in: 32,
            n_out: 32,
        });
    }
    let m234 = _mm512_cmpge_epu8_mask(w, splat(0xC0));
    let m34 = _mm512_cmpge_epu8_mask(w, splat(0xE0));
    let m4 = _mm512_cmpge_epu8_mask(w, splat(0xF0));
    let m1234 = m1 | m234;

    let overlong = m234 & _mm512_cmplt_epu8_mask(w, splat(0xC2));
    if overlong != 0 {
        return Err(overlong.trailing_zeros() as usize);
    }

    if !final_iteration && m34 == 0 {
        if let Some(l) = continuation_error(m234 << 1, m1234) {
            return Err(l);
        }
        let w_c2 = _mm512_maskz_sub_epi8(!m1, w, splat(0xC2));
        let w_end = widen_low_half(_mm512_maskz_compress_epi8(!m234, w));
        let w_minus1 = widen_low_half(_mm512_maskz_compress_epi8(m1234, w_c2));
        let w_out = _mm512_add_epi16(_mm512_slli_epi16::<6>(w_minus1), w_end);
        let straddles = (m234 | m1) >> 32 & 1 == 0;
        let n_out = (m1234 as u32).count_ones() as usize;
        return Ok(Step {
            w_out,
            n_in: 32 + straddles as usize,
            n_out,
        });
    }

    let bmp_only = m4 == 0;
    let m_plus3 = m4 << 3;
    let m_end = ((m_plus3 | m1234) >> 1) | m_plus3;
    let m_c = (m234 << 1) | (m34 << 2) | m_plus3;
    if let Some(l) = continuation_error(m_c, m1234) {
        return Err(l);
    }

    let identity = _mm512_set_epi8(
        63, 62, 61, 60, 59, 58, 57, 56, 55, 54, 53, 52, 51, 50, 49, 48, 47, 46, 45, 44, 43, 42, 41,
        40, 39, 38, 37, 36, 35, 34, 33, 32, 31, 30, 29, 28, 27, 26, 25, 24, 23, 22, 21, 20, 19, 18,
        17, 16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0,
    );
    let w_stripped = _mm512_mask_blend_epi8(m1, _mm512_and_si512(w, splat(0x3F)), w);
    let p = _mm512_maskz_compress_epi8(m_end, identity);
    let w_end = widen_low_half(_mm512_permutexvar_epi8(p, w_stripped));
    let m_minus1 = !m1 >> 1;
    let m_minus2 = m34 & (u64::MAX >> 2);
    let p1 = _mm512_sub_epi8(p, splat(1));
    let p2 = _mm512_sub_epi8(p, splat(2));
    let w_minus1 = widen_low_half(_mm512_permutexvar_epi8(
        p1,
        _mm512_maskz_mov_epi8(m_minus1, w_stripped),
    ));
    let w_minus2 = widen_low_half(_mm512_permutexvar_epi8(
        p2,
        _mm512_maskz_mov_epi8(m_minus2, w_stripped),
    ));
    let w_sum = _mm512_or_si512(
        _mm512_or_si512(
            _mm512_slli_epi16::<12>(w_minus2),
            _mm512_slli_epi16::<6>(w_minus1),
        ),
        w_end,
    );

    let (w_out, m_hi) = if bmp_only {
        (w_sum, 0u32)
    } else {
        let m_lo_wide = _pext_u64(m_plus3, m_end);
        let m_lo = m_lo_wide as u32;
        let m_hi = (m_lo_wide >> 1) as u32;
        let hi = _mm512_add_epi16(
            _mm512_srli_epi16::<4>(w_sum),
            _mm512_set1_epi16(0xD7C0u16 as i16),
        );
        let lo = _mm512_or_si512(w_sum, _mm512_set1_epi16(0xDC00u16 as i16));
        let w_out = _mm512_mask_blend_epi16(m_hi, _mm512_mask_blend_epi16(m_lo, w_sum, lo), hi);
        (w_out, m_hi)
    };

    let m3 = m34 & !m4;
    let m_3 = _pext_u64(m3 << 2, m_end) as u32;
    let biased = _mm512_sub_epi16(w_out, _mm512_set1_epi16(0xD800u16 as i16));
    let below_800 = m_3 & _mm512_cmplt_epu16_mask(w_out, _mm512_set1_epi16(0x800));
    let m_3s = m_3 & _mm512_cmplt_epu16_mask(biased, _mm512_set1_epi16(0x800));
    let mut bad = below_800 | m_3s;
    if !bmp_only {
        bad |= m_hi & _mm512_cmpge_epu16_mask(biased, _mm512_set1_epi16(0x400));
    }
    if bad != 0 {
        return Err(_pdep_u64(bad as u64, m_plus3 | m1234).trailing_zeros() as usize);
    }

    let m_out = !(m_hi & (1 << 31));
    let m_processed = _pdep_u64(m_out as u64, b & m_end);
    assert!(m_processed != 0, "iteration made no progress");
    Ok(Step {
        w_out,
        n_in: 64 - m_processed.leading_zeros() as usize,
        n_out: m_processed.count_ones() as usize,
    })
}

/// # Safety
/// The CPU must support the features named in `step`.
#[target_feature(enable = "avx512f,avx512bw,avx512dq,avx512vbmi,avx512vbmi2,bmi2")]
pub(super) unsafe fn run(input: &[u8], mut output: Option<&mut [u16]>) -> TranscodeOutcome {
    let mut pos = 0;
    let mut written = 0;
    let mut end = input.len();
    let mut failed = false;
    while pos < end {
        let remaining = end - pos;
        let final_iteration = failed || remaining < 64;
        let b = if final_iteration {
            prefix64(remaining)
        } else {
            u64::MAX
        };
        // SAFETY: lanes outside `b` are not read; lanes inside lie in input[pos..end].
        let w = unsafe { _mm512_maskz_loadu_epi8(b, input.as_ptr().add(pos).cast()) };
        match step(w, b, final_iteration) {
            Err(l) => {
                debug_assert!(l < remaining);
                end = pos + l;
                failed = true;
            }
            Ok(s) => {
                if let Some(out) = output.as_deref_mut() {
                    if out.len() - written < s.n_out {
                        return TranscodeOutcome::output_too_small(pos, written);
                    }
                    // SAFETY: the n_out stored words fit in out[written..].
                    unsafe {
                        _mm512_mask_storeu_epi16(
                            out.as_mut_ptr().add(written).cast(),
                            prefix32(s.n_out),
                            s.w_out,
                        )
                    };
                }
                pos += s.n_in;
                written += s.n_out;
            }
        }
    }
    if end < input.len() {
        TranscodeOutcome::malformed(end, written)
    } else {
        TranscodeOutcome::ok(pos, written)
    }
}
