use std::fmt;
use std::ops::{Add, BitAnd, BitOr, BitXor, Not, Shl, Shr, Sub};

use thiserror::Error;

use super::mask::LaneMask;

/// Vector width in bytes, the `n` every formula in the transcoders is
/// parameterized by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneCount(u8);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported lane count {0}; expected one of 8, 16, 32, 64")]
pub struct LaneCountError(pub usize);

impl LaneCount {
    pub const N8: LaneCount = LaneCount(8);
    pub const N16: LaneCount = LaneCount(16);
    pub const N32: LaneCount = LaneCount(32);
    pub const N64: LaneCount = LaneCount(64);
    pub const ALL: [LaneCount; 4] = [Self::N8, Self::N16, Self::N32, Self::N64];

    pub fn new(n: usize) -> Result<Self, LaneCountError> {
        match n {
            8 | 16 | 32 | 64 => Ok(LaneCount(n as u8)),
            _ => Err(LaneCountError(n)),
        }
    }

    /// Byte lanes per vector (`n`).
    #[inline]
    pub const fn bytes(self) -> usize {
        self.0 as usize
    }

    /// 16-bit (or zero-extended 32-bit) lanes per vector (`n/2`).
    #[inline]
    pub const fn words(self) -> usize {
        self.0 as usize / 2
    }
}

impl Default for LaneCount {
    fn default() -> Self {
        LaneCount::N64
    }
}

impl fmt::Display for LaneCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! lane_vector {
    ($(#[$doc:meta])* $name:ident, $elem:ty, $cap:expr, $lanes_of:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq)]
        pub struct $name {
            lanes: [$elem; $cap],
            n: LaneCount,
        }

        impl $name {
            #[inline]
            pub fn zero(n: LaneCount) -> Self {
                Self { lanes: [0; $cap], n }
            }

            #[inline]
            pub fn splat(n: LaneCount, x: $elem) -> Self {
                let mut v = Self::zero(n);
                v.lanes[..n.$lanes_of()].fill(x);
                v
            }

            /// Builds a vector from exactly one value per lane.
            pub fn from_slice(n: LaneCount, values: &[$elem]) -> Self {
                assert_eq!(values.len(), n.$lanes_of(), "wrong number of lanes");
                let mut v = Self::zero(n);
                v.lanes[..values.len()].copy_from_slice(values);
                v
            }

            #[inline]
            pub fn from_fn(n: LaneCount, mut f: impl FnMut(usize) -> $elem) -> Self {
                let mut v = Self::zero(n);
                for i in 0..n.$lanes_of() {
                    v.lanes[i] = f(i);
                }
                v
            }

            #[inline]
            pub fn lane_count(&self) -> LaneCount {
                self.n
            }

            /// Number of elements (`n` for bytes, `n/2` otherwise).
            #[inline]
            pub fn len(&self) -> usize {
                self.n.$lanes_of()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                false
            }

            #[inline]
            pub fn as_slice(&self) -> &[$elem] {
                &self.lanes[..self.len()]
            }

            #[inline]
            pub fn get(&self, i: usize) -> $elem {
                self.as_slice()[i]
            }

            #[inline]
            fn mask_width(&self) -> u32 {
                self.len() as u32
            }

            #[inline]
            fn zip(&self, rhs: &Self, f: impl Fn($elem, $elem) -> $elem) -> Self {
                debug_assert_eq!(self.n, rhs.n, "lane count mismatch");
                let mut out = Self::zero(self.n);
                for i in 0..self.len() {
                    out.lanes[i] = f(self.lanes[i], rhs.lanes[i]);
                }
                out
            }

            #[inline]
            fn compare(&self, rhs: &Self, f: impl Fn($elem, $elem) -> bool) -> LaneMask {
                debug_assert_eq!(self.n, rhs.n, "lane count mismatch");
                let mut bits = 0u64;
                for i in 0..self.len() {
                    bits |= (f(self.lanes[i], rhs.lanes[i]) as u64) << i;
                }
                LaneMask::new(bits, self.mask_width())
            }

            #[inline]
            pub fn map(&self, f: impl Fn($elem) -> $elem) -> Self {
                let mut out = Self::zero(self.n);
                for i in 0..self.len() {
                    out.lanes[i] = f(self.lanes[i]);
                }
                out
            }

            /// Lane-wise unsigned `self < rhs`.
            #[inline]
            pub fn lt(&self, rhs: &Self) -> LaneMask {
                self.compare(rhs, |a, b| a < b)
            }

            #[inline]
            pub fn le(&self, rhs: &Self) -> LaneMask {
                self.compare(rhs, |a, b| a <= b)
            }

            #[inline]
            pub fn ge(&self, rhs: &Self) -> LaneMask {
                self.compare(rhs, |a, b| a >= b)
            }

            #[inline]
            pub fn eq_lanes(&self, rhs: &Self) -> LaneMask {
                self.compare(rhs, |a, b| a == b)
            }

            #[inline]
            pub fn lt_splat(&self, x: $elem) -> LaneMask {
                self.lt(&Self::splat(self.n, x))
            }

            #[inline]
            pub fn ge_splat(&self, x: $elem) -> LaneMask {
                self.ge(&Self::splat(self.n, x))
            }

            #[inline]
            pub fn eq_splat(&self, x: $elem) -> LaneMask {
                self.eq_lanes(&Self::splat(self.n, x))
            }

            /// Ternary blend: lanes with `m` set come from `a`, the rest from `b`.
            #[inline]
            pub fn select(m: LaneMask, a: &Self, b: &Self) -> Self {
                debug_assert_eq!(m.width() as usize, a.len(), "mask/vector width mismatch");
                let mut out = Self::zero(a.n);
                for i in 0..a.len() {
                    out.lanes[i] = if m.test(i as u32) { a.lanes[i] } else { b.lanes[i] };
                }
                out
            }

            /// Zero-masking: lanes outside `m` become zero.
            #[inline]
            pub fn mask_zero(&self, m: LaneMask) -> Self {
                Self::select(m, self, &Self::zero(self.n))
            }

            /// Packs the lanes selected by `m` toward element 0, zero-filling the rest.
            pub fn compress(&self, m: LaneMask) -> Self {
                debug_assert_eq!(m.width() as usize, self.len(), "mask/vector width mismatch");
                let mut out = Self::zero(self.n);
                let mut k = 0;
                for i in m.iter_set() {
                    out.lanes[k] = self.lanes[i as usize];
                    k += 1;
                }
                out
            }

            /// Rotates elements toward index 0: `out[i] = self[(i + k) mod len]`.
            pub fn rotate_down(&self, k: usize) -> Self {
                let len = self.len();
                Self::from_fn(self.n, |i| self.lanes[(i + k) % len])
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "["))?;
                for (i, x) in self.as_slice().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{:0width$x}", x, width = std::mem::size_of::<$elem>() * 2)?;
                }
                f.write_str("]")
            }
        }

        impl BitAnd for $name {
            type Output = Self;
            #[inline]
            fn bitand(self, rhs: Self) -> Self {
                self.zip(&rhs, |a, b| a & b)
            }
        }

        impl BitOr for $name {
            type Output = Self;
            #[inline]
            fn bitor(self, rhs: Self) -> Self {
                self.zip(&rhs, |a, b| a | b)
            }
        }

        impl BitXor for $name {
            type Output = Self;
            #[inline]
            fn bitxor(self, rhs: Self) -> Self {
                self.zip(&rhs, |a, b| a ^ b)
            }
        }

        impl Not for $name {
            type Output = Self;
            #[inline]
            fn not(self) -> Self {
                self.map(|a| !a)
            }
        }

        impl Add for $name {
            type Output = Self;
            #[inline]
            fn add(self, rhs: Self) -> Self {
                self.zip(&rhs, |a, b| a.wrapping_add(b))
            }
        }

        impl Sub for $name {
            type Output = Self;
            #[inline]
            fn sub(self, rhs: Self) -> Self {
                self.zip(&rhs, |a, b| a.wrapping_sub(b))
            }
        }

        impl Shl<u32> for $name {
            type Output = Self;
            #[inline]
            fn shl(self, rhs: u32) -> Self {
                self.map(|a| a.checked_shl(rhs).unwrap_or(0))
            }
        }

        impl Shr<u32> for $name {
            type Output = Self;
            #[inline]
            fn shr(self, rhs: u32) -> Self {
                self.map(|a| a.checked_shr(rhs).unwrap_or(0))
            }
        }
    };
}

lane_vector!(
    /// `n` unsigned bytes; element 0 is the first byte in memory.
    ByteVec,
    u8,
    64,
    bytes
);
lane_vector!(
    /// `n/2` unsigned 16-bit words.
    WordVec,
    u16,
    32,
    words
);
lane_vector!(
    /// `n/2` unsigned 32-bit words, holding `2n` bytes of data.
    DwordVec,
    u32,
    32,
    words
);

impl ByteVec {
    /// The identity permutation `(0, 1, ..., n-1)`.
    pub fn identity(n: LaneCount) -> Self {
        Self::from_fn(n, |i| i as u8)
    }

    /// `out[i] = self[idx[i] mod n]`; out-of-range indices wrap around.
    pub fn permute(&self, idx: &ByteVec) -> Self {
        let n = self.len();
        Self::from_fn(self.n, |i| self.lanes[idx.lanes[i] as usize % n])
    }

    /// Zero-extends the first `n/2` bytes to words.
    pub fn widen(&self) -> WordVec {
        WordVec::from_fn(self.n, |i| self.lanes[i] as u16)
    }
}

impl WordVec {
    /// Zero-extends to 32-bit lanes.
    pub fn widen(&self) -> DwordVec {
        DwordVec::from_fn(self.n, |i| self.lanes[i] as u32)
    }

    /// Truncates every word to its low byte; the bytes fill the first `n/2`
    /// lanes of the result and the remaining lanes are zero.
    pub fn truncate(&self) -> ByteVec {
        let mut out = ByteVec::zero(self.n);
        for i in 0..self.len() {
            out.lanes[i] = self.lanes[i] as u8;
        }
        out
    }

    /// Reinterprets the `n/2` words as `n` little-endian bytes.
    pub fn to_le_bytes(&self) -> ByteVec {
        let mut out = ByteVec::zero(self.n);
        for i in 0..self.len() {
            let [lo, hi] = self.lanes[i].to_le_bytes();
            out.lanes[2 * i] = lo;
            out.lanes[2 * i + 1] = hi;
        }
        out
    }

    /// Byte-wise unsigned `self >= rhs` over both operands reinterpreted as bytes.
    pub fn bytes_ge(&self, rhs: &WordVec) -> LaneMask {
        self.to_le_bytes().ge(&rhs.to_le_bytes())
    }
}

impl DwordVec {
    /// Byte `k` of each 32-bit lane becomes bits `[offsets[k], offsets[k] + 8)`
    /// of the source lane.
    ///
    /// # Panics
    ///
    /// Panics if an offset exceeds 24, i.e. a chunk would cross the lane.
    pub fn multishift(&self, offsets: [u8; 4]) -> Self {
        for &o in &offsets {
            assert!(
                o <= 24,
                "multishift chunk at offset {o} crosses the 32-bit lane"
            );
        }
        self.map(|x| {
            let mut out = 0u32;
            for (k, &o) in offsets.iter().enumerate() {
                out |= ((x >> o) & 0xFF) << (8 * k);
            }
            out
        })
    }

    /// Reinterprets the `2n` little-endian bytes as two `n`-byte vectors:
    /// lanes `0..n/4` in the first, lanes `n/4..n/2` in the second.
    pub fn to_le_byte_halves(&self) -> [ByteVec; 2] {
        let quarter = self.len() / 2;
        let mut halves = [ByteVec::zero(self.n), ByteVec::zero(self.n)];
        for (h, half) in halves.iter_mut().enumerate() {
            for j in 0..quarter {
                let bytes = self.lanes[h * quarter + j].to_le_bytes();
                half.lanes[4 * j..4 * j + 4].copy_from_slice(&bytes);
            }
        }
        halves
    }

    /// Byte-wise unsigned `self >= rhs`, one `n`-bit mask per half.
    pub fn bytes_ge(&self, rhs: &DwordVec) -> [LaneMask; 2] {
        let [a0, a1] = self.to_le_byte_halves();
        let [b0, b1] = rhs.to_le_byte_halves();
        [a0.ge(&b0), a1.ge(&b1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const N8: LaneCount = LaneCount::N8;

    #[test]
    fn lane_count_validation() {
        assert!(LaneCount::new(24).is_err());
        assert_eq!(LaneCount::new(16).unwrap().words(), 8);
        assert_eq!(LaneCount::default(), LaneCount::N64);
    }

    #[test]
    fn compress_diagram() {
        let v = ByteVec::from_slice(N8, &[0x12, 0x34, 0x56, 0x78, 0x9a, 0xbc, 0xde, 0xf0]);
        let m = LaneMask::new(0xcd, 8);
        assert_eq!(
            v.compress(m).as_slice(),
            &[0x12, 0x56, 0x78, 0xde, 0xf0, 0, 0, 0]
        );
        assert_eq!(v.compress(LaneMask::ones(8)), v);
        assert_eq!(v.compress(LaneMask::zero(8)), ByteVec::zero(N8));
    }

    #[test]
    fn compress_exhaustive_at_eight_lanes() {
        let v = ByteVec::from_slice(N8, &[1, 2, 3, 4, 5, 6, 7, 8]);
        for m in 0..=255u64 {
            let mut expect: Vec<u8> = (0..8)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| v.get(i))
                .collect();
            let kept = expect.len();
            expect.resize(8, 0);
            let got = v.compress(LaneMask::new(m, 8));
            assert_eq!(got.as_slice(), &expect[..], "mask {m:#04x}");
            let nonzero = got.as_slice().iter().take_while(|&&b| b != 0).count();
            assert_eq!(nonzero, kept);
        }
    }

    #[test]
    fn permute_wraps_modulo_n() {
        let v = ByteVec::from_slice(N8, &[10, 11, 12, 13, 14, 15, 16, 17]);
        assert_eq!(v.permute(&ByteVec::identity(N8)), v);
        let rot = ByteVec::from_fn(N8, |i| ((i + 1) % 8) as u8);
        assert_eq!(
            v.permute(&rot).as_slice(),
            &[11, 12, 13, 14, 15, 16, 17, 10]
        );
        let mut idx = ByteVec::identity(N8);
        idx = ByteVec::select(LaneMask::bit(0, 8), &ByteVec::splat(N8, 8 + 2), &idx);
        assert_eq!(v.permute(&idx).get(0), 12);
        // 0 - 1 wraps to the last lane
        let minus = ByteVec::identity(N8) - ByteVec::splat(N8, 1);
        assert_eq!(v.permute(&minus).get(0), 17);
    }

    #[test]
    fn multishift_pattern() {
        let n = LaneCount::N16;
        let v = DwordVec::splat(n, 0x0010_F4AA);
        let shifted = v.multishift([18, 12, 6, 0]);
        let x = 0x0010_F4AAu32;
        let oracle =
            u32::from_le_bytes([(x >> 18) as u8, (x >> 12) as u8, (x >> 6) as u8, x as u8]);
        assert_eq!(shifted.get(0), oracle);
        // byte 0 holds the top bits (x >> 18), byte 3 the low 8 bits
        assert_eq!(shifted.get(0) & 0xFF, 0x04);
        assert_eq!(shifted.get(0) >> 24, 0xAA);
    }

    #[test]
    fn multishift_symbolic_layout() {
        // bits 0..=20 labelled by their index: check where each one lands.
        let n = LaneCount::N8;
        for bit in 0..21u32 {
            let v = DwordVec::splat(n, 1 << bit);
            let out = v.multishift([18, 12, 6, 0]).get(0);
            let mut expect = 0u32;
            for (k, off) in [18u32, 12, 6, 0].iter().enumerate() {
                if bit >= *off && bit < off + 8 {
                    expect |= 1 << (8 * k as u32 + bit - off);
                }
            }
            assert_eq!(out, expect, "bit {bit}");
        }
    }

    #[test]
    #[should_panic(expected = "crosses the 32-bit lane")]
    fn multishift_rejects_crossing_chunks() {
        DwordVec::zero(N8).multishift([25, 0, 0, 0]);
    }

    #[test]
    fn widen_and_truncate() {
        let v = ByteVec::from_slice(N8, &[0x80, 1, 2, 0xff, 9, 9, 9, 9]);
        let w = v.widen();
        assert_eq!(w.as_slice(), &[0x80, 1, 2, 0xff]);
        assert_eq!(w.widen().as_slice(), &[0x80, 1, 2, 0xff]);
        assert_eq!(w.truncate().as_slice(), &[0x80, 1, 2, 0xff, 0, 0, 0, 0]);
        let words = WordVec::from_slice(N8, &[0x1234, 0xabcd, 0, 0xffff]);
        assert_eq!(
            words.to_le_bytes().as_slice(),
            &[0x34, 0x12, 0xcd, 0xab, 0, 0, 0xff, 0xff]
        );
    }

    #[test]
    fn dword_halves_and_byte_compare() {
        let v = DwordVec::from_slice(N8, &[0x0403_0201, 0x0807_0605, 0x0c0b_0a09, 0x100f_0e0d]);
        let [lo, hi] = v.to_le_byte_halves();
        assert_eq!(lo.as_slice(), &[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(hi.as_slice(), &[9, 10, 11, 12, 13, 14, 15, 16]);
        let [m0, m1] = v.bytes_ge(&DwordVec::splat(N8, 0x0a0a_0a0a));
        assert_eq!(m0.bits(), 0);
        assert_eq!(m1.to_element_order(), "01111111");
    }

    #[test]
    fn word_comparisons_are_unsigned() {
        let n = LaneCount::N8;
        let v = WordVec::from_slice(n, &[0x0000, 0x7fff, 0x8000, 0xffff]);
        assert_eq!(v.lt_splat(0x8000).to_element_order(), "1100");
        assert_eq!(v.ge_splat(0x8000).to_element_order(), "0011");
        assert_eq!(v.eq_splat(0xffff).to_element_order(), "0001");
        assert_eq!(v.le(&WordVec::splat(n, 0x7fff)).to_element_order(), "1100");
        let wrapped = v - WordVec::splat(n, 1);
        assert_eq!(wrapped.get(0), 0xffff);
    }

    #[test]
    fn rotate_down_moves_next_element_into_place() {
        let v = DwordVec::from_slice(N8, &[1, 2, 3, 4]);
        assert_eq!(v.rotate_down(1).as_slice(), &[2, 3, 4, 1]);
    }

    proptest! {
        #[test]
        fn compress_matches_scalar_loop_at_64(bytes in proptest::collection::vec(any::<u8>(), 64), m: u64) {
            let v = ByteVec::from_slice(LaneCount::N64, &bytes);
            let mut expect: Vec<u8> = (0..64).filter(|i| m >> i & 1 == 1).map(|i| bytes[i]).collect();
            expect.resize(64, 0);
            let got = v.compress(LaneMask::new(m, 64));
            prop_assert_eq!(got.as_slice(), &expect[..]);
        }

        #[test]
        fn multishift_identity_offsets(lanes in proptest::collection::vec(any::<u32>(), 32)) {
            let v = DwordVec::from_slice(LaneCount::N64, &lanes);
            prop_assert_eq!(v.multishift([0, 8, 16, 24]), v);
        }
    }
}
