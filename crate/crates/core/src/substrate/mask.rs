use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not, Shl, Shr};

use super::bits;

/// One bit per vector element, bit `i` (LSB first) selecting element `i`.
///
/// Bits at or above `width` are always zero; every operation re-applies
/// that invariant, so shifting left discards bits that run off the end the
/// same way a hardware mask register of that width would.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaneMask {
    bits: u64,
    width: u8,
}

#[inline]
const fn width_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl LaneMask {
    /// Creates a mask of `width` elements, dropping any bits past the width.
    #[inline]
    pub const fn new(bits: u64, width: u32) -> Self {
        assert!(width >= 1 && width <= 64, "mask width must be in 1..=64");
        Self {
            bits: bits & width_mask(width),
            width: width as u8,
        }
    }

    #[inline]
    pub const fn zero(width: u32) -> Self {
        Self::new(0, width)
    }

    #[inline]
    pub const fn ones(width: u32) -> Self {
        Self::new(u64::MAX, width)
    }

    /// The first `k` elements set, `(1 << k) - 1`.
    #[inline]
    pub const fn prefix(k: u32, width: u32) -> Self {
        assert!(k <= width, "prefix longer than the mask");
        Self::new(width_mask(k), width)
    }

    #[inline]
    pub const fn bit(i: u32, width: u32) -> Self {
        assert!(i < width, "bit index outside the mask");
        Self::new(1u64 << i, width)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub const fn width(self) -> u32 {
        self.width as u32
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub const fn is_ones(self) -> bool {
        self.bits == width_mask(self.width as u32)
    }

    #[inline]
    pub const fn test(self, i: u32) -> bool {
        i < self.width as u32 && (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn popcount(self) -> u32 {
        bits::popcount(self.bits)
    }

    #[inline]
    pub fn ctz(self) -> u32 {
        bits::ctz(self.bits)
    }

    #[inline]
    pub fn bit_width(self) -> u32 {
        bits::bit_width(self.bits)
    }

    /// Reinterprets the mask at another width, truncating or zero-extending.
    #[inline]
    pub const fn resize(self, width: u32) -> Self {
        Self::new(self.bits, width)
    }

    /// Bits of `other` at the positions set in `self`, packed toward bit 0.
    #[inline]
    pub fn pext(self, other: LaneMask) -> LaneMask {
        LaneMask::new(bits::pext(self.bits, other.bits), self.width())
    }

    /// Low bits of `other` scattered into the positions set in `self`.
    #[inline]
    pub fn pdep(self, other: LaneMask) -> LaneMask {
        LaneMask::new(bits::pdep(self.bits, other.bits), self.width())
    }

    /// Iterator over the indices of set elements, in element order.
    pub fn iter_set(self) -> impl Iterator<Item = u32> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Parses element-order text such as `"10010011"` (element 0 first).
    pub fn from_element_order(s: &str) -> Self {
        let digits: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let mut bits = 0u64;
        for (i, d) in digits.iter().enumerate() {
            match d {
                b'1' => bits |= 1 << i,
                b'0' => {}
                _ => panic!("mask text must be 0/1, got {:?}", *d as char),
            }
        }
        Self::new(bits, digits.len() as u32)
    }

    /// Element-order rendering, element 0 first.
    pub fn to_element_order(self) -> String {
        (0..self.width())
            .map(|i| if self.test(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for LaneMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaneMask[{}]", self.to_element_order())
    }
}

impl fmt::Display for LaneMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_element_order())
    }
}

macro_rules! binary_op {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for LaneMask {
            type Output = LaneMask;

            #[inline]
            fn $method(self, rhs: LaneMask) -> LaneMask {
                debug_assert_eq!(self.width, rhs.width, "mask width mismatch");
                LaneMask { bits: self.bits $op rhs.bits, width: self.width }
            }
        }
    };
}

binary_op!(BitAnd, bitand, &);
binary_op!(BitOr, bitor, |);
binary_op!(BitXor, bitxor, ^);

impl Not for LaneMask {
    type Output = LaneMask;

    #[inline]
    fn not(self) -> LaneMask {
        LaneMask::new(!self.bits, self.width())
    }
}

impl Shl<u32> for LaneMask {
    type Output = LaneMask;

    #[inline]
    fn shl(self, rhs: u32) -> LaneMask {
        let bits = if rhs >= 64 { 0 } else { self.bits << rhs };
        LaneMask::new(bits, self.width())
    }
}

impl Shr<u32> for LaneMask {
    type Output = LaneMask;

    #[inline]
    fn shr(self, rhs: u32) -> LaneMask {
        let bits = if rhs >= 64 { 0 } else { self.bits >> rhs };
        LaneMask::new(bits, self.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_discard_past_width() {
        let m = LaneMask::from_element_order("00001000");
        assert_eq!((m << 3).to_element_order(), "00000001");
        assert_eq!((m << 4).bits(), 0);
        assert_eq!((m >> 4).to_element_order(), "10000000");
        assert_eq!((m >> 5).bits(), 0);
    }

    #[test]
    fn not_stays_within_width() {
        let m = LaneMask::zero(8);
        assert_eq!((!m).bits(), 0xFF);
        assert!((!m).is_ones());
        assert_eq!((!LaneMask::ones(64)).bits(), 0);
    }

    #[test]
    fn element_order_round_trip() {
        let m = LaneMask::new(0xcd, 8);
        assert_eq!(m.to_element_order(), "10110011");
        assert_eq!(LaneMask::from_element_order("1011 0011"), m);
    }

    #[test]
    fn prefix_and_bit() {
        assert_eq!(LaneMask::prefix(3, 8).bits(), 0b111);
        assert_eq!(LaneMask::prefix(64, 64).bits(), u64::MAX);
        assert_eq!(LaneMask::prefix(0, 16).bits(), 0);
        assert_eq!(LaneMask::bit(31, 32).bits(), 1 << 31);
    }

    #[test]
    fn resize_truncates() {
        let m = LaneMask::new(0x1_0000_0001, 64);
        assert_eq!(m.resize(32).bits(), 1);
        assert_eq!(m.resize(32).resize(64).bits(), 1);
    }

    #[test]
    fn iter_set_in_element_order() {
        let m = LaneMask::from_element_order("01100001");
        assert_eq!(m.iter_set().collect::<Vec<_>>(), vec![1, 2, 7]);
    }
}
