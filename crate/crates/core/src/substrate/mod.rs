//! Lane-count-parameterized emulation of the vector and mask primitives the
//! transcoders are written against.
//!
//! Every operation is a pure function over value types with fixed, bit-exact
//! semantics: lane arithmetic is unsigned and wraps, masks are LSB-first, and
//! permutation indices reduce modulo the lane count.

pub mod bits;
mod mask;
mod memory;
mod vector;

pub use bits::{bit_width, ctz, pdep, pext, popcount};
pub use mask::LaneMask;
pub use memory::{
    masked_load, masked_load_words, masked_store, masked_store_words, BufferOverflow,
};
pub use vector::{ByteVec, DwordVec, LaneCount, LaneCountError, WordVec};

/// Packs the lanes of `v` selected by `m` toward element 0, zero-filling.
#[inline]
pub fn compress_bytes(m: LaneMask, v: &ByteVec) -> ByteVec {
    v.compress(m)
}

/// `out[i] = v[idx[i] mod n]`.
#[inline]
pub fn permute_bytes(v: &ByteVec, idx: &ByteVec) -> ByteVec {
    v.permute(idx)
}

/// Extracts byte `k` of each 32-bit lane from bits `[offsets[k], offsets[k] + 8)`.
#[inline]
pub fn multishift(v: &DwordVec, offsets: [u8; 4]) -> DwordVec {
    v.multishift(offsets)
}
