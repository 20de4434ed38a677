use thiserror::Error;

use super::mask::LaneMask;
use super::vector::{ByteVec, LaneCount, WordVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("masked store needs {needed} units but the buffer holds {capacity}")]
pub struct BufferOverflow {
    pub needed: usize,
    pub capacity: usize,
}

#[inline]
fn extent(m: LaneMask) -> usize {
    if m.is_zero() {
        0
    } else {
        m.bit_width() as usize
    }
}

/// Loads the lanes selected by `m` from `buffer`, zeroing the rest.
///
/// Only bytes under set mask bits are read, so `buffer` may end right after
/// the last selected lane.
///
/// # Panics
///
/// Panics if a set bit indexes past the end of `buffer`.
pub fn masked_load(n: LaneCount, buffer: &[u8], m: LaneMask) -> ByteVec {
    assert_eq!(m.width() as usize, n.bytes(), "mask/vector width mismatch");
    assert!(
        extent(m) <= buffer.len(),
        "masked load past the end of the buffer"
    );
    ByteVec::from_fn(n, |i| if m.test(i as u32) { buffer[i] } else { 0 })
}

/// Writes exactly the lanes of `v` selected by `m` into `buffer`.
pub fn masked_store(buffer: &mut [u8], m: LaneMask, v: &ByteVec) -> Result<(), BufferOverflow> {
    let needed = extent(m);
    if needed > buffer.len() {
        return Err(BufferOverflow {
            needed,
            capacity: buffer.len(),
        });
    }
    for i in m.iter_set() {
        buffer[i as usize] = v.get(i as usize);
    }
    Ok(())
}

/// Word-granular counterpart of [`masked_load`]; `m` has `n/2` bits.
pub fn masked_load_words(n: LaneCount, buffer: &[u16], m: LaneMask) -> WordVec {
    assert_eq!(m.width() as usize, n.words(), "mask/vector width mismatch");
    assert!(
        extent(m) <= buffer.len(),
        "masked load past the end of the buffer"
    );
    WordVec::from_fn(n, |i| if m.test(i as u32) { buffer[i] } else { 0 })
}

/// Word-granular counterpart of [`masked_store`].
pub fn masked_store_words(
    buffer: &mut [u16],
    m: LaneMask,
    v: &WordVec,
) -> Result<(), BufferOverflow> {
    let needed = extent(m);
    if needed > buffer.len() {
        return Err(BufferOverflow {
            needed,
            capacity: buffer.len(),
        });
    }
    for i in m.iter_set() {
        buffer[i as usize] = v.get(i as usize);
    }
    Ok(())
}
