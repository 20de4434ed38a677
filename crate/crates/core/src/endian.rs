//! Conversions between raw byte streams and UTF-16 code units.
//!
//! The transcoders work on native `u16` words holding UTF-16LE code units;
//! big-endian data is handled by swapping bytes before or after.

/// Decodes little-endian byte pairs into words. A trailing odd byte is
/// returned separately so callers can report it.
pub fn words_from_le_bytes(bytes: &[u8]) -> (Vec<u16>, Option<u8>) {
    let chunks = bytes.chunks_exact(2);
    let rest = chunks.remainder().first().copied();
    (
        chunks.map(|c| u16::from_le_bytes([c[0], c[1]])).collect(),
        rest,
    )
}

pub fn words_from_be_bytes(bytes: &[u8]) -> (Vec<u16>, Option<u8>) {
    let chunks = bytes.chunks_exact(2);
    let rest = chunks.remainder().first().copied();
    (
        chunks.map(|c| u16::from_be_bytes([c[0], c[1]])).collect(),
        rest,
    )
}

pub fn words_to_le_bytes(words: &[u16]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

pub fn words_to_be_bytes(words: &[u16]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_be_bytes()).collect()
}

/// Reverses the byte order of every word in place.
pub fn swap_in_place(words: &mut [u16]) {
    for w in words {
        *w = w.swap_bytes();
    }
}
