//! Shared fixtures for the criterion benches.

use symfrog::{Key, Nonce};

/// Payload sizes used by the throughput benches.
pub const SIZES: [usize; 4] = [64, 4 * 1024, 64 * 1024, 1 << 20];

pub fn key() -> Key {
    Key::from_bytes(std::array::from_fn(|i| i as u8))
}

pub fn nonce() -> Nonce {
    Nonce::from_bytes(std::array::from_fn(|i| (i as u8).wrapping_mul(7)))
}

/// Non-constant payload so nothing can be folded away.
pub fn payload(len: usize) -> Vec<u8> {
    (0..len).map(|i| (i.wrapping_mul(31) ^ (i >> 8)) as u8).collect()
}
