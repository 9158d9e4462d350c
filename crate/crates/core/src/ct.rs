//! Constant-time helpers.

/// Compares two equal-length byte strings without data-dependent early exit.
///
/// Slices of different lengths compare unequal; the length itself is not secret.
#[inline(never)]
pub fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let diff = a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y));
    std::hint::black_box(diff) == 0
}
