//! The `P1024-v2` permutation over sixteen 64-bit words.
//!
//! Each round applies, in order: round-constant addition into the capacity words, the
//! rate/capacity mixer, a 4-word chi on each group of four words, the multiplicative kick
//! and finally a per-word rotation followed by a fixed word shuffle.
//!
//! Every layer is invertible, so the crate also ships [`inverse_permute`] for testing.

use std::cell::Cell;
use std::fmt;
use std::sync::OnceLock;

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::{RATE_BYTES, ROUNDS, STATE_BYTES};

/// Golden-ratio constant used by the kick layer and the output transform.
pub const KICK_CONSTANT: u64 = 0x9E37_79B9_7F4A_7C15;

const RC_LABEL: &[u8] = b"SymFrog-rc-v1";

/// Word shuffle: after rotation, `new[i] = old[SHUFFLE[i]]`.
pub const SHUFFLE: [usize; 16] = [0, 13, 10, 7, 4, 1, 14, 11, 8, 5, 2, 15, 12, 9, 6, 3];

const EVEN_ROTATION: u32 = 19;
const ODD_ROTATION: u32 = 61;
const KICK_ROTATION: u32 = 23;

/// Round constants, one row of eight words per round.
pub type RoundConstants = [[u64; 8]; ROUNDS];

thread_local! {
    static PERMUTE_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of full permutations evaluated on the current thread so far.
///
/// Only [`State::permute`] is counted; reduced-round and inverse evaluations are not.
pub fn permutation_calls() -> u64 {
    PERMUTE_CALLS.with(Cell::get)
}

/// Derives the round-constant table from SHAKE256 over `"SymFrog-rc-v1" || LE32(r)`.
pub fn derive_round_constants() -> RoundConstants {
    let mut table = [[0u64; 8]; ROUNDS];
    for (r, row) in table.iter_mut().enumerate() {
        let mut xof = Shake256::default();
        xof.update(RC_LABEL);
        xof.update(&(r as u32).to_le_bytes());
        let mut bytes = [0u8; 64];
        xof.finalize_xof().read(&mut bytes);
        for (w, chunk) in row.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    table
}

/// The process-wide round-constant table, derived on first use.
pub fn round_constants() -> &'static RoundConstants {
    static TABLE: OnceLock<RoundConstants> = OnceLock::new();
    TABLE.get_or_init(derive_round_constants)
}

/// The 1024-bit permutation state. Words 0..8 are the rate, 8..16 the capacity.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct State(pub [u64; 16]);

impl State {
    pub const fn zero() -> Self {
        State([0; 16])
    }

    /// Parses 128 bytes as sixteen little-endian words.
    pub fn from_bytes(bytes: &[u8; STATE_BYTES]) -> Self {
        let mut words = [0u64; 16];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        State(words)
    }

    pub fn to_bytes(&self) -> [u8; STATE_BYTES] {
        let mut out = [0u8; STATE_BYTES];
        for (chunk, w) in out.chunks_exact_mut(8).zip(self.0) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    #[inline]
    pub fn words(&self) -> &[u64; 16] {
        &self.0
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64; 16] {
        &mut self.0
    }

    /// XORs `data` (at most 64 bytes) into the rate starting at byte 0.
    #[inline]
    pub fn xor_rate(&mut self, data: &[u8]) {
        debug_assert!(data.len() <= RATE_BYTES);
        let mut chunks = data.chunks_exact(8);
        for (w, chunk) in self.0.iter_mut().zip(&mut chunks) {
            *w ^= u64::from_le_bytes(chunk.try_into().unwrap());
        }
        let full = data.len() / 8;
        for (i, &b) in chunks.remainder().iter().enumerate() {
            self.0[full] ^= u64::from(b) << (8 * i);
        }
    }

    /// XORs a single byte into the serialized position `index` (0..128).
    #[inline]
    pub fn xor_byte(&mut self, index: usize, byte: u8) {
        self.0[index / 8] ^= u64::from(byte) << (8 * (index % 8));
    }

    /// Applies the full 24-round permutation.
    pub fn permute(&mut self) {
        PERMUTE_CALLS.with(|c| c.set(c.get() + 1));
        let rc = round_constants();
        for row in rc {
            apply_round(self, row);
        }
    }

    /// Applies only the first `rounds` rounds. Used for diffusion measurements.
    pub fn permute_rounds(&mut self, rounds: usize) {
        assert!(rounds <= ROUNDS, "at most {ROUNDS} rounds");
        for row in &round_constants()[..rounds] {
            apply_round(self, row);
        }
    }

    /// Number of bits in which two states differ.
    pub fn hamming_distance(&self, other: &State) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|w| format!("{w:#018x}")))
            .finish()
    }
}

/// Sequential 4-word chi: each update reads the words already updated before it.
#[inline(always)]
pub fn chi4(x0: u64, x1: u64, x2: u64, x3: u64) -> (u64, u64, u64, u64) {
    let x0 = x0 ^ (!x1 & x2);
    let x1 = x1 ^ (!x2 & x3);
    let x2 = x2 ^ (!x3 & x0);
    let x3 = x3 ^ (!x0 & x1);
    (x0, x1, x2, x3)
}

/// Undoes [`chi4`] by replaying the four assignments backwards.
pub fn chi4_inverse(y0: u64, y1: u64, y2: u64, y3: u64) -> (u64, u64, u64, u64) {
    let x3 = y3 ^ (!y0 & y1);
    let x2 = y2 ^ (!x3 & y0);
    let x1 = y1 ^ (!x2 & x3);
    let x0 = y0 ^ (!x1 & x2);
    (x0, x1, x2, x3)
}

#[inline(always)]
fn add_round_constants(s: &mut [u64; 16], rc: &[u64; 8]) {
    for (w, c) in s[8..].iter_mut().zip(rc) {
        *w ^= c;
    }
}

#[inline(always)]
fn mix(s: &mut [u64; 16]) {
    for i in 0..8 {
        s[i] ^= s[i + 8];
    }
}

#[inline(always)]
fn chi_layer(s: &mut [u64; 16]) {
    for g in s.chunks_exact_mut(4) {
        let (a, b, c, d) = chi4(g[0], g[1], g[2], g[3]);
        g.copy_from_slice(&[a, b, c, d]);
    }
}

fn chi_layer_inverse(s: &mut [u64; 16]) {
    for g in s.chunks_exact_mut(4) {
        let (a, b, c, d) = chi4_inverse(g[0], g[1], g[2], g[3]);
        g.copy_from_slice(&[a, b, c, d]);
    }
}

#[inline(always)]
fn kick_even_to_odd(s: &mut [u64; 16]) {
    for i in (0..16).step_by(2) {
        let m = s[i] | 1;
        s[i + 1] ^= s[i].wrapping_mul(m);
    }
}

#[inline(always)]
fn kick_odd_to_even(s: &mut [u64; 16]) {
    for i in (1..16).step_by(2) {
        let m = s[i] | 1;
        let k = s[i].wrapping_mul(m ^ KICK_CONSTANT);
        s[(i + 1) % 16] ^= k.rotate_left(KICK_ROTATION);
    }
}

/// The two-phase multiplicative kick layer.
#[inline(always)]
pub fn kick(state: &mut State) {
    kick_even_to_odd(&mut state.0);
    kick_odd_to_even(&mut state.0);
}

/// Each phase only writes words its sources never read, so re-XORing undoes it.
pub fn kick_inverse(state: &mut State) {
    kick_odd_to_even(&mut state.0);
    kick_even_to_odd(&mut state.0);
}

/// Rotates every word by its pre-shuffle index parity, then applies [`SHUFFLE`].
#[inline(always)]
pub fn rotate_shuffle(state: &mut State) {
    let s = &state.0;
    let mut rotated = [0u64; 16];
    for (i, r) in rotated.iter_mut().enumerate() {
        *r = s[i].rotate_left(if i % 2 == 0 { EVEN_ROTATION } else { ODD_ROTATION });
    }
    for (i, w) in state.0.iter_mut().enumerate() {
        *w = rotated[SHUFFLE[i]];
    }
}

pub fn rotate_shuffle_inverse(state: &mut State) {
    let mut rotated = [0u64; 16];
    for (i, &w) in state.0.iter().enumerate() {
        rotated[SHUFFLE[i]] = w;
    }
    for (i, w) in state.0.iter_mut().enumerate() {
        *w = rotated[i].rotate_right(if i % 2 == 0 { EVEN_ROTATION } else { ODD_ROTATION });
    }
}

/// One round with the given row of round constants.
#[inline(always)]
pub fn apply_round(state: &mut State, rc: &[u64; 8]) {
    add_round_constants(&mut state.0, rc);
    mix(&mut state.0);
    chi_layer(&mut state.0);
    kick(state);
    rotate_shuffle(state);
}

pub fn inverse_round(state: &mut State, rc: &[u64; 8]) {
    rotate_shuffle_inverse(state);
    kick_inverse(state);
    chi_layer_inverse(&mut state.0);
    mix(&mut state.0);
    add_round_constants(&mut state.0, rc);
}

/// Applies the full permutation to a copy of `state`.
pub fn permute(state: &State) -> State {
    let mut s = *state;
    s.permute();
    s
}

pub fn inverse_permute(state: &State) -> State {
    let mut s = *state;
    for row in round_constants().iter().rev() {
        inverse_round(&mut s, row);
    }
    s
}
