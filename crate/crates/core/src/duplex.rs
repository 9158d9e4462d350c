//! Keyed duplex over `P1024-v2`.
//!
//! A transcript always runs `init -> absorb(AD or header) -> ciphertext blocks -> tag`.
//! Every absorption ends with a padded step, even for empty or block-aligned input, and every
//! permutation call is preceded by XORing a [`DomainByte`] into the low byte of word 15.

use crate::error::{Error, Result};
use crate::permutation::{State, KICK_CONSTANT};
use crate::types::{Key, Nonce, Tag, TAG_BYTES};
use crate::RATE_BYTES;

const AEAD_IDENTIFIER: &[u8; 19] = b"SYMFROG-512-AEAD-v1";
const AEAD_VERSION_WORD: u64 = 1;

const SPLITMIX_MUL1: u64 = 0xBF58_476D_1CE4_E5B9;
const SPLITMIX_MUL2: u64 = 0x94D0_49BB_1331_11EB;

/// A 64-byte squeeze produced by the output transform.
pub type OutputBlock = [u8; RATE_BYTES];

/// Phase separation constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum DomainByte {
    AssociatedData = 0xA0,
    Ciphertext = 0xC0,
    Tag = 0xF0,
    Header = 0xB0,
    HeaderTag = 0xB1,
}

impl DomainByte {
    pub const fn value(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Initialized,
    AbsorbingAd,
    Streaming,
    Finalized,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Initialized => "initialized",
            Phase::AbsorbingAd => "absorbing associated data",
            Phase::Streaming => "streaming",
            Phase::Finalized => "finalized",
        }
    }
}

/// SplitMix64 output finalizer.
#[inline(always)]
pub fn splitmix64_finalize(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(SPLITMIX_MUL1);
    x ^= x >> 27;
    x = x.wrapping_mul(SPLITMIX_MUL2);
    x ^ (x >> 31)
}

/// Output transform: mixes each rate word with two rotated capacity words and a
/// lane-dependent constant, then finalizes every lane with SplitMix64.
#[inline]
pub fn output_words(state: &State) -> [u64; 8] {
    let s = state.words();
    std::array::from_fn(|i| {
        let x = s[i]
            ^ s[8 + i].rotate_left(17)
            ^ s[8 + (i + 3) % 8].rotate_left(41)
            ^ KICK_CONSTANT.wrapping_mul(i as u64 + 1);
        splitmix64_finalize(x)
    })
}

pub fn output_block(state: &State) -> OutputBlock {
    let mut out = [0u8; RATE_BYTES];
    for (chunk, w) in out.chunks_exact_mut(8).zip(output_words(state)) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    out
}

/// Builds the 64-byte rate mask for a final block: the tail bytes, `0x80` right after them
/// and `0x01` in the last rate byte.
pub fn pad_rate_tail(tail: &[u8]) -> [u8; RATE_BYTES] {
    assert!(tail.len() < RATE_BYTES, "tail must be shorter than a block");
    let mut mask = [0u8; RATE_BYTES];
    mask[..tail.len()].copy_from_slice(tail);
    mask[tail.len()] ^= 0x80;
    mask[RATE_BYTES - 1] ^= 0x01;
    mask
}

#[inline]
fn separate_and_permute(state: &mut State, ds: Option<DomainByte>) {
    if let Some(ds) = ds {
        state.words_mut()[15] ^= u64::from(ds.value());
    }
    state.permute();
}

/// XORs one full block into the rate and permutes.
#[inline]
pub(crate) fn absorb_block(state: &mut State, block: &[u8], ds: Option<DomainByte>) {
    debug_assert_eq!(block.len(), RATE_BYTES);
    state.xor_rate(block);
    separate_and_permute(state, ds);
}

/// The padded final step; `tail` may be empty.
pub(crate) fn absorb_tail(state: &mut State, tail: &[u8], ds: Option<DomainByte>) {
    state.xor_rate(&pad_rate_tail(tail));
    separate_and_permute(state, ds);
}

/// Absorbs `data` as full blocks followed by one padded step.
pub(crate) fn absorb_all(state: &mut State, data: &[u8], ds: Option<DomainByte>) {
    let mut blocks = data.chunks_exact(RATE_BYTES);
    for block in &mut blocks {
        absorb_block(state, block, ds);
    }
    absorb_tail(state, blocks.remainder(), ds);
}

/// Keyed duplex with phase tracking.
#[derive(Clone)]
pub struct Duplex {
    state: State,
    phase: Phase,
    body_closed: bool,
}

impl std::fmt::Debug for Duplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Duplex").field("phase", &self.phase).finish_non_exhaustive()
    }
}

impl Duplex {
    /// Loads the key, XORs the nonce into words 12..16 and the identifier into words 8..12,
    /// then permutes once.
    pub fn new(key: &Key, nonce: &Nonce) -> Self {
        let mut state = State::from_bytes(key.as_bytes());
        let s = state.words_mut();
        for (w, chunk) in s[12..].iter_mut().zip(nonce.as_bytes().chunks_exact(8)) {
            *w ^= u64::from_le_bytes(chunk.try_into().unwrap());
        }
        let mut ident = [0u8; 24];
        ident[..AEAD_IDENTIFIER.len()].copy_from_slice(AEAD_IDENTIFIER);
        for (w, chunk) in s[8..11].iter_mut().zip(ident.chunks_exact(8)) {
            *w ^= u64::from_le_bytes(chunk.try_into().unwrap());
        }
        s[11] ^= AEAD_VERSION_WORD;
        state.permute();
        Duplex {
            state,
            phase: Phase::Initialized,
            body_closed: false,
        }
    }

    /// Like [`Duplex::new`] but with length-checked byte slices.
    pub fn from_slices(key: &[u8], nonce: &[u8]) -> Result<Self> {
        Ok(Self::new(&Key::from_slice(key)?, &Nonce::from_slice(nonce)?))
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn misuse(&self, operation: &'static str) -> Error {
        Error::Phase {
            operation,
            phase: self.phase.name(),
        }
    }

    /// Absorbs a complete associated-data (or header) string. Allowed once, right after init.
    pub fn absorb(&mut self, ds: DomainByte, data: &[u8]) -> Result<()> {
        if self.phase != Phase::Initialized {
            return Err(self.misuse("absorb"));
        }
        if !matches!(ds, DomainByte::AssociatedData | DomainByte::Header) {
            return Err(self.misuse("absorb with a non-absorption domain"));
        }
        absorb_all(&mut self.state, data, Some(ds));
        self.phase = Phase::AbsorbingAd;
        Ok(())
    }

    /// The keystream block for the next ciphertext block. Does not advance the state.
    pub fn output_block(&self) -> OutputBlock {
        output_block(&self.state)
    }

    fn enter_streaming(&mut self, operation: &'static str) -> Result<()> {
        match self.phase {
            Phase::AbsorbingAd => {
                self.phase = Phase::Streaming;
                Ok(())
            }
            Phase::Streaming if !self.body_closed => Ok(()),
            _ => Err(self.misuse(operation)),
        }
    }

    /// Absorbs one full 64-byte ciphertext block.
    pub fn absorb_ciphertext_block(&mut self, block: &[u8; RATE_BYTES]) -> Result<()> {
        self.enter_streaming("absorb a ciphertext block")?;
        absorb_block(&mut self.state, block, Some(DomainByte::Ciphertext));
        Ok(())
    }

    /// Absorbs the final (possibly empty) ciphertext tail and closes the body.
    pub fn absorb_ciphertext_tail(&mut self, tail: &[u8]) -> Result<()> {
        if tail.len() >= RATE_BYTES {
            return Err(Error::Length {
                what: "ciphertext tail",
                expected: RATE_BYTES - 1,
                actual: tail.len(),
            });
        }
        self.enter_streaming("absorb the ciphertext tail")?;
        absorb_tail(&mut self.state, tail, Some(DomainByte::Ciphertext));
        self.body_closed = true;
        Ok(())
    }

    /// Domain-separates, permutes and returns the first 32 output bytes.
    ///
    /// Valid after the header/AD absorption, or after the ciphertext tail.
    pub fn finalize_tag(&mut self, ds: DomainByte) -> Result<Tag> {
        let ready = match self.phase {
            Phase::AbsorbingAd => true,
            Phase::Streaming => self.body_closed,
            _ => false,
        };
        if !ready || !matches!(ds, DomainByte::Tag | DomainByte::HeaderTag) {
            return Err(self.misuse("finalize"));
        }
        separate_and_permute(&mut self.state, Some(ds));
        self.phase = Phase::Finalized;
        let block = output_block(&self.state);
        Ok(Tag::from_slice(&block[..TAG_BYTES]).expect("32-byte prefix"))
    }
}
