use std::fmt;

use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::ct::constant_time_eq;
use crate::error::{Error, Result};

pub const KEY_BYTES: usize = 128;
pub const NONCE_BYTES: usize = 32;
pub const TAG_BYTES: usize = 32;

/// A 1024-bit secret key. Wiped on drop.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct Key([u8; KEY_BYTES]);

impl Key {
    pub fn from_bytes(bytes: [u8; KEY_BYTES]) -> Self {
        Key(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr = bytes.try_into().map_err(|_| Error::Length {
            what: "key",
            expected: KEY_BYTES,
            actual: bytes.len(),
        })?;
        Ok(Key(arr))
    }

    pub fn as_bytes(&self) -> &[u8; KEY_BYTES] {
        &self.0
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Key(<redacted>)")
    }
}

/// A 256-bit public nonce.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Nonce([u8; NONCE_BYTES]);

impl Nonce {
    pub fn from_bytes(bytes: [u8; NONCE_BYTES]) -> Self {
        Nonce(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr = bytes.try_into().map_err(|_| Error::Length {
            what: "nonce",
            expected: NONCE_BYTES,
            actual: bytes.len(),
        })?;
        Ok(Nonce(arr))
    }

    /// Draws a fresh nonce from the operating system CSPRNG.
    pub fn random() -> Result<Self> {
        let mut n = [0u8; NONCE_BYTES];
        crate::kdf::fill_random(&mut n)?;
        Ok(Nonce(n))
    }

    pub fn as_bytes(&self) -> &[u8; NONCE_BYTES] {
        &self.0
    }
}

/// A 256-bit authentication tag. Equality is constant-time.
#[derive(Clone, Copy)]
pub struct Tag([u8; TAG_BYTES]);

impl Tag {
    pub fn from_bytes(bytes: [u8; TAG_BYTES]) -> Self {
        Tag(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr = bytes.try_into().map_err(|_| Error::Length {
            what: "tag",
            expected: TAG_BYTES,
            actual: bytes.len(),
        })?;
        Ok(Tag(arr))
    }

    pub fn as_bytes(&self) -> &[u8; TAG_BYTES] {
        &self.0
    }
}

impl PartialEq for Tag {
    fn eq(&self, other: &Self) -> bool {
        constant_time_eq(&self.0, &other.0)
    }
}

impl Eq for Tag {}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tag(")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}
