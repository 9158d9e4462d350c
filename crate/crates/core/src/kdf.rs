//! Passphrase to 1024-bit key derivation with Argon2id v1.3.

use argon2::{Algorithm, Argon2, Block, Params, Version};
use rand::rngs::OsRng;
use rand::RngCore;
use zeroize::{Zeroize, Zeroizing};

use crate::error::{Error, Result};
use crate::types::{Key, KEY_BYTES};

pub const SALT_BYTES: usize = 32;

const MIB: u64 = 1024 * 1024;

/// Argon2id cost limits. Always a single lane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KdfProfile {
    pub name: &'static str,
    /// Number of passes over memory.
    pub ops_limit: u32,
    /// Memory in bytes; a multiple of 1 KiB.
    pub mem_limit: u64,
}

impl KdfProfile {
    /// The default profile: 3 passes over 256 MiB.
    pub const MODERATE: KdfProfile = KdfProfile {
        name: "moderate",
        ops_limit: 3,
        mem_limit: 256 * MIB,
    };

    /// `--paranoid`: 4 passes over 1 GiB.
    pub const SENSITIVE: KdfProfile = KdfProfile {
        name: "sensitive",
        ops_limit: 4,
        mem_limit: 1024 * MIB,
    };

    /// Non-standard limits, e.g. for tests. Files produced with these need the same limits
    /// to decrypt.
    pub const fn custom(ops_limit: u32, mem_limit: u64) -> Self {
        KdfProfile {
            name: "custom",
            ops_limit,
            mem_limit,
        }
    }

    fn mem_kib(&self) -> Result<u32> {
        u32::try_from(self.mem_limit / 1024)
            .map_err(|_| Error::Kdf(format!("memory limit {} too large", self.mem_limit)))
    }
}

impl Default for KdfProfile {
    fn default() -> Self {
        KdfProfile::MODERATE
    }
}

/// A 32-byte Argon2id salt, stored in the container header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Salt(pub [u8; SALT_BYTES]);

impl Salt {
    pub fn as_bytes(&self) -> &[u8; SALT_BYTES] {
        &self.0
    }
}

/// Fills `buf` from the OS CSPRNG. There is no fallback source.
pub fn fill_random(buf: &mut [u8]) -> Result<()> {
    OsRng.try_fill_bytes(buf).map_err(|e| Error::Rng(e.to_string()))
}

pub fn generate_salt() -> Result<Salt> {
    let mut s = [0u8; SALT_BYTES];
    fill_random(&mut s)?;
    Ok(Salt(s))
}

/// Derives a 128-byte key. The working memory is reserved up front so an allocation
/// failure surfaces as [`Error::Kdf`] instead of an abort; the profile is never weakened.
pub fn derive_key(passphrase: &[u8], salt: &Salt, profile: &KdfProfile) -> Result<Key> {
    let m_cost = profile.mem_kib()?;
    let params = Params::new(m_cost, profile.ops_limit, 1, Some(KEY_BYTES))
        .map_err(|e| Error::Kdf(e.to_string()))?;
    let argon = Argon2::new(Algorithm::Argon2id, Version::V0x13, params);

    let mut blocks: Vec<Block> = Vec::new();
    blocks.try_reserve_exact(m_cost as usize).map_err(|_| {
        Error::Kdf(format!(
            "cannot allocate {} MiB for the {} profile",
            profile.mem_limit / MIB,
            profile.name
        ))
    })?;
    blocks.resize(m_cost as usize, Block::default());

    let mut out = Zeroizing::new([0u8; KEY_BYTES]);
    let res = argon.hash_password_into_with_memory(passphrase, &salt.0, &mut out[..], &mut blocks);
    blocks.iter_mut().for_each(Zeroize::zeroize);
    res.map_err(|e| Error::Kdf(e.to_string()))?;
    Ok(Key::from_bytes(*out))
}
