//! SymFrog-512: a duplex-sponge AEAD over the 1024-bit `P1024-v2` permutation.
//!
//! The crate is layered bottom-up:
//!
//! * [`permutation`]: the 16-word state, round constants and the 24-round permutation.
//! * [`duplex`]: keyed initialization, domain-separated absorption with `10*1` padding and
//!   the output transform that every squeeze goes through.
//! * [`aead`]: streaming encryption/decryption with a 32-byte tag.
//! * [`froghash`]: the FrogHash-512 sponge hash.
//! * [`kdf`]: Argon2id passphrase derivation of 1024-bit keys.
//! * [`container`]: the `.syf` file format with a keyed header tag and atomic output.
//! * [`diagnostics`]: avalanche measurements, benchmarks and the `--test-all` artifacts.
//!
//! ```
//! use symfrog::aead::{open, seal};
//! use symfrog::{Key, Nonce};
//!
//! let key = Key::from_bytes([7u8; 128]);
//! let nonce = Nonce::from_bytes([9u8; 32]);
//! let (ct, tag) = seal(&key, &nonce, b"header", b"attack at dawn");
//! assert_eq!(ct.len(), 14);
//! assert_eq!(open(&key, &nonce, b"header", &ct, &tag).unwrap(), b"attack at dawn");
//! ```
#![forbid(unsafe_code)]
#![warn(rust_2018_idioms, missing_debug_implementations)]

pub mod aead;
pub mod container;
pub mod ct;
pub mod diagnostics;
pub mod duplex;
mod error;
pub mod froghash;
pub mod kdf;
pub mod permutation;
mod types;

pub use error::{Error, Result};
pub use permutation::State;
pub use types::{Key, Nonce, Tag, KEY_BYTES, NONCE_BYTES, TAG_BYTES};

/// Width of the permutation state in bytes.
pub const STATE_BYTES: usize = 128;
/// Bytes absorbed or squeezed per permutation call.
pub const RATE_BYTES: usize = 64;
/// Number of rounds of `P1024-v2`.
pub const ROUNDS: usize = 24;
