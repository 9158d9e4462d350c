//! The `.syf` encrypted file container.
//!
//! ```text
//! offset  size  field
//!      0     8  magic "SYMFROG1"
//!      8     4  version (LE, = 1)
//!     12     4  flags (LE, bit 0 = key derived from passphrase)
//!     16    32  Argon2id salt (zero for raw keys)
//!     48    32  nonce
//!     80     8  ct_len (LE)
//!     88    32  reserved (zero on write, authenticated on read)
//!    120    32  header_tag
//!    152     *  ciphertext
//!   -32     32  final tag
//! ```
//!
//! The header tag is a separate keyed transcript over the zero-tagged header and the caller's
//! associated data, so a wrong key or AD is rejected before any ciphertext is read. Output
//! files are written to a temporary sibling, synced and renamed into place; decryption only
//! renames after the final tag verifies.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use tempfile::NamedTempFile;
use zeroize::Zeroizing;

use crate::aead::{encrypt_stream, AeadParams, Decryptor, Verdict, STREAM_CHUNK};
use crate::duplex::{DomainByte, Duplex};
use crate::error::Result;
use crate::kdf::{derive_key, generate_salt, KdfProfile, Salt, SALT_BYTES};
use crate::types::{Key, Nonce, Tag, NONCE_BYTES, TAG_BYTES};

pub const MAGIC: &[u8; 8] = b"SYMFROG1";
pub const FORMAT_VERSION: u32 = 1;
pub const FLAG_KEY_DERIVED: u32 = 1;
pub const HEADER_BYTES: usize = 152;
/// Header plus final tag.
pub const OVERHEAD: u64 = (HEADER_BYTES + TAG_BYTES) as u64;

const HEADER_TAG_OFFSET: usize = 120;
const HEADER_TAG_LABEL: &[u8] = b"SYMFROG-HDRTAG-v1";

/// Why a file was rejected before authentication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatError {
    BadMagic,
    UnsupportedVersion(u32),
    UnknownFlags(u32),
    /// The file cannot hold a header and a final tag.
    Truncated { file_len: u64 },
    /// `ct_len` disagrees with the size implied by the file length.
    LengthMismatch { header: u64, actual: u64 },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::BadMagic => write!(f, "not a SymFrog file (bad magic)"),
            FormatError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            FormatError::UnknownFlags(x) => write!(f, "unknown header flags {x:#010x}"),
            FormatError::Truncated { file_len } => {
                write!(f, "file too short ({file_len} bytes, need at least {OVERHEAD})")
            }
            FormatError::LengthMismatch { header, actual } => write!(
                f,
                "header says {header} ciphertext bytes but the file holds {actual}"
            ),
        }
    }
}

/// Result of opening a container.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub enum DecryptVerdict {
    Ok,
    /// Wrong key, wrong associated data, or a modified header.
    HeaderAuthFail,
    /// The ciphertext or final tag was modified.
    BodyAuthFail,
    Format(FormatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub magic: [u8; 8],
    pub version: u32,
    pub flags: u32,
    pub salt: Salt,
    pub nonce: Nonce,
    pub ct_len: u64,
    pub reserved: [u8; 32],
    pub header_tag: [u8; TAG_BYTES],
}

impl Header {
    pub fn new(flags: u32, salt: Salt, nonce: Nonce, ct_len: u64) -> Self {
        Header {
            magic: *MAGIC,
            version: FORMAT_VERSION,
            flags,
            salt,
            nonce,
            ct_len,
            reserved: [0; 32],
            header_tag: [0; TAG_BYTES],
        }
    }

    pub fn key_derived(&self) -> bool {
        self.flags & FLAG_KEY_DERIVED != 0
    }

    pub fn to_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut b = [0u8; HEADER_BYTES];
        b[0..8].copy_from_slice(&self.magic);
        b[8..12].copy_from_slice(&self.version.to_le_bytes());
        b[12..16].copy_from_slice(&self.flags.to_le_bytes());
        b[16..48].copy_from_slice(self.salt.as_bytes());
        b[48..80].copy_from_slice(self.nonce.as_bytes());
        b[80..88].copy_from_slice(&self.ct_len.to_le_bytes());
        b[88..120].copy_from_slice(&self.reserved);
        b[120..152].copy_from_slice(&self.header_tag);
        b
    }

    /// Decodes the fields without validating them.
    pub fn from_bytes(b: &[u8; HEADER_BYTES]) -> Self {
        let arr = |r: std::ops::Range<usize>| -> [u8; 32] { b[r].try_into().unwrap() };
        Header {
            magic: b[0..8].try_into().unwrap(),
            version: u32::from_le_bytes(b[8..12].try_into().unwrap()),
            flags: u32::from_le_bytes(b[12..16].try_into().unwrap()),
            salt: Salt(arr(16..16 + SALT_BYTES)),
            nonce: Nonce::from_bytes(arr(48..48 + NONCE_BYTES)),
            ct_len: u64::from_le_bytes(b[80..88].try_into().unwrap()),
            reserved: arr(88..120),
            header_tag: arr(120..152),
        }
    }

    /// Structural checks done before any cryptography.
    pub fn validate(&self) -> Result<(), FormatError> {
        if &self.magic != MAGIC {
            return Err(FormatError::BadMagic);
        }
        if self.version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion(self.version));
        }
        if self.flags & !FLAG_KEY_DERIVED != 0 {
            return Err(FormatError::UnknownFlags(self.flags));
        }
        Ok(())
    }

    /// The serialized header with the tag field zeroed, as authenticated by the header tag.
    pub fn zeroed_tag_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut b = self.to_bytes();
        b[HEADER_TAG_OFFSET..].fill(0);
        b
    }

    pub fn compute_tag(&self, key: &Key, ad: &[u8]) -> Tag {
        compute_header_tag(key, &self.nonce, ad, &self.zeroed_tag_bytes())
    }
}

/// Header tag over `"SYMFROG-HDRTAG-v1" || header_zeroed || ad`.
///
/// # Panics
///
/// If the header tag field (bytes 120..152) of `header_zeroed` is not zero.
pub fn compute_header_tag(
    key: &Key,
    nonce: &Nonce,
    ad: &[u8],
    header_zeroed: &[u8; HEADER_BYTES],
) -> Tag {
    assert!(
        header_zeroed[HEADER_TAG_OFFSET..].iter().all(|&b| b == 0),
        "header tag field must be zeroed"
    );
    let mut transcript =
        Vec::with_capacity(HEADER_TAG_LABEL.len() + HEADER_BYTES + ad.len());
    transcript.extend_from_slice(HEADER_TAG_LABEL);
    transcript.extend_from_slice(header_zeroed);
    transcript.extend_from_slice(ad);

    let mut duplex = Duplex::new(key, nonce);
    duplex
        .absorb(DomainByte::Header, &transcript)
        .expect("fresh duplex");
    duplex
        .finalize_tag(DomainByte::HeaderTag)
        .expect("header absorbed")
}

/// Where the key comes from.
pub enum KeySource {
    Raw(Key),
    Passphrase {
        passphrase: Zeroizing<Vec<u8>>,
        profile: KdfProfile,
    },
}

impl KeySource {
    pub fn passphrase(passphrase: impl Into<Vec<u8>>, profile: KdfProfile) -> Self {
        KeySource::Passphrase {
            passphrase: Zeroizing::new(passphrase.into()),
            profile,
        }
    }
}

impl fmt::Debug for KeySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeySource::Raw(_) => f.write_str("KeySource::Raw(<redacted>)"),
            KeySource::Passphrase { profile, .. } => f
                .debug_struct("KeySource::Passphrase")
                .field("profile", &profile.name)
                .finish_non_exhaustive(),
        }
    }
}

/// Temporary sibling of `dest`, renamed over it by [`AtomicFile::commit`] and removed on drop.
struct AtomicFile {
    temp: NamedTempFile,
}

impl AtomicFile {
    fn create(dest: &Path) -> io::Result<Self> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let name = dest
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let temp = tempfile::Builder::new()
            .prefix(&format!(".{name}."))
            .suffix(".tmp")
            .tempfile_in(dir)?;
        Ok(AtomicFile { temp })
    }

    fn file(&mut self) -> &mut File {
        self.temp.as_file_mut()
    }

    fn commit(self, dest: &Path) -> io::Result<()> {
        self.temp.as_file().sync_all()?;
        self.temp.persist(dest).map_err(|e| e.error)?;
        sync_parent_dir(dest);
        Ok(())
    }
}

#[cfg(unix)]
fn sync_parent_dir(path: &Path) {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        // Best effort: not every filesystem supports syncing directories.
        let _ = File::open(dir).and_then(|d| d.sync_all());
    }
}

#[cfg(not(unix))]
fn sync_parent_dir(_path: &Path) {}

/// Counts bytes pulled through a reader.
struct Counted<R> {
    inner: R,
    count: u64,
}

impl<R: Read> Read for Counted<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.count += n as u64;
        Ok(n)
    }
}

/// Encrypts exactly `len` bytes from `src` into a new container at `dest`.
///
/// A random nonce is drawn unless one is given. On error `dest` is left untouched.
pub fn encrypt_reader<R: Read>(
    src: R,
    len: u64,
    dest: &Path,
    key_source: &KeySource,
    ad: &[u8],
    nonce: Option<Nonce>,
) -> Result<()> {
    let (key, flags, salt) = match key_source {
        KeySource::Raw(k) => (k.clone(), 0, Salt::default()),
        KeySource::Passphrase {
            passphrase,
            profile,
        } => {
            let salt = generate_salt()?;
            (derive_key(passphrase, &salt, profile)?, FLAG_KEY_DERIVED, salt)
        }
    };
    let nonce = match nonce {
        Some(n) => n,
        None => Nonce::random()?,
    };
    let mut header = Header::new(flags, salt, nonce, len);
    header.header_tag = *header.compute_tag(&key, ad).as_bytes();

    let mut out = AtomicFile::create(dest)?;
    let mut w = BufWriter::with_capacity(64 * 1024, out.file());
    w.write_all(&header.to_bytes())?;

    let params = AeadParams::new(key, nonce, ad.to_vec());
    let mut body = Counted {
        inner: src.take(len),
        count: 0,
    };
    let tag = encrypt_stream(&params, &mut body, &mut w)?;
    if body.count != len {
        return Err(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("input ended after {} of {len} bytes", body.count),
        )
        .into());
    }
    w.write_all(tag.as_bytes())?;
    w.flush()?;
    drop(w);
    out.commit(dest)?;
    Ok(())
}

pub fn encrypt_file(
    in_path: &Path,
    out_path: &Path,
    key_source: &KeySource,
    ad: &[u8],
    nonce: Option<Nonce>,
) -> Result<()> {
    let f = File::open(in_path)?;
    let len = f.metadata()?.len();
    encrypt_reader(f, len, out_path, key_source, ad, nonce)
}

/// Opens a container of `total_len` bytes read from `src`, writing plaintext to `dest` only if
/// both tags verify.
///
/// The header (152 bytes) is read on its own and authenticated before a single body byte is
/// consumed.
pub fn decrypt_reader<R: Read>(
    mut src: R,
    total_len: u64,
    dest: &Path,
    key_source: &KeySource,
    ad: &[u8],
) -> Result<DecryptVerdict> {
    if total_len < HEADER_BYTES as u64 {
        return Ok(DecryptVerdict::Format(FormatError::Truncated {
            file_len: total_len,
        }));
    }
    let mut raw = [0u8; HEADER_BYTES];
    src.read_exact(&mut raw)?;
    let header = Header::from_bytes(&raw);
    if let Err(e) = header.validate() {
        return Ok(DecryptVerdict::Format(e));
    }
    if total_len < OVERHEAD {
        return Ok(DecryptVerdict::Format(FormatError::Truncated {
            file_len: total_len,
        }));
    }
    let ct_len = total_len - OVERHEAD;
    if header.ct_len != ct_len {
        return Ok(DecryptVerdict::Format(FormatError::LengthMismatch {
            header: header.ct_len,
            actual: ct_len,
        }));
    }

    let key = match (key_source, header.key_derived()) {
        (KeySource::Raw(k), false) => k.clone(),
        (KeySource::Passphrase { passphrase, profile }, true) => {
            derive_key(passphrase, &header.salt, profile)?
        }
        // A key of the wrong kind cannot authenticate this header.
        _ => return Ok(DecryptVerdict::HeaderAuthFail),
    };
    if header.compute_tag(&key, ad) != Tag::from_bytes(header.header_tag) {
        return Ok(DecryptVerdict::HeaderAuthFail);
    }

    let mut out = AtomicFile::create(dest)?;
    let params = AeadParams::new(key, header.nonce, ad.to_vec());
    let mut body = Counted {
        inner: (&mut src).take(ct_len),
        count: 0,
    };
    let mut tag = [0u8; TAG_BYTES];
    let verdict = {
        let mut w = BufWriter::with_capacity(64 * 1024, out.file());
        // The tag trails the body, so it is read only once the body is consumed.
        let mut dec = Decryptor::new(&params.key, &params.nonce, &params.ad);
        let mut buf = vec![0u8; STREAM_CHUNK];
        loop {
            let n = match body.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            };
            dec.update_in_place(&mut buf[..n]);
            w.write_all(&buf[..n])?;
        }
        buf.fill(0);
        if body.count != ct_len {
            return Err(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("ciphertext ended after {} of {ct_len} bytes", body.count),
            )
            .into());
        }
        src.read_exact(&mut tag)?;
        w.flush()?;
        dec.verify(&Tag::from_bytes(tag))
    };
    match verdict {
        Verdict::Ok => {
            out.commit(dest)?;
            Ok(DecryptVerdict::Ok)
        }
        Verdict::AuthFail => Ok(DecryptVerdict::BodyAuthFail),
    }
}

pub fn decrypt_file(
    in_path: &Path,
    out_path: &Path,
    key_source: &KeySource,
    ad: &[u8],
) -> Result<DecryptVerdict> {
    let f = File::open(in_path)?;
    let len = f.metadata()?.len();
    decrypt_reader(f, len, out_path, key_source, ad)
}

/// Reads only the header of a container file.
pub fn read_header(path: &Path) -> Result<Header> {
    let mut f = File::open(path)?;
    let mut raw = [0u8; HEADER_BYTES];
    f.read_exact(&mut raw)?;
    Ok(Header::from_bytes(&raw))
}
