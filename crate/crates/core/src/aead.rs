//! Streaming AEAD over the keyed duplex.
//!
//! Each 64-byte block is encrypted with the current output block as keystream, and the
//! *ciphertext* is absorbed back into the rate, so encryption and decryption run the same
//! transcript. The final (possibly empty) tail is absorbed with padding before the tag.

use std::io::{self, Read, Write};

use crate::duplex::{DomainByte, Duplex, OutputBlock};
use crate::types::{Key, Nonce, Tag};
use crate::RATE_BYTES;

/// I/O buffer used by the stream helpers.
pub const STREAM_CHUNK: usize = 64 * 1024;

/// Key, nonce and associated data for one AEAD session.
#[derive(Clone, Debug)]
pub struct AeadParams {
    pub key: Key,
    pub nonce: Nonce,
    pub ad: Vec<u8>,
}

impl AeadParams {
    pub fn new(key: Key, nonce: Nonce, ad: impl Into<Vec<u8>>) -> Self {
        AeadParams {
            key,
            nonce,
            ad: ad.into(),
        }
    }
}

/// Outcome of tag verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub enum Verdict {
    Ok,
    AuthFail,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Encrypt,
    Decrypt,
}

/// Shared block machinery: `block` accumulates ciphertext of the current block.
#[derive(Clone)]
struct Stream {
    duplex: Duplex,
    keystream: OutputBlock,
    block: [u8; RATE_BYTES],
    pos: usize,
}

impl Stream {
    fn new(key: &Key, nonce: &Nonce, ad: &[u8]) -> Self {
        let mut duplex = Duplex::new(key, nonce);
        duplex
            .absorb(DomainByte::AssociatedData, ad)
            .expect("fresh duplex accepts AD");
        let keystream = duplex.output_block();
        Stream {
            duplex,
            keystream,
            block: [0; RATE_BYTES],
            pos: 0,
        }
    }

    fn absorb_full_block(&mut self) {
        self.duplex
            .absorb_ciphertext_block(&self.block)
            .expect("body still open");
        self.keystream = self.duplex.output_block();
        self.pos = 0;
    }

    fn process(&mut self, dir: Direction, mut buf: &mut [u8]) {
        while !buf.is_empty() {
            if self.pos == 0 && buf.len() >= RATE_BYTES {
                let (block, rest) = std::mem::take(&mut buf).split_at_mut(RATE_BYTES);
                if dir == Direction::Decrypt {
                    self.block.copy_from_slice(block);
                }
                for (b, z) in block.iter_mut().zip(&self.keystream) {
                    *b ^= z;
                }
                if dir == Direction::Encrypt {
                    self.block.copy_from_slice(block);
                }
                self.absorb_full_block();
                buf = rest;
                continue;
            }
            let n = (RATE_BYTES - self.pos).min(buf.len());
            let (head, rest) = std::mem::take(&mut buf).split_at_mut(n);
            for (i, b) in head.iter_mut().enumerate() {
                let input = *b;
                *b ^= self.keystream[self.pos + i];
                self.block[self.pos + i] = match dir {
                    Direction::Encrypt => *b,
                    Direction::Decrypt => input,
                };
            }
            self.pos += n;
            buf = rest;
            if self.pos == RATE_BYTES {
                self.absorb_full_block();
            }
        }
    }

    fn finish(mut self) -> Tag {
        self.duplex
            .absorb_ciphertext_tail(&self.block[..self.pos])
            .expect("body still open");
        self.duplex
            .finalize_tag(DomainByte::Tag)
            .expect("body closed")
    }
}

/// Incremental encryption. Feed any chunking; the result is independent of it.
#[derive(Clone)]
pub struct Encryptor(Stream);

impl std::fmt::Debug for Encryptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Encryptor").finish_non_exhaustive()
    }
}

impl Encryptor {
    pub fn new(key: &Key, nonce: &Nonce, ad: &[u8]) -> Self {
        Encryptor(Stream::new(key, nonce, ad))
    }

    /// Encrypts `plaintext` into `ciphertext`, which must have the same length.
    pub fn update(&mut self, plaintext: &[u8], ciphertext: &mut [u8]) {
        ciphertext.copy_from_slice(plaintext);
        self.0.process(Direction::Encrypt, ciphertext);
    }

    pub fn update_in_place(&mut self, buf: &mut [u8]) {
        self.0.process(Direction::Encrypt, buf);
    }

    pub fn finalize(self) -> Tag {
        self.0.finish()
    }
}

/// Incremental decryption. Plaintext is released before the tag is checked; callers must
/// discard it unless [`Decryptor::verify`] returns [`Verdict::Ok`].
#[derive(Clone)]
pub struct Decryptor(Stream);

impl std::fmt::Debug for Decryptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Decryptor").finish_non_exhaustive()
    }
}

impl Decryptor {
    pub fn new(key: &Key, nonce: &Nonce, ad: &[u8]) -> Self {
        Decryptor(Stream::new(key, nonce, ad))
    }

    pub fn update(&mut self, ciphertext: &[u8], plaintext: &mut [u8]) {
        plaintext.copy_from_slice(ciphertext);
        self.0.process(Direction::Decrypt, plaintext);
    }

    pub fn update_in_place(&mut self, buf: &mut [u8]) {
        self.0.process(Direction::Decrypt, buf);
    }

    /// Recomputes the tag and compares it in constant time.
    pub fn verify(self, expected: &Tag) -> Verdict {
        if self.0.finish() == *expected {
            Verdict::Ok
        } else {
            Verdict::AuthFail
        }
    }
}

fn read_full(src: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match src.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Encrypts everything `plaintext` yields into `ciphertext` and returns the tag.
pub fn encrypt_stream<R: Read, W: Write>(
    params: &AeadParams,
    mut plaintext: R,
    mut ciphertext: W,
) -> io::Result<Tag> {
    let mut enc = Encryptor::new(&params.key, &params.nonce, &params.ad);
    let mut buf = vec![0u8; STREAM_CHUNK];
    loop {
        let n = read_full(&mut plaintext, &mut buf)?;
        if n == 0 {
            break;
        }
        enc.update_in_place(&mut buf[..n]);
        ciphertext.write_all(&buf[..n])?;
    }
    ciphertext.flush()?;
    Ok(enc.finalize())
}

/// Decrypts everything `ciphertext` yields into `plaintext` and checks `expected_tag`.
///
/// On [`Verdict::AuthFail`] whatever was written to `plaintext` must be discarded.
pub fn decrypt_stream<R: Read, W: Write>(
    params: &AeadParams,
    mut ciphertext: R,
    expected_tag: &Tag,
    mut plaintext: W,
) -> io::Result<Verdict> {
    let mut dec = Decryptor::new(&params.key, &params.nonce, &params.ad);
    let mut buf = vec![0u8; STREAM_CHUNK];
    loop {
        let n = read_full(&mut ciphertext, &mut buf)?;
        if n == 0 {
            break;
        }
        dec.update_in_place(&mut buf[..n]);
        plaintext.write_all(&buf[..n])?;
    }
    plaintext.flush()?;
    Ok(dec.verify(expected_tag))
}

/// One-shot encryption.
pub fn seal(key: &Key, nonce: &Nonce, ad: &[u8], plaintext: &[u8]) -> (Vec<u8>, Tag) {
    let mut enc = Encryptor::new(key, nonce, ad);
    let mut ct = vec![0u8; plaintext.len()];
    enc.update(plaintext, &mut ct);
    (ct, enc.finalize())
}

/// One-shot decryption; `None` if the tag does not verify.
pub fn open(key: &Key, nonce: &Nonce, ad: &[u8], ciphertext: &[u8], tag: &Tag) -> Option<Vec<u8>> {
    let mut dec = Decryptor::new(key, nonce, ad);
    let mut pt = vec![0u8; ciphertext.len()];
    dec.update(ciphertext, &mut pt);
    match dec.verify(tag) {
        Verdict::Ok => Some(pt),
        Verdict::AuthFail => {
            pt.fill(0);
            None
        }
    }
}

/// Checks the stream-cipher structure for a `len`-byte random-looking plaintext: encrypting
/// zeros yields the raw keystream, so `E(P) ^ E(0)` equals `P` on the first block only.
/// Later blocks diverge because ciphertext, not plaintext, is absorbed.
pub fn keystream_xor_identity_check(params: &AeadParams, plaintext: &[u8]) -> bool {
    let (c_p, _) = seal(&params.key, &params.nonce, &params.ad, plaintext);
    let (c_0, _) = seal(&params.key, &params.nonce, &params.ad, &vec![0u8; plaintext.len()]);
    let xored: Vec<u8> = c_p.iter().zip(&c_0).map(|(a, b)| a ^ b).collect();
    let first = plaintext.len().min(RATE_BYTES);
    if xored[..first] != plaintext[..first] {
        return false;
    }
    if plaintext.len() > RATE_BYTES {
        // Block 1 onwards depends on block 0's ciphertext; the identity must break.
        return xored[RATE_BYTES..] != plaintext[RATE_BYTES..];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::permutation_calls;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_key() -> Key {
        Key::from_bytes(std::array::from_fn(|i| i as u8))
    }

    fn test_nonce() -> Nonce {
        Nonce::from_bytes(std::array::from_fn(|i| i as u8))
    }

    fn pattern(len: usize) -> Vec<u8> {
        (0..len).map(|i| (i * 7 + 3) as u8).collect()
    }

    fn unhex(s: &str) -> Vec<u8> {
        hex::decode(s).unwrap()
    }

    // Frozen from an independent straight-line reimplementation (AD = "Header").
    #[test]
    fn known_answers() {
        let cases: [(usize, &str, &str); 4] = [
            (0, "", "c0087850acf04b3a34f8737cf0b1597292a4cf3f48d884c71a229ddef5952e8e"),
            (1, "8c", "4985e5520078a2862d64dedd24c114d01f3a4d330fbcb98475c58fd24240509b"),
            (
                64,
                "8c1f4f5ecfd0d40127b396d451b35f268840ca5a5fccbcae5a389a4a240d9c9d\
                 ad431650dc24871f4776a38d578b2f47088bb8ff56d7b4abe288a2e1e5c72b8c",
                "b327479514bd7de40a1dc7df98f5a2051307a3db4bc210be43d49f6d1c3a6b1f",
            ),
            (
                65,
                "8c1f4f5ecfd0d40127b396d451b35f268840ca5a5fccbcae5a389a4a240d9c9d\
                 ad431650dc24871f4776a38d578b2f47088bb8ff56d7b4abe288a2e1e5c72b8c82",
                "c69479bc5db48bc50ec89710a537121e2243ee369ab3ce70812821b8b6d9b34a",
            ),
        ];
        for (len, ct, tag) in cases {
            let (c, t) = seal(&test_key(), &test_nonce(), b"Header", &pattern(len));
            assert_eq!(c, unhex(ct), "ciphertext, len {len}");
            assert_eq!(t.as_bytes().to_vec(), unhex(tag), "tag, len {len}");
        }
    }

    #[test]
    fn empty_plaintext_uses_four_permutations() {
        let before = permutation_calls();
        let (c, t) = seal(&test_key(), &test_nonce(), b"", b"");
        assert_eq!(permutation_calls() - before, 4);
        assert!(c.is_empty());
        assert_eq!(t.as_bytes().len(), 32);
    }

    #[test]
    fn length_is_preserved() {
        for len in [0, 1, 63, 64, 65, 128] {
            let (c, _) = seal(&test_key(), &test_nonce(), b"", &pattern(len));
            assert_eq!(c.len(), len);
        }
    }

    #[test]
    fn deterministic() {
        let a = seal(&test_key(), &test_nonce(), b"x", &pattern(100));
        let b = seal(&test_key(), &test_nonce(), b"x", &pattern(100));
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn chunking_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let pt: Vec<u8> = (0..1000).map(|_| rng.gen()).collect();
        let (whole, tag) = seal(&test_key(), &test_nonce(), b"ad", &pt);
        for _ in 0..20 {
            let mut enc = Encryptor::new(&test_key(), &test_nonce(), b"ad");
            let mut out = vec![0u8; pt.len()];
            let mut off = 0;
            while off < pt.len() {
                let n = rng.gen_range(1..=150).min(pt.len() - off);
                enc.update(&pt[off..off + n], &mut out[off..off + n]);
                off += n;
            }
            assert_eq!(out, whole);
            assert_eq!(enc.finalize(), tag);
        }
    }

    #[test]
    fn stream_roundtrip() {
        let params = AeadParams::new(test_key(), test_nonce(), b"Header".to_vec());
        for len in [0usize, 1, 63, 64, 65, 4096, STREAM_CHUNK + 13] {
            let pt = pattern(len);
            let mut ct = Vec::new();
            let tag = encrypt_stream(&params, &pt[..], &mut ct).unwrap();
            let mut back = Vec::new();
            let v = decrypt_stream(&params, &ct[..], &tag, &mut back).unwrap();
            assert_eq!(v, Verdict::Ok);
            assert_eq!(back, pt);
        }
    }

    #[test]
    fn tamper_every_bit_of_short_message() {
        let pt = b"abc";
        let ad = b"ad!";
        let (ct, tag) = seal(&test_key(), &test_nonce(), ad, pt);
        for bit in 0..24 {
            let mut c = ct.clone();
            c[bit / 8] ^= 1 << (bit % 8);
            assert!(open(&test_key(), &test_nonce(), ad, &c, &tag).is_none());
            let mut a = ad.to_vec();
            a[bit / 8] ^= 1 << (bit % 8);
            assert!(open(&test_key(), &test_nonce(), &a, &ct, &tag).is_none());
        }
        for bit in 0..256 {
            let mut t = *tag.as_bytes();
            t[bit / 8] ^= 1 << (bit % 8);
            assert!(open(&test_key(), &test_nonce(), ad, &ct, &Tag::from_bytes(t)).is_none());
        }
    }

    #[test]
    fn tamper_sampled_bits_of_long_message() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pt = pattern(1000);
        let (ct, tag) = seal(&test_key(), &test_nonce(), b"", &pt);
        for _ in 0..64 {
            let bit = rng.gen_range(0..ct.len() * 8);
            let mut c = ct.clone();
            c[bit / 8] ^= 1 << (bit % 8);
            assert!(open(&test_key(), &test_nonce(), b"", &c, &tag).is_none());
        }
    }

    #[test]
    fn wrong_key_fails() {
        let (ct, tag) = seal(&test_key(), &test_nonce(), b"", b"secret");
        let mut k = *test_key().as_bytes();
        k[77] ^= 0x10;
        assert!(open(&Key::from_bytes(k), &test_nonce(), b"", &ct, &tag).is_none());
    }

    #[test]
    fn nonce_sensitivity() {
        let pt = pattern(64);
        let (a, _) = seal(&test_key(), &test_nonce(), b"", &pt);
        let mut n = *test_nonce().as_bytes();
        n[0] ^= 1;
        let (b, _) = seal(&test_key(), &Nonce::from_bytes(n), b"", &pt);
        let diff: u32 = a.iter().zip(&b).map(|(x, y)| (x ^ y).count_ones()).sum();
        assert!(diff >= 1);
        assert!((150..=362).contains(&diff), "{diff} of 512 bits differ");
    }

    #[test]
    fn nonce_reuse_leaks_plaintext_xor() {
        let p1 = pattern(64);
        let p2: Vec<u8> = (0..64).map(|i| (i * 13) as u8 ^ 0x5A).collect();
        let (c1, _) = seal(&test_key(), &test_nonce(), b"", &p1);
        let (c2, _) = seal(&test_key(), &test_nonce(), b"", &p2);
        let cx: Vec<u8> = c1.iter().zip(&c2).map(|(a, b)| a ^ b).collect();
        let px: Vec<u8> = p1.iter().zip(&p2).map(|(a, b)| a ^ b).collect();
        assert_eq!(cx, px);
    }

    #[test]
    fn keystream_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let params = AeadParams::new(
            Key::from_bytes(std::array::from_fn(|_| rng.gen())),
            test_nonce(),
            Vec::new(),
        );
        assert!(keystream_xor_identity_check(&params, &[]));
        let short: Vec<u8> = (0..40).map(|_| rng.gen()).collect();
        assert!(keystream_xor_identity_check(&params, &short));
        let long: Vec<u8> = (0..128).map(|_| rng.gen()).collect();
        assert!(keystream_xor_identity_check(&params, &long));
    }
}
