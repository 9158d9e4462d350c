//! FrogHash-512: an unkeyed sponge over `P1024-v2`.
//!
//! The domain string is XORed into the first capacity bytes of a zero state, which is then
//! permuted once. Input is absorbed 64 bytes at a time without domain bytes, always closing
//! with a padded block, and the digest is one pass of the output transform.

use std::io::{self, Read};

use crate::duplex::{absorb_block, absorb_tail, output_block};
use crate::permutation::State;
use crate::RATE_BYTES;

const HASH_DOMAIN: &[u8] = b"SYMFROG-HASH-v1";

pub const DIGEST_BYTES: usize = 64;

pub type Digest512 = [u8; DIGEST_BYTES];

/// Incremental FrogHash-512.
#[derive(Clone, Debug)]
pub struct FrogHash {
    state: State,
    buf: [u8; RATE_BYTES],
    pos: usize,
}

impl Default for FrogHash {
    fn default() -> Self {
        Self::new()
    }
}

impl FrogHash {
    pub fn new() -> Self {
        let mut state = State::zero();
        for (i, &b) in HASH_DOMAIN.iter().enumerate() {
            state.xor_byte(RATE_BYTES + i, b);
        }
        state.permute();
        FrogHash {
            state,
            buf: [0; RATE_BYTES],
            pos: 0,
        }
    }

    pub fn update(&mut self, mut data: &[u8]) {
        if self.pos > 0 {
            let n = (RATE_BYTES - self.pos).min(data.len());
            self.buf[self.pos..self.pos + n].copy_from_slice(&data[..n]);
            self.pos += n;
            data = &data[n..];
            if self.pos < RATE_BYTES {
                return;
            }
            absorb_block(&mut self.state, &self.buf, None);
            self.pos = 0;
        }
        let mut blocks = data.chunks_exact(RATE_BYTES);
        for block in &mut blocks {
            absorb_block(&mut self.state, block, None);
        }
        let rest = blocks.remainder();
        self.buf[..rest.len()].copy_from_slice(rest);
        self.pos = rest.len();
    }

    fn close(mut self) -> State {
        absorb_tail(&mut self.state, &self.buf[..self.pos], None);
        self.state
    }

    pub fn finalize(self) -> Digest512 {
        output_block(&self.close())
    }

    /// Squeezes `out_len` bytes; each block after the first is preceded by a permutation.
    pub fn finalize_extended(self, out_len: usize) -> Vec<u8> {
        let mut state = self.close();
        let mut out = Vec::with_capacity(out_len.next_multiple_of(RATE_BYTES));
        out.extend_from_slice(&output_block(&state));
        while out.len() < out_len {
            state.permute();
            out.extend_from_slice(&output_block(&state));
        }
        out.truncate(out_len);
        out
    }
}

fn absorb_reader(mut src: impl Read) -> io::Result<FrogHash> {
    let mut h = FrogHash::new();
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        match src.read(&mut buf) {
            Ok(0) => return Ok(h),
            Ok(n) => h.update(&buf[..n]),
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
}

/// Hashes everything `src` yields.
pub fn hash(src: impl Read) -> io::Result<Digest512> {
    Ok(absorb_reader(src)?.finalize())
}

pub fn hash_extended(src: impl Read, out_len: usize) -> io::Result<Vec<u8>> {
    Ok(absorb_reader(src)?.finalize_extended(out_len))
}

pub fn hash_bytes(data: &[u8]) -> Digest512 {
    let mut h = FrogHash::new();
    h.update(data);
    h.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::permutation_calls;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Frozen from an independent straight-line reimplementation.
    const EMPTY: &str = "0a1bcb857d35ed18d41d20f7a12dd02118235c5ee5a02c610c31f94de2942538\
                         0f8acf92dafe670170ed3857f01048f70537f62fc326ddfdfef098e346631ce5";
    const ABC_100: &str = "226e3fc061714dff08df873c15480b70db8ef9c983f0bba09eaaa74d901ea46a\
                           bb170d049bdca0a643692a8bd6a9df61dd97dd3d7b985fa36ac20c45b6f0ac0e\
                           4283cbdcde72bffa49c1ef13e3486029a001cd9bae918a71be91cdbf372951ae\
                           0940b91c";

    #[test]
    fn known_answers() {
        assert_eq!(hex::encode(hash_bytes(b"")), EMPTY);
        assert_eq!(hex::encode(hash_extended(&b"abc"[..], 100).unwrap()), ABC_100);
        assert_eq!(hex::encode(hash_bytes(b"abc")), ABC_100[..128]);
    }

    #[test]
    fn empty_input_uses_two_permutations() {
        let before = permutation_calls();
        let a = hash_bytes(b"");
        assert_eq!(permutation_calls() - before, 2);
        assert_eq!(a, hash_bytes(b""));
    }

    #[test]
    fn padding_blocks_trailing_zero_extension() {
        let block = [0x42u8; 64];
        let mut longer = block.to_vec();
        longer.push(0);
        assert_ne!(hash_bytes(&block), hash_bytes(&longer));
    }

    #[test]
    fn avalanche() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..100 {
            let len = rng.gen_range(1..200);
            let mut data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let a = hash_bytes(&data);
            let bit = rng.gen_range(0..len * 8);
            data[bit / 8] ^= 1 << (bit % 8);
            let b = hash_bytes(&data);
            let d: u32 = a.iter().zip(&b).map(|(x, y)| (x ^ y).count_ones()).sum();
            assert!(d >= 128, "only {d} digest bits flipped");
        }
    }

    #[test]
    fn extended_prefix_consistency() {
        let d = hash_bytes(b"frog");
        assert_eq!(hash_extended(&b"frog"[..], 64).unwrap(), d);
        assert_eq!(hash_extended(&b"frog"[..], 65).unwrap()[..64], d);
        assert_eq!(hash_extended(&b"frog"[..], 1).unwrap(), d[..1]);
    }

    #[test]
    fn byte_at_a_time_matches_one_shot() {
        let data: Vec<u8> = (0..300u32).map(|i| (i * 31) as u8).collect();
        let mut h = FrogHash::new();
        for b in &data {
            h.update(std::slice::from_ref(b));
        }
        assert_eq!(h.finalize(), hash_bytes(&data));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_point_invariance(data in proptest::collection::vec(any::<u8>(), 0..400), cut in 0usize..400) {
                let cut = cut.min(data.len());
                let mut h = FrogHash::new();
                h.update(&data[..cut]);
                h.update(&data[cut..]);
                prop_assert_eq!(h.finalize(), hash_bytes(&data));
            }

            #[test]
            fn extended_prefix(data in proptest::collection::vec(any::<u8>(), 0..100), n in 1usize..300) {
                let full = hash_bytes(&data);
                let ext = hash_extended(&data[..], n).unwrap();
                prop_assert_eq!(ext.len(), n);
                let m = n.min(64);
                prop_assert_eq!(&ext[..m], &full[..m]);
            }
        }
    }
}
