//! Diffusion measurements, benchmarks and regression artifacts.

use std::fs::{self, File};
use std::hint::black_box;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::aead::Encryptor;
use crate::container::{self, DecryptVerdict, KeySource, OVERHEAD};
use crate::error::Result;
use crate::froghash;
use crate::permutation::State;
use crate::types::{Key, Nonce};
use crate::{RATE_BYTES, ROUNDS};

/// Plaintext lengths exercised by [`run_test_all`].
pub const TEST_LENGTHS: [u64; 18] = [
    0, 1, 2, 7, 8, 15, 16, 63, 64, 65, 127, 128, 129, 4096, 65536, 65549, 1_048_576, 1_048_583,
];

/// Reference numbers from the original benchmark run; hardware unknown, informational only.
pub const REFERENCE_PERM_NS: f64 = 435.1;
pub const REFERENCE_AEAD_MIB_PER_S: f64 = 131.7;

/// Hamming-distance statistics after a given number of rounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub mean: f64,
    pub min: u32,
    pub max: u32,
    pub stddev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvalancheReport {
    pub trials: usize,
    pub seed: u64,
    /// Index `r` holds the statistics after `r` rounds; row 0 is the input difference.
    pub rounds: Vec<RoundStats>,
}

impl AvalancheReport {
    pub fn round(&self, r: usize) -> &RoundStats {
        &self.rounds[r]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("round,mean,min,max,stddev\n");
        for r in &self.rounds {
            s.push_str(&format!(
                "{},{:.3},{},{},{:.3}\n",
                r.round, r.mean, r.min, r.max, r.stddev
            ));
        }
        s
    }
}

/// Flips one random bit of a random state and tracks how far the two copies drift apart
/// under 1..=`max_rounds` rounds.
///
/// Trial `t` draws from ChaCha stream `t` of `seed`, so results do not depend on how the
/// trials are scheduled.
pub fn run_avalanche(trials: usize, max_rounds: usize, seed: u64) -> AvalancheReport {
    assert!(trials >= 1, "need at least one trial");
    assert!(max_rounds <= ROUNDS);
    let mut distances = vec![Vec::with_capacity(trials); max_rounds + 1];
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut a = State(rng.gen());
        let mut b = a;
        let bit = rng.gen_range(0..1024);
        b.0[bit / 64] ^= 1 << (bit % 64);
        distances[0].push(a.hamming_distance(&b));
        for (r, row) in crate::permutation::round_constants()[..max_rounds]
            .iter()
            .enumerate()
        {
            crate::permutation::apply_round(&mut a, row);
            crate::permutation::apply_round(&mut b, row);
            distances[r + 1].push(a.hamming_distance(&b));
        }
    }
    let rounds = distances
        .iter()
        .enumerate()
        .map(|(round, d)| {
            let n = d.len() as f64;
            let mean = d.iter().map(|&x| f64::from(x)).sum::<f64>() / n;
            let var = d.iter().map(|&x| (f64::from(x) - mean).powi(2)).sum::<f64>() / n;
            RoundStats {
                round,
                mean,
                min: *d.iter().min().unwrap(),
                max: *d.iter().max().unwrap(),
                stddev: var.sqrt(),
            }
        })
        .collect();
    AvalancheReport {
        trials,
        seed,
        rounds,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub perm_iters: u64,
    pub buffer_bytes: usize,
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            perm_iters: 200_000,
            buffer_bytes: 64 << 20,
            repetitions: 5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub perm_ns_per_call: f64,
    pub perm_iters: u64,
    pub aead_mib_per_s: f64,
    pub buffer_mib: f64,
    pub repetitions: usize,
    pub reference_perm_ns: f64,
    pub reference_aead_mib_per_s: f64,
}

impl BenchReport {
    /// Throughput implied by one permutation per 64-byte block.
    pub fn predicted_mib_per_s(&self) -> f64 {
        RATE_BYTES as f64 / (self.perm_ns_per_call * 1e-9) / (1024.0 * 1024.0)
    }

    /// Measured throughput within a factor of three of the prediction.
    pub fn throughput_consistent(&self) -> bool {
        let ratio = self.aead_mib_per_s / self.predicted_mib_per_s();
        (1.0 / 3.0..=3.0).contains(&ratio)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Times the permutation on a live state and the in-memory AEAD encrypt path.
///
/// Each figure is the median over `repetitions` timed runs after one warm-up run.
pub fn run_benchmark(cfg: &BenchConfig) -> BenchReport {
    assert!(cfg.perm_iters > 0 && cfg.buffer_bytes > 0 && cfg.repetitions > 0);

    let mut state = State::from_bytes(&std::array::from_fn(|i| i as u8));
    let mut time_perm = || {
        let start = Instant::now();
        for _ in 0..cfg.perm_iters {
            state.permute();
            black_box(&mut state);
        }
        start.elapsed().as_nanos() as f64 / cfg.perm_iters as f64
    };
    time_perm();
    let perm_ns = median((0..cfg.repetitions).map(|_| time_perm()).collect());

    let key = Key::from_bytes(std::array::from_fn(|i| i as u8));
    let nonce = Nonce::from_bytes(std::array::from_fn(|i| i as u8));
    let mut buf = vec![0x5Au8; cfg.buffer_bytes];
    let mut time_aead = || {
        let start = Instant::now();
        let mut enc = Encryptor::new(&key, &nonce, b"");
        enc.update_in_place(black_box(&mut buf));
        black_box(enc.finalize());
        let secs = start.elapsed().as_secs_f64();
        cfg.buffer_bytes as f64 / (1024.0 * 1024.0) / secs
    };
    time_aead();
    let mib_s = median((0..cfg.repetitions).map(|_| time_aead()).collect());

    BenchReport {
        perm_ns_per_call: perm_ns,
        perm_iters: cfg.perm_iters,
        aead_mib_per_s: mib_s,
        buffer_mib: cfg.buffer_bytes as f64 / (1024.0 * 1024.0),
        repetitions: cfg.repetitions,
        reference_perm_ns: REFERENCE_PERM_NS,
        reference_aead_mib_per_s: REFERENCE_AEAD_MIB_PER_S,
    }
}

/// Key used by [`run_test_all`]: bytes `00 01 .. 7f`.
pub fn test_all_key() -> Key {
    Key::from_bytes(std::array::from_fn(|i| i as u8))
}

/// Nonce used by [`run_test_all`]: bytes `00 01 .. 1f`.
pub fn test_all_nonce() -> Nonce {
    Nonce::from_bytes(std::array::from_fn(|i| i as u8))
}

/// Deterministic plaintext of `len` bytes: FrogHash-512 of `LE64(len)`, squeezed to `len`.
pub fn test_plaintext(len: u64) -> Vec<u8> {
    if len == 0 {
        return Vec::new();
    }
    froghash::hash_extended(&len.to_le_bytes()[..], len as usize).expect("in-memory read")
}

#[derive(Clone, Debug, Serialize)]
pub struct TestAllEntry {
    pub len: u64,
    pub input_sha256: String,
    pub enc_sha256: String,
    pub dec_sha256: String,
    pub enc_size: u64,
    pub roundtrip_ok: bool,
    pub size_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestAllReport {
    pub out_dir: PathBuf,
    pub entries: Vec<TestAllEntry>,
    /// Lengths whose roundtrip or size check failed.
    pub failures: Vec<u64>,
}

impl TestAllReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut h = Sha256::new();
    io::copy(&mut File::open(path)?, &mut h)?;
    Ok(hex_lower(&h.finalize()))
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Name of the checksum manifest written by [`run_test_all`].
pub const MANIFEST_NAME: &str = "SHA256SUMS";

/// Writes `in_L.bin`, `enc_L.syf` and `dec_L.bin` for every length in [`TEST_LENGTHS`]
/// using the fixed test key and nonce, checks the roundtrip and the `L + 184` size law, and
/// writes a `sha256  filename` manifest.
pub fn run_test_all(out_dir: &Path) -> Result<TestAllReport> {
    fs::create_dir_all(out_dir)?;
    let ks = KeySource::Raw(test_all_key());
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut manifest = String::new();

    for &len in &TEST_LENGTHS {
        let input = out_dir.join(format!("in_{len}.bin"));
        let enc = out_dir.join(format!("enc_{len}.syf"));
        let dec = out_dir.join(format!("dec_{len}.bin"));
        fs::write(&input, test_plaintext(len))?;
        container::encrypt_file(&input, &enc, &ks, b"", Some(test_all_nonce()))?;
        let verdict = container::decrypt_file(&enc, &dec, &ks, b"")?;

        let enc_size = fs::metadata(&enc)?.len();
        let roundtrip_ok = verdict == DecryptVerdict::Ok && fs::read(&input)? == fs::read(&dec)?;
        let size_ok = enc_size == len + OVERHEAD;
        if !(roundtrip_ok && size_ok) {
            failures.push(len);
        }
        let entry = TestAllEntry {
            len,
            input_sha256: sha256_file(&input)?,
            enc_sha256: sha256_file(&enc)?,
            dec_sha256: if dec.exists() { sha256_file(&dec)? } else { String::new() },
            enc_size,
            roundtrip_ok,
            size_ok,
        };
        for (sum, path) in [
            (&entry.input_sha256, &input),
            (&entry.enc_sha256, &enc),
            (&entry.dec_sha256, &dec),
        ] {
            if !sum.is_empty() {
                let name = path.file_name().unwrap().to_string_lossy();
                manifest.push_str(&format!("{sum}  {name}\n"));
            }
        }
        entries.push(entry);
    }

    let mut f = File::create(out_dir.join(MANIFEST_NAME))?;
    f.write_all(manifest.as_bytes())?;
    f.sync_all()?;

    Ok(TestAllReport {
        out_dir: out_dir.to_path_buf(),
        entries,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avalanche_round_zero_is_one_bit() {
        let r = run_avalanche(50, 3, 7);
        assert_eq!(r.rounds.len(), 4);
        let r0 = r.round(0);
        assert_eq!((r0.min, r0.max), (1, 1));
        assert_eq!(r0.mean, 1.0);
        assert_eq!(r0.stddev, 0.0);
    }

    #[test]
    fn avalanche_is_seed_deterministic() {
        assert_eq!(run_avalanche(20, 6, 99), run_avalanche(20, 6, 99));
        assert_ne!(run_avalanche(20, 6, 99), run_avalanche(20, 6, 100));
    }

    #[test]
    fn avalanche_stats_are_ordered() {
        let r = run_avalanche(100, ROUNDS, 1);
        for s in &r.rounds {
            assert!(f64::from(s.min) <= s.mean && s.mean <= f64::from(s.max));
            assert!(s.max <= 1024);
        }
        assert!(r.round(1).mean < r.round(4).mean);
    }

    #[test]
    fn avalanche_csv_shape() {
        let csv = run_avalanche(5, 2, 0).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "round,mean,min,max,stddev");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1.000,1,1,"));
    }

    #[test]
    fn small_benchmark_runs() {
        let cfg = BenchConfig {
            perm_iters: 1000,
            buffer_bytes: 1 << 16,
            repetitions: 3,
        };
        let r = run_benchmark(&cfg);
        assert_eq!(r.perm_iters, 1000);
        assert!(r.perm_ns_per_call.is_finite() && r.perm_ns_per_call > 0.0);
        assert!(r.aead_mib_per_s.is_finite() && r.aead_mib_per_s > 0.0);
        assert_eq!(r.buffer_mib, 1.0 / 16.0);
    }

    #[test]
    fn predicted_throughput_arithmetic() {
        let r = BenchReport {
            perm_ns_per_call: 64.0 * 1e9 / (1024.0 * 1024.0) / 100.0,
            perm_iters: 1,
            aead_mib_per_s: 100.0,
            buffer_mib: 64.0,
            repetitions: 1,
            reference_perm_ns: REFERENCE_PERM_NS,
            reference_aead_mib_per_s: REFERENCE_AEAD_MIB_PER_S,
        };
        assert!((r.predicted_mib_per_s() - 100.0).abs() < 1e-9);
        assert!(r.throughput_consistent());
    }

    #[test]
    fn test_plaintexts_are_deterministic() {
        assert!(test_plaintext(0).is_empty());
        assert_eq!(test_plaintext(65).len(), 65);
        assert_eq!(test_plaintext(65), test_plaintext(65));
        assert_ne!(test_plaintext(64)[..], test_plaintext(65)[..64]);
    }
}
