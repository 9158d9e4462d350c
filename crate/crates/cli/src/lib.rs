//! Argument parsing and command dispatch for the `symfrog512` binary.
//!
//! Exit codes: 0 success, 1 file rejected (authentication or format), 2 usage,
//! 3 I/O, 4 key derivation or randomness.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use symfrog::container::{self, DecryptVerdict, KeySource};
use symfrog::diagnostics::{self, BenchConfig};
use symfrog::kdf::KdfProfile;
use symfrog::{froghash, Error, Key, Nonce, KEY_BYTES, NONCE_BYTES};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_KDF: u8 = 4;

/// Setting this to `1` disables progress messages on stderr.
pub const NO_PROGRESS_ENV: &str = "SYMFROG_NO_PROGRESS";

#[derive(Parser, Debug)]
#[command(
    name = "symfrog512",
    version,
    about = "SymFrog-512 authenticated file encryption and FrogHash-512",
    args_conflicts_with_subcommands = true,
    arg_required_else_help = true,
    after_help = "Notes:\n  \
        --paranoid uses Argon2id SENSITIVE limits (slow, huge memory). Default is MODERATE.\n  \
        --quiet (or -q) suppresses non-error output.\n  \
        --ad is Additional Authenticated Data in hex (binds header + ciphertext).\n  \
        --nonce-hex is optional; if omitted, a random 256-bit nonce is generated.\n  \
        --pass - prompts for the passphrase instead of taking it from the command line.\n\n\
        Examples:\n  \
        symfrog512 enc secret.txt secret.syf --pass 'mypw' --ad 486561646572\n  \
        symfrog512 dec secret.syf secret.txt --pass 'mypw' --ad 486561646572\n  \
        symfrog512 hash secret.txt"
)]
#[command(group(ArgGroup::new("mode").args(["test_all", "benchmark", "avalanche"])))]
struct Cli {
    /// Write and verify the regression artifacts for every test length
    #[arg(long)]
    test_all: bool,

    /// Directory for --test-all artifacts
    #[arg(long, value_name = "DIR", default_value = "test_vectors", requires = "test_all")]
    out_dir: PathBuf,

    /// Time the permutation and the in-memory AEAD encrypt path
    #[arg(long)]
    benchmark: bool,

    /// Print the per-round avalanche table as CSV
    #[arg(long)]
    avalanche: bool,

    #[arg(long, default_value_t = 400, requires = "avalanche")]
    trials: usize,

    #[arg(long, default_value_t = 0x5EED, requires = "avalanche")]
    seed: u64,

    #[arg(short, long)]
    quiet: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encrypt a file
    Enc(EncArgs),
    /// Decrypt a file
    Dec(DecArgs),
    /// Hash a file with FrogHash-512
    Hash(HashArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("key").required(true).args(["pass", "key_hex"])))]
struct KeyArgs {
    /// Passphrase; `-` prompts for it
    #[arg(long, value_name = "PW")]
    pass: Option<Secret>,

    /// Raw 1024-bit key as 256 hex characters
    #[arg(long, value_name = "HEX1024", value_parser = parse_key_hex)]
    key_hex: Option<KeyHex>,

    /// Associated data in hex
    #[arg(long, value_name = "HEX", value_parser = parse_hex, default_value = "")]
    ad: HexBytes,

    /// Use the Argon2id SENSITIVE profile
    #[arg(long)]
    paranoid: bool,

    #[arg(short, long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct EncArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    key: KeyArgs,
    /// 256-bit nonce as 64 hex characters
    #[arg(long, value_name = "HEX256", value_parser = parse_nonce_hex)]
    nonce_hex: Option<Nonce>,
}

#[derive(Args, Debug)]
struct DecArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    key: KeyArgs,
}

#[derive(Args, Debug)]
struct HashArgs {
    input: PathBuf,
    /// Also write `hex  filename` to this file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(short, long)]
    quiet: bool,
}

/// A passphrase that never shows up in debug output.
#[derive(Clone)]
pub struct Secret(String);

impl Secret {
    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(<redacted>)")
    }
}

impl std::str::FromStr for Secret {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Secret(s.to_owned()))
    }
}

#[derive(Clone, Debug)]
struct KeyHex(Key);

#[derive(Clone, Debug, Default)]
struct HexBytes(Vec<u8>);

fn decode_hex(s: &str) -> Result<Vec<u8>, String> {
    if s.len() % 2 != 0 {
        return Err(format!("odd number of hex digits ({})", s.len()));
    }
    hex::decode(s).map_err(|e| e.to_string())
}

fn parse_hex(s: &str) -> Result<HexBytes, String> {
    decode_hex(s).map(HexBytes)
}

fn parse_key_hex(s: &str) -> Result<KeyHex, String> {
    if s.len() != 2 * KEY_BYTES {
        return Err(format!("expected {} hex digits, got {}", 2 * KEY_BYTES, s.len()));
    }
    let bytes = decode_hex(s)?;
    Key::from_slice(&bytes).map(KeyHex).map_err(|e| e.to_string())
}

fn parse_nonce_hex(s: &str) -> Result<Nonce, String> {
    if s.len() != 2 * NONCE_BYTES {
        return Err(format!("expected {} hex digits, got {}", 2 * NONCE_BYTES, s.len()));
    }
    Nonce::from_slice(&decode_hex(s)?).map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
pub enum KeyChoice {
    /// `-` means prompt on the terminal.
    Passphrase(Secret),
    Raw(Key),
}

/// A validated command line.
#[derive(Clone, Debug)]
pub enum Invocation {
    Encrypt {
        input: PathBuf,
        output: PathBuf,
        key: KeyChoice,
        ad: Vec<u8>,
        nonce: Option<Nonce>,
        paranoid: bool,
        quiet: bool,
    },
    Decrypt {
        input: PathBuf,
        output: PathBuf,
        key: KeyChoice,
        ad: Vec<u8>,
        paranoid: bool,
        quiet: bool,
    },
    Hash {
        input: PathBuf,
        out: Option<PathBuf>,
        quiet: bool,
    },
    TestAll {
        out_dir: PathBuf,
        quiet: bool,
    },
    Benchmark {
        quiet: bool,
    },
    Avalanche {
        trials: usize,
        seed: u64,
    },
}

impl KeyArgs {
    fn choice(&self) -> KeyChoice {
        match (&self.pass, &self.key_hex) {
            (Some(p), _) => KeyChoice::Passphrase(p.clone()),
            (None, Some(k)) => KeyChoice::Raw(k.0.clone()),
            (None, None) => unreachable!("clap enforces the key group"),
        }
    }
}

/// Parses `argv` (including the program name). Help and version requests come back as
/// `clap::Error`s too; their exit code is 0.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let inv = match cli.command {
        Some(Command::Enc(a)) => Invocation::Encrypt {
            key: a.key.choice(),
            ad: a.key.ad.0.clone(),
            paranoid: a.key.paranoid,
            quiet: a.key.quiet || cli.quiet,
            nonce: a.nonce_hex,
            input: a.input,
            output: a.output,
        },
        Some(Command::Dec(a)) => Invocation::Decrypt {
            key: a.key.choice(),
            ad: a.key.ad.0.clone(),
            paranoid: a.key.paranoid,
            quiet: a.key.quiet || cli.quiet,
            input: a.input,
            output: a.output,
        },
        Some(Command::Hash(a)) => Invocation::Hash {
            input: a.input,
            out: a.out,
            quiet: a.quiet || cli.quiet,
        },
        None if cli.test_all => Invocation::TestAll {
            out_dir: cli.out_dir,
            quiet: cli.quiet,
        },
        None if cli.benchmark => Invocation::Benchmark { quiet: cli.quiet },
        None if cli.avalanche => Invocation::Avalanche {
            trials: cli.trials,
            seed: cli.seed,
        },
        None => {
            return Err(clap::Error::raw(
                clap::error::ErrorKind::MissingSubcommand,
                "expected a command (enc, dec, hash) or --test-all / --benchmark\n",
            ))
        }
    };
    Ok(inv)
}

struct Reporter {
    quiet: bool,
    progress: bool,
}

impl Reporter {
    fn new(quiet: bool) -> Self {
        let progress = !quiet && std::env::var(NO_PROGRESS_ENV).map_or(true, |v| v != "1");
        Reporter { quiet, progress }
    }

    fn progress(&self, msg: impl fmt::Display) {
        if self.progress {
            eprintln!("{msg}");
        }
    }

    fn info(&self, msg: impl fmt::Display) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Kdf(_) | Error::Rng(_) => EXIT_KDF,
        Error::Length { .. } | Error::Phase { .. } => EXIT_USAGE,
    }
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    error_code(e)
}

fn resolve_key(choice: &KeyChoice, paranoid: bool, confirm: bool) -> io::Result<KeySource> {
    let profile = if paranoid {
        KdfProfile::SENSITIVE
    } else {
        KdfProfile::MODERATE
    };
    Ok(match choice {
        KeyChoice::Raw(k) => KeySource::Raw(k.clone()),
        KeyChoice::Passphrase(p) => {
            let pass = if p.expose() == "-" {
                let first = rpassword::prompt_password("Passphrase: ")?;
                if confirm && rpassword::prompt_password("Confirm passphrase: ")? != first {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidInput,
                        "passphrases do not match",
                    ));
                }
                first
            } else {
                p.expose().to_owned()
            };
            if pass.is_empty() {
                eprintln!("warning: empty passphrase");
            }
            KeySource::passphrase(pass.into_bytes(), profile)
        }
    })
}

fn describe_kdf(ks: &KeySource) -> Option<String> {
    match ks {
        KeySource::Passphrase { profile, .. } => Some(format!(
            "deriving key with Argon2id ({}: {} passes, {} MiB)",
            profile.name,
            profile.ops_limit,
            profile.mem_limit >> 20
        )),
        KeySource::Raw(_) => None,
    }
}

fn display(p: &Path) -> std::path::Display<'_> {
    p.display()
}

/// Executes an invocation and returns the process exit code.
pub fn run(inv: Invocation) -> u8 {
    match inv {
        Invocation::Encrypt {
            input,
            output,
            key,
            ad,
            nonce,
            paranoid,
            quiet,
        } => {
            let r = Reporter::new(quiet);
            let ks = match resolve_key(&key, paranoid, true) {
                Ok(ks) => ks,
                Err(e) => return fail(&e.into()),
            };
            if let Some(msg) = describe_kdf(&ks) {
                r.progress(msg);
            }
            r.progress(format_args!("encrypting {} -> {}", display(&input), display(&output)));
            match container::encrypt_file(&input, &output, &ks, &ad, nonce) {
                Ok(()) => {
                    r.info(format_args!("encrypted {} -> {}", display(&input), display(&output)));
                    EXIT_OK
                }
                Err(e) => fail(&e),
            }
        }
        Invocation::Decrypt {
            input,
            output,
            key,
            ad,
            paranoid,
            quiet,
        } => {
            let r = Reporter::new(quiet);
            let ks = match resolve_key(&key, paranoid, false) {
                Ok(ks) => ks,
                Err(e) => return fail(&e.into()),
            };
            if let Some(msg) = describe_kdf(&ks) {
                r.progress(msg);
            }
            r.progress(format_args!("decrypting {} -> {}", display(&input), display(&output)));
            match container::decrypt_file(&input, &output, &ks, &ad) {
                Ok(DecryptVerdict::Ok) => {
                    r.info(format_args!("decrypted {} -> {}", display(&input), display(&output)));
                    EXIT_OK
                }
                Ok(DecryptVerdict::HeaderAuthFail) => {
                    eprintln!(
                        "error: header authentication failed (wrong key, passphrase or --ad); \
                         nothing was decrypted"
                    );
                    EXIT_REJECTED
                }
                Ok(DecryptVerdict::BodyAuthFail) => {
                    eprintln!(
                        "error: ciphertext authentication failed; the file was modified. \
                         No output was written"
                    );
                    EXIT_REJECTED
                }
                Ok(DecryptVerdict::Format(f)) => {
                    eprintln!("error: {f}");
                    EXIT_REJECTED
                }
                Err(e) => fail(&e),
            }
        }
        Invocation::Hash { input, out, quiet } => {
            let digest = match fs::File::open(&input).and_then(froghash::hash) {
                Ok(d) => d,
                Err(e) => return fail(&e.into()),
            };
            let line = format!("{}  {}", hex::encode(digest), input.display());
            if let Some(out) = &out {
                if let Err(e) = fs::write(out, format!("{line}\n")) {
                    return fail(&e.into());
                }
                if !quiet {
                    println!("{line}");
                }
            } else {
                println!("{line}");
            }
            EXIT_OK
        }
        Invocation::TestAll { out_dir, quiet } => {
            let r = Reporter::new(quiet);
            r.progress(format_args!("writing test vectors to {}", display(&out_dir)));
            match diagnostics::run_test_all(&out_dir) {
                Ok(report) => {
                    for e in &report.entries {
                        r.info(format_args!(
                            "{:>8}  {}  in={}  enc={}  size={}",
                            e.len,
                            if e.roundtrip_ok && e.size_ok { "ok  " } else { "FAIL" },
                            e.input_sha256,
                            e.enc_sha256,
                            e.enc_size
                        ));
                    }
                    if report.passed() {
                        r.info(format_args!(
                            "all {} lengths passed; manifest in {}",
                            report.entries.len(),
                            out_dir.join(diagnostics::MANIFEST_NAME).display()
                        ));
                        EXIT_OK
                    } else {
                        eprintln!("error: failing lengths: {:?}", report.failures);
                        EXIT_REJECTED
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Invocation::Benchmark { quiet } => {
            let r = Reporter::new(quiet);
            let cfg = BenchConfig::default();
            r.progress(format_args!(
                "benchmarking: {} permutations, {} MiB AEAD buffer, median of {}",
                cfg.perm_iters,
                cfg.buffer_bytes >> 20,
                cfg.repetitions
            ));
            let report = diagnostics::run_benchmark(&cfg);
            r.progress(format_args!(
                "permutation: {:.1} ns/call (reference {:.1})",
                report.perm_ns_per_call, report.reference_perm_ns
            ));
            r.progress(format_args!(
                "aead encrypt: {:.1} MiB/s (reference {:.1}, predicted from permutation {:.1})",
                report.aead_mib_per_s,
                report.reference_aead_mib_per_s,
                report.predicted_mib_per_s()
            ));
            let json = serde_json::to_string_pretty(&report).expect("plain struct");
            let mut out = io::stdout().lock();
            let _ = writeln!(out, "{json}");
            EXIT_OK
        }
        Invocation::Avalanche { trials, seed } => {
            if trials == 0 {
                eprintln!("error: --trials must be at least 1");
                return EXIT_USAGE;
            }
            let report = diagnostics::run_avalanche(trials, symfrog::ROUNDS, seed);
            print!("{}", report.to_csv());
            EXIT_OK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Invocation, clap::Error> {
        parse_args(std::iter::once("symfrog512").chain(args.iter().copied()))
    }

    #[test]
    fn enc_with_pass_and_ad() {
        let inv = parse(&["enc", "a", "b", "--pass", "x", "--ad", "486561646572"]).unwrap();
        match inv {
            Invocation::Encrypt {
                key: KeyChoice::Passphrase(p),
                ad,
                nonce: None,
                paranoid: false,
                ..
            } => {
                assert_eq!(p.expose(), "x");
                assert_eq!(ad, b"Header");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn key_source_is_required_and_exclusive() {
        let e = parse(&["enc", "a", "b"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let key = "00".repeat(128);
        let e = parse(&["enc", "a", "b", "--pass", "x", "--key-hex", &key]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn key_hex_length_is_exact() {
        let short = "ab".repeat(127);
        assert_eq!(short.len(), 254);
        assert!(parse(&["enc", "a", "b", "--key-hex", &short]).is_err());
        let ok = "Ab".repeat(128);
        assert!(matches!(
            parse(&["dec", "a", "b", "--key-hex", &ok]).unwrap(),
            Invocation::Decrypt { key: KeyChoice::Raw(_), .. }
        ));
    }

    #[test]
    fn hex_rules() {
        let key = "00".repeat(128);
        assert!(parse(&["enc", "a", "b", "--key-hex", &key, "--ad", "abc"]).is_err());
        assert!(parse(&["enc", "a", "b", "--key-hex", &key, "--ad", "zz"]).is_err());
        let inv = parse(&["enc", "a", "b", "--key-hex", &key, "--ad", "DEADbeef"]).unwrap();
        assert!(matches!(inv, Invocation::Encrypt { ad, .. } if ad == [0xDE, 0xAD, 0xBE, 0xEF]));
        assert!(parse(&["enc", "a", "b", "--key-hex", &key, "--nonce-hex", &"11".repeat(31)]).is_err());
        let inv = parse(&["enc", "a", "b", "--key-hex", &key, "--nonce-hex", &"11".repeat(32)]).unwrap();
        assert!(matches!(inv, Invocation::Encrypt { nonce: Some(_), .. }));
    }

    #[test]
    fn dec_has_no_nonce_flag() {
        let key = "00".repeat(128);
        assert!(parse(&["dec", "a", "b", "--key-hex", &key, "--nonce-hex", &"11".repeat(32)]).is_err());
    }

    #[test]
    fn modes() {
        assert!(matches!(parse(&["--test-all"]).unwrap(), Invocation::TestAll { .. }));
        assert!(matches!(parse(&["--benchmark"]).unwrap(), Invocation::Benchmark { .. }));
        assert!(matches!(
            parse(&["--avalanche", "--trials", "10"]).unwrap(),
            Invocation::Avalanche { trials: 10, .. }
        ));
        assert!(parse(&["--test-all", "--benchmark"]).is_err());
        assert!(matches!(
            parse(&["hash", "f", "-q"]).unwrap(),
            Invocation::Hash { quiet: true, .. }
        ));
        assert_eq!(parse(&["--help"]).unwrap_err().exit_code(), 0);
        assert_eq!(parse(&[]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn quiet_and_paranoid_flags() {
        let inv = parse(&["dec", "a", "b", "--pass", "p", "--paranoid", "-q"]).unwrap();
        assert!(matches!(inv, Invocation::Decrypt { paranoid: true, quiet: true, .. }));
    }

    #[test]
    fn passphrase_is_redacted_in_debug() {
        let inv = parse(&["enc", "a", "b", "--pass", "hunter2"]).unwrap();
        assert!(!format!("{inv:?}").contains("hunter2"));
    }
}
