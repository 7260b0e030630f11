//! `hpe`: key generation, encryption, signatures, attacks and experiments
//! over JSON files.
//!
//! Exit codes: 0 success with unique decryption, 1 usage or input error,
//! 2 ambiguous decryption, 3 retry budget exhausted, 4 rejected signature
//! or undecryptable ciphertext.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hpe_core::classic::{
    exhaustive_attack, im_decrypt, im_encrypt, im_keygen, patarin_attack, relation_dimension,
    ImPublicMap, PublicMap, DEFAULT_MAX_DIMENSION, EXHAUSTIVE_BUDGET,
};
use hpe_core::codec::{decode_block, encode_message, Alphabet};
use hpe_core::hpe::{
    assemble_message, decrypt_message, degenerate_keygen, encrypt_message, expand_public_key,
    keygen, Candidate, HpeParams, HpePrivateKey, HpePublicKey, DEFAULT_MAX_RETRIES,
};
use hpe_core::keyfile::{block_to_strings, sha256_hex, Ciphertext, Key, Scheme, SignatureFile};
use hpe_core::protocols::{dual_decrypt_message, dual_encrypt_message, sign, verify, SIGN_ATTEMPTS};
use hpe_core::stats::{pubkey_size, retry_decay, root_probability};
use hpe_core::{BaseField, Error, FieldSpec, FqElem};

const EXIT_AMBIGUOUS: u8 = 2;
const EXIT_RETRY: u8 = 3;
const EXIT_REJECT: u8 = 4;

#[derive(Parser)]
#[command(name = "hpe", version, about = "Hidden polynomial equation cryptosystem toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    /// Master seed; the HPE_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SeedArg {
    fn get(self) -> Result<u64, CliError> {
        match std::env::var("HPE_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("HPE_SEED is not an integer: {v:?}"))),
            Err(_) => Ok(self.seed),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Hpe,
    Im,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Patarin,
    Exhaustive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    RootProbability,
    RetryDecay,
    PubkeySize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair: writes <out>.pub.json and <out>.priv.json.
    Keygen {
        #[arg(long, value_enum, default_value = "hpe")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Degree bound t (HPE only).
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Frobenius exponent θ (IM, and HPE with --degenerate).
        #[arg(long, default_value_t = 1)]
        theta: u32,
        /// Number of private monomials (HPE; default t + 1).
        #[arg(long)]
        monomials: Option<usize>,
        /// HPE key with f = X^(q^θ+1) + Y.
        #[arg(long)]
        degenerate: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a message file under a public key.
    Encrypt {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Decrypt a ciphertext file; prints every candidate as JSON.
    Decrypt {
        #[arg(long = "priv")]
        private: PathBuf,
        /// Public key (HPE); re-derived from the private key when omitted.
        #[arg(long = "pub")]
        public: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write the recovered message.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign a message file.
    Sign {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SIGN_ATTEMPTS)]
        max_salts: u64,
    },
    /// Verify a signature file against a message file.
    Verify {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Bob encrypts to Alice through his own private map.
    DualEncrypt {
        #[arg(long = "pub-a")]
        public_a: PathBuf,
        #[arg(long = "priv-b")]
        private_b: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Alice decrypts a dual ciphertext with Bob's public key.
    DualDecrypt {
        #[arg(long = "priv-a")]
        private_a: PathBuf,
        #[arg(long = "pub-b")]
        public_b: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attack a public key; prints a JSON report.
    Attack {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long = "pub")]
        public: PathBuf,
        /// Plaintext/ciphertext pairs for the relation attack (default 3(n+1)^2).
        #[arg(long)]
        samples: Option<usize>,
        /// Fresh ciphertexts attacked after the relations are found.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Ciphertext file attacked by exhaustive search.
        #[arg(long)]
        ct: Option<PathBuf>,
        /// Search every block instead of alphabet-valid blocks only.
        #[arg(long)]
        all_blocks: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a statistical experiment; prints a JSON report.
    Stats {
        #[arg(long, value_enum)]
        experiment: Experiment,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Polynomial degree (root-probability).
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long)]
        trials: Option<u64>,
        /// Largest number of attempts (retry-decay).
        #[arg(long, default_value_t = 3)]
        max_s: u32,
        /// Degree bound t (pubkey-size).
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Comma-separated block lengths (pubkey-size).
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
        ns: Vec<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::RetryExhausted(_)) => EXIT_RETRY,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, data).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_key(path: &Path) -> CliResult<Key> {
    Ok(Key::from_json(&read_text(path)?)?)
}

fn load_hpe_public(path: &Path) -> CliResult<HpePublicKey> {
    match load_key(path)? {
        Key::HpePublic(k) => Ok(k),
        other => Err(role_mismatch(path, "hpe-public", &other)),
    }
}

fn load_hpe_private(path: &Path) -> CliResult<HpePrivateKey> {
    match load_key(path)? {
        Key::HpePrivate(k) => Ok(k),
        other => Err(role_mismatch(path, "hpe-private", &other)),
    }
}

fn role_mismatch(path: &Path, want: &str, got: &Key) -> CliError {
    CliError::Usage(format!("{}: expected a {want} key, found {:?}", path.display(), got.role()))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Keygen {
            scheme,
            p,
            m,
            n,
            t,
            theta,
            monomials,
            degenerate,
            seed,
            out,
        } => cmd_keygen(scheme, p, m, n, t, theta, monomials, degenerate, seed.get()?, &out),
        Command::Encrypt {
            public,
            input,
            out,
            max_retries,
            seed,
        } => cmd_encrypt(&public, &input, &out, max_retries, seed.get()?),
        Command::Decrypt {
            private,
            public,
            input,
            out,
        } => cmd_decrypt(&private, public.as_deref(), &input, out.as_deref()),
        Command::Sign {
            private,
            input,
            out,
            max_salts,
        } => {
            let key = load_hpe_private(&private)?;
            let message = read(&input)?;
            let sig = sign(&key, &message, max_salts)?;
            write(&out, SignatureFile::new(key.ctx().spec(), &message, sig).to_json()?)?;
            Ok(0)
        }
        Command::Verify { public, input, sig } => {
            let key = load_hpe_public(&public)?;
            let message = read(&input)?;
            let file = SignatureFile::from_json(&read_text(&sig)?)?;
            let ok = file.message_digest == sha256_hex(&message)
                && file.spec == *key.spec()
                && verify(&key, &message, &file.signature);
            println!("{}", if ok { "accept" } else { "reject" });
            Ok(if ok { 0 } else { EXIT_REJECT })
        }
        Command::DualEncrypt {
            public_a,
            private_b,
            input,
            out,
            max_retries,
            seed,
        } => {
            let pa = load_hpe_public(&public_a)?;
            let pb = load_hpe_private(&private_b)?;
            let enc = dual_encrypt_message(&pa, &pb, &read(&input)?, seed.get()?, max_retries)?;
            let ct = Ciphertext {
                scheme: Scheme::Dual,
                spec: pa.spec().clone(),
                n: pa.n(),
                blocks: enc.blocks,
                retries: enc.retries,
            };
            write(&out, ct.to_json()?)?;
            Ok(0)
        }
        Command::DualDecrypt {
            private_a,
            public_b,
            input,
            out,
        } => {
            let ka = load_hpe_private(&private_a)?;
            let pb = load_hpe_public(&public_b)?;
            let ct = load_ciphertext(&input, Scheme::Dual, pb.n())?;
            let candidates = dual_decrypt_message(&ka, &pb, &ct.blocks)?;
            report_candidates(pb.spec(), &candidates, out.as_deref())
        }
        Command::Attack {
            method,
            public,
            samples,
            trials,
            ct,
            all_blocks,
            seed,
            out,
        } => cmd_attack(method, &public, samples, trials, ct.as_deref(), all_blocks, seed.get()?, out.as_deref()),
        Command::Stats {
            experiment,
            p,
            m,
            n,
            degree,
            trials,
            max_s,
            t,
            ns,
            seed,
            out,
        } => {
            let seed = seed.get()?;
            let report = match experiment {
                Experiment::RootProbability => {
                    let spec = FieldSpec::with_default_modulus(p, m.unwrap_or(1))?;
                    root_probability(&spec, n.unwrap_or(8), degree, trials.unwrap_or(10_000), seed)?
                }
                Experiment::RetryDecay => {
                    let spec = FieldSpec::with_default_modulus(p, m.unwrap_or(2))?;
                    retry_decay(&spec, n.unwrap_or(8), trials.unwrap_or(4_000), max_s, seed)?
                }
                Experiment::PubkeySize => {
                    let spec = FieldSpec::with_default_modulus(p, m.unwrap_or(1))?;
                    pubkey_size(&spec, &ns, t, seed)?
                }
            };
            emit(out.as_deref(), &report.to_json()?)?;
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_keygen(
    scheme: SchemeArg,
    p: u64,
    m: usize,
    n: usize,
    t: usize,
    theta: u32,
    monomials: Option<usize>,
    degenerate: bool,
    seed: u64,
    out: &Path,
) -> CliResult<u8> {
    let spec = FieldSpec::with_default_modulus(p, m)?;
    let (private, public) = match scheme {
        SchemeArg::Hpe => {
            let (k, pk) = if degenerate {
                degenerate_keygen(&spec, n, theta, seed)?
            } else {
                let mut params = HpeParams::new(spec, n, t, seed);
                if let Some(c) = monomials {
                    params.monomial_count = c;
                }
                keygen(&params)?
            };
            println!("terms: {}", pk.term_count());
            (Key::HpePrivate(k), Key::HpePublic(pk))
        }
        SchemeArg::Im => {
            let (k, pk) = im_keygen(&spec, n, theta, seed)?;
            let terms: usize = pk.equations().iter().map(|e| e.len()).sum();
            println!("terms: {terms}");
            (Key::ImPrivate(k), Key::ImPublic(pk))
        }
    };
    let pub_text = public.to_json()?;
    let priv_text = private.to_json()?;
    println!("public key bytes: {}", pub_text.len());
    println!("private key bytes: {}", priv_text.len());
    write(&with_suffix(out, ".pub.json"), pub_text)?;
    write(&with_suffix(out, ".priv.json"), priv_text)?;
    Ok(0)
}

fn cmd_encrypt(public: &Path, input: &Path, out: &Path, max_retries: u64, seed: u64) -> CliResult<u8> {
    let message = read(input)?;
    let ct = match load_key(public)? {
        Key::HpePublic(k) => {
            let enc = encrypt_message(&k, &message, seed, max_retries)?;
            Ciphertext {
                scheme: Scheme::Hpe,
                spec: k.spec().clone(),
                n: k.n(),
                blocks: enc.blocks,
                retries: enc.retries,
            }
        }
        Key::ImPublic(k) => {
            let alpha = Alphabet::default_for(&BaseField::new(k.spec()), k.n())?;
            let blocks = encode_message(&alpha, &message, k.n())?
                .iter()
                .map(|b| im_encrypt(&k, &b.block))
                .collect::<Result<Vec<_>, _>>()?;
            Ciphertext {
                scheme: Scheme::Im,
                spec: k.spec().clone(),
                n: k.n(),
                retries: vec![0; blocks.len()],
                blocks,
            }
        }
        other => return Err(role_mismatch(public, "public", &other)),
    };
    write(out, ct.to_json()?)?;
    Ok(0)
}

fn load_ciphertext(path: &Path, scheme: Scheme, n: usize) -> CliResult<Ciphertext> {
    let ct = Ciphertext::from_json(&read_text(path)?)?;
    if ct.scheme != scheme {
        return Err(CliError::Usage(format!(
            "{}: ciphertext scheme {:?} does not match the key ({scheme:?})",
            path.display(),
            ct.scheme
        )));
    }
    if ct.n != n {
        return Err(CliError::Usage(format!("{}: block length {} does not match the key ({n})", path.display(), ct.n)));
    }
    Ok(ct)
}

#[derive(Serialize)]
struct CandidateReport {
    block: Vec<Vec<String>>,
    decodable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize)]
struct DecryptReport {
    blocks: Vec<Vec<CandidateReport>>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn report_candidates(spec: &FieldSpec, candidates: &[Vec<Candidate>], out: Option<&Path>) -> CliResult<u8> {
    let decodable: Vec<usize> = candidates
        .iter()
        .map(|b| b.iter().filter(|c| c.decoded.is_some()).count())
        .collect();
    let (status, code) = if decodable.contains(&0) {
        ("failed", EXIT_REJECT)
    } else if decodable.iter().any(|&d| d > 1) {
        ("ambiguous", EXIT_AMBIGUOUS)
    } else {
        ("unique", 0)
    };
    let message = (code != EXIT_REJECT).then(|| assemble_message(candidates)).flatten();
    let report = DecryptReport {
        blocks: candidates
            .iter()
            .map(|b| {
                b.iter()
                    .map(|c| CandidateReport {
                        block: block_to_strings(spec, &c.x),
                        decodable: c.decoded.is_some(),
                        text: c.decoded.as_ref().map(|d| String::from_utf8_lossy(d).into_owned()),
                    })
                    .collect()
            })
            .collect(),
        status,
        message: message.as_ref().map(|m| String::from_utf8_lossy(m).into_owned()),
    };
    print!("{}", to_json(&report));
    if let (Some(path), Some(m)) = (out, message) {
        write(path, m)?;
    }
    Ok(code)
}

fn cmd_decrypt(private: &Path, public: Option<&Path>, input: &Path, out: Option<&Path>) -> CliResult<u8> {
    match load_key(private)? {
        Key::HpePrivate(k) => {
            let pk = match public {
                Some(p) => load_hpe_public(p)?,
                None => expand_public_key(&k)?,
            };
            let ct = load_ciphertext(input, Scheme::Hpe, k.n())?;
            let candidates = decrypt_message(&k, &pk, &ct.blocks)?;
            report_candidates(pk.spec(), &candidates, out)
        }
        Key::ImPrivate(k) => {
            let ct = load_ciphertext(input, Scheme::Im, k.ctx().n())?;
            let alpha = Alphabet::default_for(k.ctx().base(), k.ctx().n())?;
            let candidates = ct
                .blocks
                .iter()
                .map(|y| {
                    let x = im_decrypt(&k, y)?;
                    let decoded = decode_block(&alpha, &x);
                    Ok(vec![Candidate { x, decoded }])
                })
                .collect::<Result<Vec<_>, Error>>()?;
            report_candidates(k.ctx().spec(), &candidates, out)
        }
        other => Err(role_mismatch(private, "private", &other)),
    }
}

#[derive(Serialize)]
struct PatarinJson {
    method: &'static str,
    n: usize,
    relation_dimension: usize,
    samples_used: usize,
    trials: usize,
    recovered: usize,
    recovery_rate: f64,
    success: bool,
    wall_time_ms: u128,
}

#[derive(Serialize)]
struct ExhaustiveJson {
    method: &'static str,
    n: usize,
    blocks: Vec<Vec<Vec<Vec<String>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    wall_time_ms: u128,
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack(
    method: Method,
    public: &Path,
    samples: Option<usize>,
    trials: usize,
    ct: Option<&Path>,
    all_blocks: bool,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<u8> {
    let key = load_key(public)?;
    let (map, scheme): (Box<dyn PublicMap>, Scheme) = match key {
        Key::HpePublic(k) => (Box::new(k), Scheme::Hpe),
        Key::ImPublic(k) => (Box::new(ImPublicMap::new(k)), Scheme::Im),
        other => return Err(role_mismatch(public, "public", &other)),
    };
    let n = map.n();
    let start = Instant::now();
    let text = match method {
        Method::Patarin => {
            let samples = samples.unwrap_or(3 * relation_dimension(n));
            let r = patarin_attack(map.as_ref(), samples, trials, seed, DEFAULT_MAX_DIMENSION)?;
            to_json(&PatarinJson {
                method: "patarin",
                n,
                relation_dimension: r.relation_dimension,
                samples_used: r.samples_used,
                trials: r.trials,
                recovered: r.recovered,
                recovery_rate: r.recovery_rate,
                success: r.success,
                wall_time_ms: start.elapsed().as_millis(),
            })
        }
        Method::Exhaustive => {
            let path = ct.ok_or_else(|| CliError::Usage("--ct is required for exhaustive search".into()))?;
            let ct = load_ciphertext(path, scheme, n)?;
            let alpha = Alphabet::default_for(map.field(), n)?;
            let alpha_ref = (!all_blocks).then_some(&alpha);
            let found = ct
                .blocks
                .iter()
                .map(|y| exhaustive_attack(map.as_ref(), y, alpha_ref, EXHAUSTIVE_BUDGET))
                .collect::<Result<Vec<_>, _>>()?;
            let message = found
                .iter()
                .map(|b| b.iter().find_map(|x| decode_block(&alpha, x)))
                .collect::<Option<Vec<_>>>()
                .map(|parts| String::from_utf8_lossy(&parts.concat()).into_owned());
            let spec = map.field().spec().clone();
            to_json(&ExhaustiveJson {
                method: "exhaustive",
                n,
                blocks: found
                    .iter()
                    .map(|b| b.iter().map(|x: &Vec<FqElem>| block_to_strings(&spec, x)).collect())
                    .collect(),
                message,
                wall_time_ms: start.elapsed().as_millis(),
            })
        }
    };
    emit(out, &text)?;
    Ok(0)
}
