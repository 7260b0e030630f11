//! Signatures and the dual probabilistic protocol, built from the HPE
//! primitives.
//!
//! A signature on `M` is a block `x` that satisfies the signer's public
//! equations together with `y = H(M)`; the signer finds it with the same
//! root finding that decrypts. In the dual protocol Bob first inverts his
//! own map on the plaintext, picking one of possibly several preimages at
//! random, then encrypts that preimage to Alice.

use sha2::{Digest, Sha256};

use crate::codec::{decode_block, encode_message, Alphabet};
use crate::error::{Error, Result};
use crate::gf::{BaseField, FieldSpec, FqElem};
use crate::hpe::{
    encrypt_block, private_roots, with_retries, Candidate, EncryptOutcome, EncryptedMessage, HpePrivateKey,
    HpePublicKey,
};
use crate::rng::{domain, Prng};

const HASH_TAG: &[u8] = b"hpe/hash-to-field";
/// Default number of salts a signer tries.
pub const SIGN_ATTEMPTS: u64 = 64;
/// Largest affine solution space enumerated during dual decryption.
pub const DUAL_ENUMERATION_LIMIT: u64 = 256;

/// SHA-256 in counter mode, read as a stream of bytes.
struct HashStream<'a> {
    message: &'a [u8],
    counter: u32,
    buf: [u8; 32],
    pos: usize,
}

impl<'a> HashStream<'a> {
    fn new(message: &'a [u8]) -> Self {
        HashStream {
            message,
            counter: 0,
            buf: [0; 32],
            pos: 32,
        }
    }

    fn byte(&mut self) -> u8 {
        if self.pos == 32 {
            let mut h = Sha256::new();
            h.update(HASH_TAG);
            h.update(self.counter.to_be_bytes());
            h.update(self.message);
            self.buf = h.finalize().into();
            self.counter += 1;
            self.pos = 0;
        }
        self.pos += 1;
        self.buf[self.pos - 1]
    }

    /// Uniform in `[0, p)`: one byte when `p ≤ 256`, else two, rejecting
    /// values at or above the largest multiple of `p`.
    fn below(&mut self, p: u64) -> u64 {
        let (range, wide) = if p <= 256 { (256u64, false) } else { (65536u64, true) };
        let limit = range - range % p;
        loop {
            let mut v = self.byte() as u64;
            if wide {
                v = v << 8 | self.byte() as u64;
            }
            if v < limit {
                return v % p;
            }
        }
    }
}

/// Hashes `message` to `n` elements of `F_q`.
pub fn hash_to_field(spec: &FieldSpec, n: usize, message: &[u8]) -> Vec<FqElem> {
    let field = BaseField::new(spec);
    let mut stream = HashStream::new(message);
    (0..n)
        .map(|_| {
            let coeffs: Vec<u64> = (0..spec.m()).map(|_| stream.below(spec.p())).collect();
            field.from_coeffs(&coeffs).expect("coefficients reduced mod p")
        })
        .collect()
}

/// The hash input for `message` under `salt`; salt 0 leaves it unchanged.
pub fn salted(message: &[u8], salt: u64) -> Vec<u8> {
    let mut out = message.to_vec();
    if salt > 0 {
        out.extend_from_slice(&salt.to_be_bytes());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub block: Vec<FqElem>,
    pub salt: u64,
}

/// A signature under one specific salt, or `None` when `f(X, v)` has no
/// root for that hash.
pub fn sign_with_salt(private: &HpePrivateKey, message: &[u8], salt: u64) -> Result<Option<Signature>> {
    let ctx = private.ctx();
    let y = hash_to_field(ctx.spec(), ctx.n(), &salted(message, salt));
    let roots = private_roots(private, &y)?;
    Ok(roots.first().map(|u| Signature {
        block: private.x_mask().unapply(ctx, u),
        salt,
    }))
}

/// Tries salts `0, 1, …` until the hash lands on a value with a preimage.
pub fn sign(private: &HpePrivateKey, message: &[u8], max_attempts: u64) -> Result<Signature> {
    for salt in 0..max_attempts {
        if let Some(sig) = sign_with_salt(private, message, salt)? {
            return Ok(sig);
        }
    }
    Err(Error::RetryExhausted(max_attempts as usize))
}

pub fn verify(public: &HpePublicKey, message: &[u8], sig: &Signature) -> bool {
    let y = hash_to_field(public.spec(), public.n(), &salted(message, sig.salt));
    public.accepts(&sig.block, &y).unwrap_or(false)
}

fn check_pair(a_spec: &FieldSpec, a_n: usize, b_spec: &FieldSpec, b_n: usize) -> Result<()> {
    if a_n != b_n {
        return Err(Error::IncompatibleKeys(format!("block lengths {a_n} and {b_n} differ")));
    }
    if a_spec != b_spec {
        return Err(Error::IncompatibleKeys("ground fields differ".into()));
    }
    Ok(())
}

/// Bob's side: a random preimage of `x` under his own map, encrypted to
/// Alice. Roots are tried in a seeded random order until one encrypts.
pub fn dual_encrypt(
    public_a: &HpePublicKey,
    private_b: &HpePrivateKey,
    x: &[FqElem],
    seed: u64,
    block_index: u64,
) -> Result<EncryptOutcome> {
    check_pair(public_a.spec(), public_a.n(), private_b.ctx().spec(), private_b.n())?;
    let ctx = private_b.ctx();
    let mut roots = private_roots(private_b, x)?;
    let mut rng = Prng::for_index(seed, domain::DUAL, block_index);
    rng.shuffle(&mut roots);
    for z in roots {
        let y_prime = private_b.x_mask().unapply(ctx, &z);
        if let EncryptOutcome::Ciphertext(y) = encrypt_block(public_a, &y_prime)? {
            return Ok(EncryptOutcome::Ciphertext(y));
        }
    }
    Ok(EncryptOutcome::RetryNeeded)
}

/// Alice's side without filtering: every block Bob's public equations
/// associate with a preimage of `y`, decodable ones first.
pub fn dual_candidates(
    private_a: &HpePrivateKey,
    public_b: &HpePublicKey,
    y: &[FqElem],
) -> Result<Vec<Candidate>> {
    check_pair(private_a.ctx().spec(), private_a.n(), public_b.spec(), public_b.n())?;
    let ctx = private_a.ctx();
    let f = public_b.field();
    let mut blocks = Vec::new();
    for u in private_roots(private_a, y)? {
        let y_prime = private_a.x_mask().unapply(ctx, &u);
        let Some(space) = public_b.solution_space(&y_prime)? else {
            continue;
        };
        if let Some(points) = space.enumerate(f, DUAL_ENUMERATION_LIMIT) {
            blocks.extend(points);
        }
    }
    blocks.sort();
    blocks.dedup();
    let mut out: Vec<Candidate> = blocks
        .into_iter()
        .map(|x| {
            let decoded = decode_block(public_b.alphabet(), &x);
            Candidate { x, decoded }
        })
        .collect();
    out.sort_by_key(|c| c.decoded.is_none());
    Ok(out)
}

/// Alice's side: the alphabet-decodable candidates only.
pub fn dual_decrypt(private_a: &HpePrivateKey, public_b: &HpePublicKey, y: &[FqElem]) -> Result<Vec<Candidate>> {
    let mut out = dual_candidates(private_a, public_b, y)?;
    out.retain(|c| c.decoded.is_some());
    Ok(out)
}

/// Bob encodes `message` with the default alphabet for the shared block
/// length and dual-encrypts every block, re-encoding on failure.
pub fn dual_encrypt_message(
    public_a: &HpePublicKey,
    private_b: &HpePrivateKey,
    message: &[u8],
    seed: u64,
    max_retries: u64,
) -> Result<EncryptedMessage> {
    let alpha = Alphabet::default_for(private_b.ctx().base(), private_b.n())?;
    let mut out = EncryptedMessage {
        blocks: Vec::new(),
        retries: Vec::new(),
    };
    for (i, enc) in encode_message(&alpha, message, private_b.n())?.iter().enumerate() {
        let mut attempt = 0u64;
        let (y, r) = with_retries(&alpha, enc, seed, i as u64, max_retries, |x| {
            attempt += 1;
            dual_encrypt(public_a, private_b, x, seed, (i as u64) << 32 | attempt)
        })?;
        out.blocks.push(y);
        out.retries.push(r);
    }
    Ok(out)
}

pub fn dual_decrypt_message(
    private_a: &HpePrivateKey,
    public_b: &HpePublicKey,
    blocks: &[Vec<FqElem>],
) -> Result<Vec<Vec<Candidate>>> {
    blocks.iter().map(|y| dual_decrypt(private_a, public_b, y)).collect()
}
