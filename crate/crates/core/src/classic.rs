//! The Imai–Matsumoto scheme, its bilinear-relation break, and a
//! brute-force attacker shared by both cryptosystems.
//!
//! The secret map is `v = u^h` with `h = q^θ + 1`, `u = A·x + c` and
//! `v = B·y + d`, published as explicit quadratics `y = Q(x)`. From
//! `v = u^{q^θ + 1}` follows `u·v^{q^θ} = u^{q^{2θ}}·v`, whose coordinates
//! are bilinear in `x` and `y`. An attacker who finds these relations from
//! plaintext/ciphertext pairs reduces decryption to linear algebra.

use rayon::prelude::*;

use crate::codec::Alphabet;
use crate::error::{Error, Result};
use crate::gf::{BaseField, ExtensionContext, Field, FieldSpec, FqElem, KElem};
use crate::hpe::{encrypt_block, AffineMask, EncryptOutcome, HpePublicKey};
use crate::linalg::Matrix;
use crate::poly::{sym_frobenius, sym_mul, MultiPolyFq, SymbolicFieldElement};
use crate::rng::{domain, Prng};

/// Default cap on the exhaustive search space.
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 24;
/// Default cap on the dimension of the affine space left after the
/// relations are applied; larger spaces count as a failed recovery.
pub const DEFAULT_MAX_DIMENSION: usize = 2;

#[derive(Clone, Debug)]
pub struct ImPrivateKey {
    ctx: ExtensionContext,
    theta: u32,
    h: u128,
    h_inv: u128,
    x_mask: AffineMask,
    y_mask: AffineMask,
    seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImPublicKey {
    spec: FieldSpec,
    n: usize,
    equations: Vec<MultiPolyFq>,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mulmod(mut a: u128, mut b: u128, m: u128) -> u128 {
    a %= m;
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = addmod(acc, a, m);
        }
        a = addmod(a, a, m);
        b >>= 1;
    }
    acc
}

fn addmod(a: u128, b: u128, m: u128) -> u128 {
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

/// Inverse of `a` modulo `m`, for `gcd(a, m) = 1`.
fn inverse_mod(a: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m, a % m);
    let (mut s0, mut s1) = (0u128, 1u128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        let next = (s0 + m - mulmod(quot, s1, m)) % m;
        (s0, s1) = (s1, next);
    }
    s0
}

impl ImPrivateKey {
    pub fn new(
        ctx: ExtensionContext,
        theta: u32,
        x_mask: AffineMask,
        y_mask: AffineMask,
        seed: u64,
    ) -> Result<Self> {
        let n = ctx.n();
        if theta == 0 || theta as usize >= n {
            return Err(Error::InvalidParams(format!(
                "theta must lie in 1..{n}, got {theta}"
            )));
        }
        for mask in [&x_mask, &y_mask] {
            if mask.matrix().rows() != n || mask.shift().coords().len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: mask.matrix().rows(),
                });
            }
        }
        let h = (ctx.q() as u128).pow(theta) + 1;
        let order = ctx.size() - 1;
        let g = gcd(h, order);
        if g != 1 {
            return Err(Error::NonCoprimeExponent { h, gcd: g });
        }
        let h_inv = inverse_mod(h % order, order);
        Ok(ImPrivateKey {
            ctx,
            theta,
            h,
            h_inv,
            x_mask,
            y_mask,
            seed,
        })
    }

    pub fn ctx(&self) -> &ExtensionContext {
        &self.ctx
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    pub fn h(&self) -> u128 {
        self.h
    }

    pub fn h_inv(&self) -> u128 {
        self.h_inv
    }

    pub fn x_mask(&self) -> &AffineMask {
        &self.x_mask
    }

    pub fn y_mask(&self) -> &AffineMask {
        &self.y_mask
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl ImPublicKey {
    pub fn new(spec: &FieldSpec, n: usize, equations: Vec<MultiPolyFq>) -> Result<Self> {
        if equations.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: equations.len(),
            });
        }
        if equations.iter().any(|e| e.nvars() != n) {
            return Err(Error::InvalidKey("public polynomial over the wrong variables".into()));
        }
        Ok(ImPublicKey {
            spec: spec.clone(),
            n,
            equations,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[MultiPolyFq] {
        &self.equations
    }
}

pub fn im_keygen(spec: &FieldSpec, n: usize, theta: u32, seed: u64) -> Result<(ImPrivateKey, ImPublicKey)> {
    let ctx = ExtensionContext::build(spec, n, seed)?;
    let mut rng = Prng::for_domain(seed, domain::IM_KEYGEN);
    let f = ctx.base().clone();
    let (a, _) = Matrix::random_invertible(&f, n, &mut rng);
    let (b, _) = Matrix::random_invertible(&f, n, &mut rng);
    let c = ctx.random(&mut rng);
    let d = ctx.random(&mut rng);
    let private = ImPrivateKey::new(
        ctx,
        theta,
        AffineMask::new(&f, a, c)?,
        AffineMask::new(&f, b, d)?,
        seed,
    )?;
    let public = im_expand(&private)?;
    Ok((private, public))
}

/// The explicit equations `y = B⁻¹((A·x + c)^h − d)`.
pub fn im_expand(private: &ImPrivateKey) -> Result<ImPublicKey> {
    let ctx = private.ctx();
    let f = ctx.base();
    let n = ctx.n();
    let u = SymbolicFieldElement::affine(ctx, private.x_mask.matrix(), private.x_mask.shift(), 0, n);
    let uh = sym_mul(ctx, &sym_frobenius(ctx, &u, private.theta as usize)?, &u)?;
    let b_inv = private
        .y_mask
        .matrix()
        .inverse(f)
        .ok_or_else(|| Error::InvalidKey("mask matrix is singular".into()))?;
    let d = private.y_mask.shift().coords();
    let shifted: Vec<MultiPolyFq> = uh
        .coords()
        .iter()
        .zip(d)
        .map(|(w, &dj)| w.add(f, &MultiPolyFq::constant(n, f.neg(&dj))))
        .collect();
    let equations = (0..n)
        .map(|i| {
            let mut q = MultiPolyFq::zero(n);
            for (j, w) in shifted.iter().enumerate() {
                q.add_scaled(f, w, b_inv[(i, j)]);
            }
            q
        })
        .collect();
    ImPublicKey::new(ctx.spec(), n, equations)
}

fn check_block(f: &BaseField, n: usize, z: &[FqElem]) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    if z.iter().any(|e| e.index() >= f.q()) {
        return Err(Error::Malformed("block entry outside F_q".into()));
    }
    Ok(())
}

pub fn im_encrypt(public: &ImPublicKey, x: &[FqElem]) -> Result<Vec<FqElem>> {
    let f = BaseField::new(&public.spec);
    im_encrypt_with(&f, public, x)
}

fn im_encrypt_with(f: &BaseField, public: &ImPublicKey, x: &[FqElem]) -> Result<Vec<FqElem>> {
    check_block(f, public.n, x)?;
    Ok(public.equations.iter().map(|q| q.eval(f, x)).collect())
}

/// `v = B·y + d`, `u = v^{h'}`, `x = A⁻¹(u − c)`.
pub fn im_decrypt(private: &ImPrivateKey, y: &[FqElem]) -> Result<Vec<FqElem>> {
    let ctx = private.ctx();
    check_block(ctx.base(), ctx.n(), y)?;
    let v = private.y_mask.apply(ctx, y);
    let u = if v.is_zero() {
        v
    } else {
        ctx.pow_unchecked(&v, private.h_inv)
    };
    Ok(private.x_mask.unapply(ctx, &u))
}

/// The public side of a cryptosystem, as seen by an attacker.
pub trait PublicMap: Sync {
    fn field(&self) -> &BaseField;
    fn n(&self) -> usize;
    /// A ciphertext for `x`, or `None` when `x` cannot be encrypted.
    fn forward(&self, x: &[FqElem]) -> Result<Option<Vec<FqElem>>>;
    /// Whether `(x, y)` satisfies the public equations.
    fn accepts(&self, x: &[FqElem], y: &[FqElem]) -> Result<bool>;
}

/// An IM public key paired with its field tables.
#[derive(Clone, Debug)]
pub struct ImPublicMap {
    field: BaseField,
    key: ImPublicKey,
}

impl ImPublicMap {
    pub fn new(key: ImPublicKey) -> Self {
        ImPublicMap {
            field: BaseField::new(&key.spec),
            key,
        }
    }

    pub fn key(&self) -> &ImPublicKey {
        &self.key
    }
}

impl PublicMap for ImPublicMap {
    fn field(&self) -> &BaseField {
        &self.field
    }

    fn n(&self) -> usize {
        self.key.n
    }

    fn forward(&self, x: &[FqElem]) -> Result<Option<Vec<FqElem>>> {
        im_encrypt_with(&self.field, &self.key, x).map(Some)
    }

    fn accepts(&self, x: &[FqElem], y: &[FqElem]) -> Result<bool> {
        check_block(&self.field, self.key.n, y)?;
        Ok(im_encrypt_with(&self.field, &self.key, x)? == y)
    }
}

impl PublicMap for HpePublicKey {
    fn field(&self) -> &BaseField {
        HpePublicKey::field(self)
    }

    fn n(&self) -> usize {
        HpePublicKey::n(self)
    }

    fn forward(&self, x: &[FqElem]) -> Result<Option<Vec<FqElem>>> {
        Ok(match encrypt_block(self, x)? {
            EncryptOutcome::Ciphertext(y) => Some(y),
            EncryptOutcome::RetryNeeded => None,
        })
    }

    fn accepts(&self, x: &[FqElem], y: &[FqElem]) -> Result<bool> {
        HpePublicKey::accepts(self, x, y)
    }
}

/// `Σ α_ij x_i y_j + Σ β_i x_i + Σ γ_j y_j + δ`, stored as the
/// `(n+1) × (n+1)` array over `(x, 1) ⊗ (y, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearRelation {
    n: usize,
    coeffs: Vec<FqElem>,
}

impl BilinearRelation {
    pub fn new(n: usize, coeffs: Vec<FqElem>) -> Result<Self> {
        if coeffs.len() != (n + 1) * (n + 1) {
            return Err(Error::DimensionMismatch {
                expected: (n + 1) * (n + 1),
                got: coeffs.len(),
            });
        }
        Ok(BilinearRelation { n, coeffs })
    }

    /// Coefficient of `x_i y_j`; index `n` stands for the constant 1.
    pub fn coeff(&self, i: usize, j: usize) -> FqElem {
        self.coeffs[i * (self.n + 1) + j]
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn eval(&self, f: &BaseField, x: &[FqElem], y: &[FqElem]) -> FqElem {
        let row = outer_row(f, x, y);
        row.iter()
            .zip(&self.coeffs)
            .fold(FqElem::ZERO, |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
    }
}

fn outer_row(f: &BaseField, x: &[FqElem], y: &[FqElem]) -> Vec<FqElem> {
    let xs = x.iter().copied().chain(std::iter::once(FqElem::ONE));
    xs.flat_map(|xi| {
        y.iter()
            .copied()
            .chain(std::iter::once(FqElem::ONE))
            .map(move |yj| f.mul(&xi, &yj))
    })
    .collect()
}

pub fn relation_dimension(n: usize) -> usize {
    (n + 1) * (n + 1)
}

/// Basis of the bilinear relations vanishing on `sample_count` random
/// plaintext/ciphertext pairs. Plaintexts that cannot be encrypted are
/// skipped without replacement.
pub fn patarin_collect(
    public: &dyn PublicMap,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<BilinearRelation>> {
    let n = public.n();
    let dim = relation_dimension(n);
    if sample_count < dim {
        return Err(Error::InsufficientSamples {
            needed: dim,
            got: sample_count,
        });
    }
    let f = public.field();
    let rows: Vec<Vec<FqElem>> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<FqElem>>> {
            let mut rng = Prng::for_index(seed, domain::PATARIN, i);
            let x: Vec<FqElem> = (0..n).map(|_| f.random(&mut rng)).collect();
            Ok(public.forward(&x)?.map(|y| outer_row(f, &x, &y)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if rows.len() < dim {
        return Err(Error::InsufficientSamples {
            needed: dim,
            got: rows.len(),
        });
    }
    Matrix::from_rows(rows)?
        .kernel(f)
        .into_iter()
        .map(|coeffs| BilinearRelation::new(n, coeffs))
        .collect()
}

/// Every `x` with `public(x) = y` that satisfies the relations, found by
/// solving the linear constraints the relations impose once `y` is fixed.
pub fn patarin_recover(
    relations: &[BilinearRelation],
    public: &dyn PublicMap,
    y: &[FqElem],
    max_dimension: usize,
) -> Result<Vec<Vec<FqElem>>> {
    let n = public.n();
    let f = public.field();
    check_block(f, n, y)?;
    if relations.is_empty() {
        return Err(Error::InvalidParams("no relations to apply".into()));
    }
    let dot = |r: &BilinearRelation, i: usize| {
        (0..n).fold(r.coeff(i, n), |acc, j| {
            f.add(&acc, &f.mul(&r.coeff(i, j), &y[j]))
        })
    };
    let rows = relations
        .iter()
        .map(|r| (0..n).map(|i| dot(r, i)).collect())
        .collect();
    let rhs: Vec<FqElem> = relations.iter().map(|r| f.neg(&dot(r, n))).collect();
    let Some(space) = Matrix::from_rows(rows)?.solve(f, &rhs) else {
        return Ok(Vec::new());
    };
    if space.dimension() > max_dimension {
        return Err(Error::BudgetExceeded(format!(
            "relations leave a space of dimension {}",
            space.dimension()
        )));
    }
    let points = space
        .enumerate(f, u64::MAX)
        .ok_or_else(|| Error::BudgetExceeded("solution space too large".into()))?;
    let mut out = Vec::new();
    for x in points {
        if public.accepts(&x, y)? {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatarinReport {
    pub relation_dimension: usize,
    pub samples_used: usize,
    pub trials: usize,
    pub recovered: usize,
    pub recovery_rate: f64,
    /// Nonzero relation space and a recovery rate of at least 99%.
    pub success: bool,
}

/// Collects relations, then attacks `trials` fresh ciphertexts.
pub fn patarin_attack(
    public: &dyn PublicMap,
    sample_count: usize,
    trials: usize,
    seed: u64,
    max_dimension: usize,
) -> Result<PatarinReport> {
    let relations = patarin_collect(public, sample_count, seed)?;
    let n = public.n();
    let f = public.field();
    let mut attempted = 0;
    let mut recovered = 0;
    if !relations.is_empty() {
        let outcomes = (0..trials as u64)
            .into_par_iter()
            .map(|i| -> Result<Option<bool>> {
                let mut rng = Prng::for_index(seed ^ 0x5eed, domain::PATARIN, i);
                let x: Vec<FqElem> = (0..n).map(|_| f.random(&mut rng)).collect();
                let Some(y) = public.forward(&x)? else {
                    return Ok(None);
                };
                Ok(Some(match patarin_recover(&relations, public, &y, max_dimension) {
                    Ok(found) => found.contains(&x),
                    Err(Error::BudgetExceeded(_)) => false,
                    Err(e) => return Err(e),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        for hit in outcomes.into_iter().flatten() {
            attempted += 1;
            recovered += usize::from(hit);
        }
    }
    let recovery_rate = if attempted == 0 {
        0.0
    } else {
        recovered as f64 / attempted as f64
    };
    Ok(PatarinReport {
        relation_dimension: relations.len(),
        samples_used: sample_count,
        trials: attempted,
        recovered,
        recovery_rate,
        success: !relations.is_empty() && recovery_rate >= 0.99,
    })
}

/// Tries every block (or every alphabet-valid block) against `y`.
pub fn exhaustive_attack(
    public: &dyn PublicMap,
    y: &[FqElem],
    alphabet: Option<&Alphabet>,
    budget: u128,
) -> Result<Vec<Vec<FqElem>>> {
    let n = public.n();
    let f = public.field();
    check_block(f, n, y)?;
    let (slots, choices): (usize, Vec<Vec<FqElem>>) = match alphabet {
        Some(a) => {
            let reps = (0..a.letter_count())
                .flat_map(|l| a.representatives(l).iter().cloned())
                .collect();
            (a.letters_per_block(n)?, reps)
        }
        None => (n, f.elements().map(|e| vec![e]).collect()),
    };
    let radix = choices.len() as u128;
    let space = radix
        .checked_pow(slots as u32)
        .filter(|&s| s <= budget)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!("{radix}^{slots} blocks exceed the budget of {budget}"))
        })?;
    let found: Vec<Option<Vec<FqElem>>> = (0..space as u64)
        .into_par_iter()
        .map(|mut idx| -> Result<Option<Vec<FqElem>>> {
            let mut x = Vec::with_capacity(n);
            for _ in 0..slots {
                x.extend_from_slice(&choices[(idx % radix as u64) as usize]);
                idx /= radix as u64;
            }
            x.resize(n, FqElem::ZERO);
            Ok(public.accepts(&x, y)?.then_some(x))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// The coordinates of `u·v^{q^θ} − u^{q^{2θ}}·v` for concrete `u, v`.
pub fn patarin_identity_residue(ctx: &ExtensionContext, theta: u32, u: &KElem, v: &KElem) -> Result<KElem> {
    let lhs = ctx.mul(u, &ctx.frobenius_apply(v, theta as usize % ctx.n())?);
    let rhs = ctx.mul(&ctx.frobenius_apply(u, (2 * theta as usize) % ctx.n())?, v);
    Ok(ctx.sub(&lhs, &rhs))
}
