//! The HPE cryptosystem: a secret bivariate polynomial `f(X, Y)` over `K`,
//! hidden behind affine masks `u = A·x + c`, `v = B·y + d`.
//!
//! Public equations are the `n` coordinates of `f(u, v)` written in the
//! `2n` variables `x, y`. They are linear in `y`, so encryption is Gaussian
//! elimination; decryption finds the roots of the univariate `f(X, v)`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::codec::{decode_block, encode_message, next_retry, Alphabet, BlockEncoding, RetryOutcome, RetryState};
use crate::error::{Error, Result};
use crate::gf::{BaseField, ExtensionContext, Field, FieldSpec, FqElem, KElem};
use crate::linalg::{AffineSolution, Matrix};
use crate::poly::{
    partial_eval_bivariate, roots_in_k, sym_add, sym_frobenius, sym_mul, sym_scale, MultiPolyFq,
    SymbolicFieldElement,
};
use crate::rng::{domain, Prng};

/// Attempts at drawing a monomial set that meets every shape constraint.
const SHAPE_ATTEMPTS: usize = 10_000;
/// Full key draws before giving up on the nonlinearity requirement.
const KEY_ATTEMPTS: usize = 64;

#[derive(Clone, Debug)]
pub struct HpeParams {
    pub spec: FieldSpec,
    pub n: usize,
    pub t_max: usize,
    pub monomial_count: usize,
    pub theta_x_max: u32,
    /// Upper bound on `deg_X f`; `None` means `2q`.
    pub root_degree_bound: Option<u128>,
    pub seed: u64,
}

impl HpeParams {
    /// Defaults: `t_max + 1` monomials, `θ ≤ 1` on x factors.
    pub fn new(spec: FieldSpec, n: usize, t_max: usize, seed: u64) -> Self {
        HpeParams {
            spec,
            n,
            t_max,
            monomial_count: t_max + 1,
            theta_x_max: 1,
            root_degree_bound: None,
            seed,
        }
    }

    pub fn degree_bound(&self) -> u128 {
        self.root_degree_bound.unwrap_or(2 * self.spec.q() as u128)
    }

    fn validate(&self) -> Result<()> {
        if self.t_max < 2 {
            return Err(Error::InvalidParams(format!(
                "t_max must be at least 2, got {}",
                self.t_max
            )));
        }
        if self.monomial_count < 2 {
            return Err(Error::InvalidParams(
                "at least two monomials are needed".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::DegreeTooSmall(self.n));
        }
        if self.theta_x_max as usize >= self.n {
            return Err(Error::InvalidParams(format!(
                "theta_x_max = {} must be below n = {}",
                self.theta_x_max, self.n
            )));
        }
        if self.degree_bound() < 2 {
            return Err(Error::InvalidParams(
                "root degree bound admits no pure-x monomial".into(),
            ));
        }
        Ok(())
    }
}

/// `coeff · Π_k X^{q^θ_k} · Y^{q^θ_y}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateMonomial {
    pub coeff: KElem,
    pub x_thetas: Vec<u32>,
    pub y_theta: Option<u32>,
}

impl PrivateMonomial {
    pub fn x_degree(&self, q: u64) -> u128 {
        self.x_thetas.iter().map(|&t| (q as u128).pow(t)).sum()
    }

    pub fn y_degree(&self, q: u64) -> u128 {
        self.y_theta.map_or(0, |t| (q as u128).pow(t))
    }

    /// Number of field-variable factors, `n_i + n_j`.
    pub fn weight(&self) -> usize {
        self.x_thetas.len() + usize::from(self.y_theta.is_some())
    }
}

/// `z ↦ M·z + shift` over `F_q^n`, with `M⁻¹` cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMask {
    matrix: Matrix,
    inverse: Matrix,
    shift: KElem,
}

impl AffineMask {
    pub fn new(f: &BaseField, matrix: Matrix, shift: KElem) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != shift.coords().len() {
            return Err(Error::DimensionMismatch {
                expected: shift.coords().len(),
                got: matrix.rows(),
            });
        }
        let inverse = matrix
            .inverse(f)
            .ok_or_else(|| Error::InvalidKey("mask matrix is singular".into()))?;
        Ok(AffineMask {
            matrix,
            inverse,
            shift,
        })
    }

    pub fn identity(ctx: &ExtensionContext) -> Self {
        AffineMask {
            matrix: Matrix::identity(ctx.n()),
            inverse: Matrix::identity(ctx.n()),
            shift: ctx.zero(),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn shift(&self) -> &KElem {
        &self.shift
    }

    pub fn apply(&self, ctx: &ExtensionContext, z: &[FqElem]) -> KElem {
        let mz = self.matrix.mul_vec(ctx.base(), z);
        ctx.add(&KElem(mz), &self.shift)
    }

    pub fn unapply(&self, ctx: &ExtensionContext, w: &KElem) -> Vec<FqElem> {
        let diff = ctx.sub(w, &self.shift);
        self.inverse.mul_vec(ctx.base(), diff.coords())
    }
}

#[derive(Clone, Debug)]
pub struct HpePrivateKey {
    ctx: ExtensionContext,
    monomials: Vec<PrivateMonomial>,
    x_mask: AffineMask,
    y_mask: AffineMask,
    root_degree_bound: u128,
    seed: u64,
}

impl HpePrivateKey {
    /// Checks every structural constraint on the monomials and masks.
    ///
    /// Besides the shape rules, the monomials of top X-degree must all be
    /// pure-x with coefficients that do not cancel, so `f(X, v)` keeps its
    /// degree for every `v` and decryption never meets the zero polynomial.
    pub fn new(
        ctx: ExtensionContext,
        monomials: Vec<PrivateMonomial>,
        x_mask: AffineMask,
        y_mask: AffineMask,
        root_degree_bound: u128,
        seed: u64,
    ) -> Result<Self> {
        check_shapes(&ctx, &monomials, root_degree_bound)?;
        Self::new_unchecked(ctx, monomials, x_mask, y_mask, root_degree_bound, seed)
    }

    /// Only dimensions are checked; for deliberately degenerate keys.
    pub fn new_unchecked(
        ctx: ExtensionContext,
        monomials: Vec<PrivateMonomial>,
        x_mask: AffineMask,
        y_mask: AffineMask,
        root_degree_bound: u128,
        seed: u64,
    ) -> Result<Self> {
        let n = ctx.n();
        for mask in [&x_mask, &y_mask] {
            if mask.matrix.rows() != n || mask.shift.coords().len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: mask.matrix.rows(),
                });
            }
        }
        for m in &monomials {
            if m.coeff.coords().len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.coeff.coords().len(),
                });
            }
            if m.x_thetas
                .iter()
                .chain(&m.y_theta)
                .any(|&t| t as usize >= n)
            {
                return Err(Error::InvalidKey(format!(
                    "Frobenius exponent must be below n = {n}"
                )));
            }
        }
        Ok(HpePrivateKey {
            ctx,
            monomials,
            x_mask,
            y_mask,
            root_degree_bound,
            seed,
        })
    }

    pub fn ctx(&self) -> &ExtensionContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn monomials(&self) -> &[PrivateMonomial] {
        &self.monomials
    }

    pub fn x_mask(&self) -> &AffineMask {
        &self.x_mask
    }

    pub fn y_mask(&self) -> &AffineMask {
        &self.y_mask
    }

    pub fn root_degree_bound(&self) -> u128 {
        self.root_degree_bound
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `max (n_i + n_j)` over the monomials.
    pub fn t(&self) -> usize {
        self.monomials
            .iter()
            .map(PrivateMonomial::weight)
            .max()
            .unwrap_or(0)
    }

    pub fn x_degree(&self) -> u128 {
        let q = self.ctx.q();
        self.monomials
            .iter()
            .map(|m| m.x_degree(q))
            .max()
            .unwrap_or(0)
    }

    /// `f` as a map `(deg_X, deg_Y) → coefficient`.
    pub fn bivariate(&self) -> BTreeMap<(usize, u128), KElem> {
        let q = self.ctx.q();
        let mut out: BTreeMap<(usize, u128), KElem> = BTreeMap::new();
        for m in &self.monomials {
            let key = (m.x_degree(q) as usize, m.y_degree(q));
            let sum = match out.get(&key) {
                Some(prev) => self.ctx.add(prev, &m.coeff),
                None => m.coeff.clone(),
            };
            out.insert(key, sum);
        }
        out.retain(|_, a| !a.is_zero());
        out
    }

    /// `f(u, v)` evaluated directly in `K`.
    pub fn evaluate_f(&self, u: &KElem, v: &KElem) -> KElem {
        let ctx = &self.ctx;
        let mut acc = ctx.zero();
        for m in &self.monomials {
            let mut term = m.coeff.clone();
            for &t in &m.x_thetas {
                term = ctx.mul(&term, &frob(ctx, u, t));
            }
            if let Some(t) = m.y_theta {
                term = ctx.mul(&term, &frob(ctx, v, t));
            }
            acc = ctx.add(&acc, &term);
        }
        acc
    }
}

fn frob(ctx: &ExtensionContext, a: &KElem, t: u32) -> KElem {
    ctx.frobenius_apply(a, t as usize)
        .expect("exponent checked against n")
}

fn check_shapes(ctx: &ExtensionContext, monomials: &[PrivateMonomial], bound: u128) -> Result<()> {
    let q = ctx.q();
    let bad = |msg: &str| Err(Error::InvalidKey(msg.to_string()));
    if monomials.iter().any(|m| m.coeff.is_zero()) {
        return bad("monomial coefficients must be nonzero");
    }
    if monomials.iter().any(|m| m.x_thetas.len() == 1) {
        return bad("a monomial cannot carry a single x factor");
    }
    if monomials.iter().filter(|m| m.weight() == 0).count() > 1 {
        return bad("at most one constant monomial");
    }
    if !monomials.iter().any(|m| m.y_theta.is_some()) {
        return bad("no monomial contains y");
    }
    if monomials.iter().any(|m| m.x_degree(q) > bound) {
        return bad("X-degree exceeds the root-count bound");
    }
    let top = monomials.iter().map(|m| m.x_degree(q)).max().unwrap_or(0);
    if top == 0 {
        return bad("no monomial contains x");
    }
    let mut lead = ctx.zero();
    for m in monomials.iter().filter(|m| m.x_degree(q) == top) {
        if m.y_theta.is_some() {
            return bad("a top X-degree monomial contains y");
        }
        lead = ctx.add(&lead, &m.coeff);
    }
    if lead.is_zero() {
        return bad("top X-degree coefficients cancel");
    }
    Ok(())
}

/// One public equation: `Σ_j linear[j](x)·y_j + constant(x) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicEquation {
    pub linear: Vec<MultiPolyFq>,
    pub constant: MultiPolyFq,
}

impl PublicEquation {
    fn polys(&self) -> impl Iterator<Item = &MultiPolyFq> {
        self.linear.iter().chain(std::iter::once(&self.constant))
    }

    /// Highest x-degree among the terms.
    pub fn x_degree(&self) -> u32 {
        self.polys()
            .map(MultiPolyFq::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn term_count(&self) -> usize {
        self.polys().map(MultiPolyFq::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct HpePublicKey {
    field: BaseField,
    n: usize,
    equations: Vec<PublicEquation>,
    alphabet: Alphabet,
}

impl HpePublicKey {
    pub fn new(
        spec: &FieldSpec,
        n: usize,
        equations: Vec<PublicEquation>,
        alphabet: Alphabet,
    ) -> Result<Self> {
        if equations.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: equations.len(),
            });
        }
        for eq in &equations {
            if eq.linear.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: eq.linear.len(),
                });
            }
            if eq.polys().any(|p| p.nvars() != n) {
                return Err(Error::InvalidKey(
                    "public polynomial over the wrong variables".into(),
                ));
            }
        }
        let field = BaseField::new(spec);
        if alphabet.max_element() >= field.q() {
            return Err(Error::InvalidAlphabet("representative outside F_q".into()));
        }
        alphabet.letters_per_block(n)?;
        Ok(HpePublicKey {
            field,
            n,
            equations,
            alphabet,
        })
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Result<Self> {
        alphabet.letters_per_block(self.n)?;
        if alphabet.max_element() >= self.field.q() {
            return Err(Error::InvalidAlphabet("representative outside F_q".into()));
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    pub fn field(&self) -> &BaseField {
        &self.field
    }

    pub fn spec(&self) -> &FieldSpec {
        self.field.spec()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[PublicEquation] {
        &self.equations
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn term_count(&self) -> usize {
        self.equations.iter().map(PublicEquation::term_count).sum()
    }

    pub fn max_x_degree(&self) -> u32 {
        self.equations
            .iter()
            .map(PublicEquation::x_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn check_block(&self, z: &[FqElem]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        if z.iter().any(|e| e.index() >= self.field.q()) {
            return Err(Error::Malformed("block entry outside F_q".into()));
        }
        Ok(())
    }

    /// `M[i][j] = L_ij(x)` and `b[i] = -C_i(x)`.
    pub fn linear_system(&self, x: &[FqElem]) -> Result<(Matrix, Vec<FqElem>)> {
        self.check_block(x)?;
        let f = &self.field;
        let rows = self
            .equations
            .iter()
            .map(|eq| eq.linear.iter().map(|l| l.eval(f, x)).collect())
            .collect();
        let b = self
            .equations
            .iter()
            .map(|eq| f.neg(&eq.constant.eval(f, x)))
            .collect();
        Ok((Matrix::from_rows(rows)?, b))
    }

    /// Every `y` with `(x, y)` on the public equations.
    pub fn solution_space(&self, x: &[FqElem]) -> Result<Option<AffineSolution>> {
        let (m, b) = self.linear_system(x)?;
        Ok(m.solve(&self.field, &b))
    }

    /// Values of the public equations at `(x, y)`.
    pub fn evaluate(&self, x: &[FqElem], y: &[FqElem]) -> Result<Vec<FqElem>> {
        self.check_block(y)?;
        let (m, b) = self.linear_system(x)?;
        let f = &self.field;
        Ok(m.mul_vec(f, y)
            .iter()
            .zip(&b)
            .map(|(my, bi)| f.sub(my, bi))
            .collect())
    }

    pub fn accepts(&self, x: &[FqElem], y: &[FqElem]) -> Result<bool> {
        Ok(self.evaluate(x, y)?.iter().all(|v| v.is_zero()))
    }
}

pub fn keygen(params: &HpeParams) -> Result<(HpePrivateKey, HpePublicKey)> {
    params.validate()?;
    let ctx = ExtensionContext::build(&params.spec, params.n, params.seed)?;
    let mut rng = Prng::for_domain(params.seed, domain::KEYGEN);
    for _ in 0..KEY_ATTEMPTS {
        let monomials = sample_monomials(&ctx, params, &mut rng)?;
        let f = ctx.base();
        let (a, a_inv) = Matrix::random_invertible(f, params.n, &mut rng);
        let (b, b_inv) = Matrix::random_invertible(f, params.n, &mut rng);
        let c = ctx.random(&mut rng);
        let d = ctx.random(&mut rng);
        let x_mask = AffineMask {
            matrix: a,
            inverse: a_inv,
            shift: c,
        };
        let y_mask = AffineMask {
            matrix: b,
            inverse: b_inv,
            shift: d,
        };
        let private = HpePrivateKey::new(
            ctx.clone(),
            monomials,
            x_mask,
            y_mask,
            params.degree_bound(),
            params.seed,
        )?;
        let public = expand_public_key(&private)?;
        if check_nonlinearity(&public) {
            return Ok((private, public));
        }
    }
    Err(Error::RetryExhausted(KEY_ATTEMPTS))
}

/// The key `f = X^{q^θ+1} + Y` behind random masks. Its public map is the
/// Imai–Matsumoto map written implicitly; decryption is unique whenever
/// `gcd(q^θ + 1, q^n − 1) = 1`.
pub fn degenerate_keygen(spec: &FieldSpec, n: usize, theta: u32, seed: u64) -> Result<(HpePrivateKey, HpePublicKey)> {
    if theta == 0 || theta as usize >= n {
        return Err(Error::InvalidParams(format!("theta must lie in 1..{n}, got {theta}")));
    }
    let ctx = ExtensionContext::build(spec, n, seed)?;
    let mut rng = Prng::for_domain(seed, domain::KEYGEN);
    let f = ctx.base().clone();
    let (a, _) = Matrix::random_invertible(&f, n, &mut rng);
    let (b, _) = Matrix::random_invertible(&f, n, &mut rng);
    let c = ctx.random(&mut rng);
    let d = ctx.random(&mut rng);
    let monomials = vec![
        PrivateMonomial {
            coeff: ctx.one(),
            x_thetas: vec![0, theta],
            y_theta: None,
        },
        PrivateMonomial {
            coeff: ctx.one(),
            x_thetas: vec![],
            y_theta: Some(0),
        },
    ];
    let bound = (spec.q() as u128).pow(theta) + 1;
    let private = HpePrivateKey::new(
        ctx,
        monomials,
        AffineMask::new(&f, a, c)?,
        AffineMask::new(&f, b, d)?,
        bound.max(2 * spec.q() as u128),
        seed,
    )?;
    let public = expand_public_key(&private)?;
    Ok((private, public))
}

fn sample_monomials(
    ctx: &ExtensionContext,
    params: &HpeParams,
    rng: &mut Prng,
) -> Result<Vec<PrivateMonomial>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Shape {
        PureX,
        Mixed,
        PureY,
        Constant,
    }
    let t = params.t_max;
    let mut mandatory = Vec::new();
    if t >= 3 {
        mandatory.push(Shape::Mixed);
    }
    mandatory.push(Shape::PureY);
    mandatory.push(Shape::PureX);
    let mut optional = vec![Shape::PureX, Shape::PureY, Shape::Constant];
    if t >= 3 {
        optional.push(Shape::Mixed);
    }
    let q = ctx.q();
    let bound = params.degree_bound();
    for _ in 0..SHAPE_ATTEMPTS {
        let mut shapes = mandatory.clone();
        shapes.truncate(params.monomial_count.max(2));
        while shapes.len() < params.monomial_count {
            let s = optional[rng.below(optional.len() as u64) as usize];
            if s == Shape::Constant && shapes.contains(&Shape::Constant) {
                continue;
            }
            shapes.push(s);
        }
        if !shapes.contains(&Shape::PureX) && !shapes.contains(&Shape::Mixed) {
            continue;
        }
        let monomials: Vec<PrivateMonomial> = shapes
            .iter()
            .map(|&s| {
                let x_thetas = match s {
                    Shape::PureX => sample_decomposition(q, 2, t, params.theta_x_max, bound, rng),
                    Shape::Mixed => {
                        sample_decomposition(q, 2, t - 1, params.theta_x_max, bound, rng)
                    }
                    _ => Vec::new(),
                };
                let y_theta = matches!(s, Shape::Mixed | Shape::PureY)
                    .then(|| rng.below(params.n as u64) as u32);
                PrivateMonomial {
                    coeff: ctx.random_nonzero(rng),
                    x_thetas,
                    y_theta,
                }
            })
            .collect();
        // A mixed monomial whose x-factor is additive would leave the
        // equations bilinear, which the relation attack handles.
        let additive_mixed = monomials
            .iter()
            .any(|m| m.y_theta.is_some() && !m.x_thetas.is_empty() && q_weight(m.x_degree(q), q) < 2);
        if !additive_mixed && check_shapes(ctx, &monomials, bound).is_ok() {
            return Ok(monomials);
        }
    }
    Err(Error::InvalidParams(
        "no monomial set satisfies the degree constraints".into(),
    ))
}

/// Digit sum of `e` in base `q`: the degree of `X^e` as a function of the
/// coordinates of `X`.
fn q_weight(mut e: u128, q: u64) -> u128 {
    let mut w = 0;
    while e > 0 {
        w += e % q as u128;
        e /= q as u128;
    }
    w
}

/// Either the q-ary digits of a random exponent or a random sum of
/// q-powers, with between `lo` and `hi` terms.
fn sample_decomposition(
    q: u64,
    lo: usize,
    hi: usize,
    theta_max: u32,
    bound: u128,
    rng: &mut Prng,
) -> Vec<u32> {
    let random_sum = |rng: &mut Prng| {
        let len = rng.range_inclusive(lo as u64, hi as u64) as usize;
        let mut thetas: Vec<u32> = (0..len)
            .map(|_| rng.below(theta_max as u64 + 1) as u32)
            .collect();
        thetas.sort_unstable();
        thetas
    };
    if rng.coin() {
        for _ in 0..64 {
            let digits: Vec<u64> = (0..=theta_max).map(|_| rng.below(q)).collect();
            let weight: u64 = digits.iter().sum();
            let value: u128 = digits
                .iter()
                .enumerate()
                .map(|(k, &d)| d as u128 * (q as u128).pow(k as u32))
                .sum();
            if (lo as u64..=hi as u64).contains(&weight) && value <= bound {
                return digits
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &d)| std::iter::repeat_n(k as u32, d as usize))
                    .collect();
            }
        }
    }
    random_sum(rng)
}

/// Expands `f(A·x + c, B·y + d)` into the public equations.
pub fn expand_public_key(private: &HpePrivateKey) -> Result<HpePublicKey> {
    let equations = expand_equations(private)?;
    let ctx = private.ctx();
    let alphabet = Alphabet::default_for(ctx.base(), ctx.n())?;
    HpePublicKey::new(ctx.spec(), ctx.n(), equations, alphabet)
}

fn expand_equations(private: &HpePrivateKey) -> Result<Vec<PublicEquation>> {
    let ctx = private.ctx();
    let n = ctx.n();
    let nvars = 2 * n;
    let u =
        SymbolicFieldElement::affine(ctx, &private.x_mask.matrix, &private.x_mask.shift, 0, nvars);
    let v =
        SymbolicFieldElement::affine(ctx, &private.y_mask.matrix, &private.y_mask.shift, n, nvars);
    let mut powers: HashMap<(bool, u32), SymbolicFieldElement> = HashMap::new();
    for m in &private.monomials {
        for (is_y, t) in m
            .x_thetas
            .iter()
            .map(|&t| (false, t))
            .chain(m.y_theta.map(|t| (true, t)))
        {
            if let std::collections::hash_map::Entry::Vacant(e) = powers.entry((is_y, t)) {
                let base = if is_y { &v } else { &u };
                e.insert(sym_frobenius(ctx, base, t as usize)?);
            }
        }
    }
    let terms = private
        .monomials
        .par_iter()
        .map(|m| -> Result<SymbolicFieldElement> {
            let mut factors = m
                .x_thetas
                .iter()
                .map(|&t| &powers[&(false, t)])
                .chain(m.y_theta.map(|t| &powers[&(true, t)]));
            let Some(first) = factors.next() else {
                return Ok(SymbolicFieldElement::constant(ctx, &m.coeff, nvars));
            };
            let mut prod = first.clone();
            for factor in factors {
                prod = sym_mul(ctx, &prod, factor)?;
            }
            sym_scale(ctx, &m.coeff, &prod)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = SymbolicFieldElement::zero(ctx, nvars);
    for term in &terms {
        total = sym_add(ctx, &total, term)?;
    }
    total
        .into_coords()
        .iter()
        .map(|p| split_y_linear(ctx.base(), p, n))
        .collect()
}

pub(crate) fn split_y_linear(f: &BaseField, p: &MultiPolyFq, n: usize) -> Result<PublicEquation> {
    let mut linear = vec![Vec::new(); n];
    let mut constant = Vec::new();
    for (mono, &c) in p.terms() {
        let (xs, ys) = mono.exps().split_at(n);
        let y_vars: Vec<usize> = (0..n).filter(|&j| ys[j] != 0).collect();
        match y_vars.as_slice() {
            [] => constant.push((xs.to_vec(), c)),
            [j] if ys[*j] == 1 => linear[*j].push((xs.to_vec(), c)),
            _ => {
                return Err(Error::InvalidKey(
                    "expanded equation is not linear in y".into(),
                ))
            }
        }
    }
    Ok(PublicEquation {
        linear: linear
            .into_iter()
            .map(|terms| MultiPolyFq::from_terms(f, n, terms))
            .collect::<Result<_>>()?,
        constant: MultiPolyFq::from_terms(f, n, constant)?,
    })
}

/// True iff every equation has a term of x-degree at least 2.
pub fn check_nonlinearity(public: &HpePublicKey) -> bool {
    public.equations.iter().all(|eq| eq.x_degree() >= 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EncryptOutcome {
    Ciphertext(Vec<FqElem>),
    /// The system for this block has no solution; re-encode and retry.
    RetryNeeded,
}

/// Solves the public equations for `y`; free variables are set to zero.
pub fn encrypt_block(public: &HpePublicKey, x: &[FqElem]) -> Result<EncryptOutcome> {
    let (m, b) = public.linear_system(x)?;
    let f = &public.field;
    let degenerate = (0..m.rows()).all(|i| b[i].is_zero() && m.row(i).iter().all(|e| e.is_zero()));
    if degenerate {
        return Ok(EncryptOutcome::RetryNeeded);
    }
    Ok(match m.solve(f, &b) {
        Some(sol) => EncryptOutcome::Ciphertext(sol.particular),
        None => EncryptOutcome::RetryNeeded,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub x: Vec<FqElem>,
    /// The symbols the block spells, when it is a valid alphabet block.
    pub decoded: Option<Vec<u8>>,
}

/// Every `u` with `f(u, v) = 0`, where `v = B·y + d`.
pub fn private_roots(private: &HpePrivateKey, y: &[FqElem]) -> Result<Vec<KElem>> {
    let ctx = private.ctx();
    if y.len() != ctx.n() {
        return Err(Error::DimensionMismatch {
            expected: ctx.n(),
            got: y.len(),
        });
    }
    if y.iter().any(|e| e.index() >= ctx.base().q()) {
        return Err(Error::Malformed("block entry outside F_q".into()));
    }
    let v = private.y_mask.apply(ctx, y);
    let g = partial_eval_bivariate(ctx, &private.bivariate(), &v)?;
    if g.is_zero() {
        return Ok(Vec::new());
    }
    roots_in_k(ctx, &g, private.seed)
}

/// All preimages of `y`, alphabet-decodable candidates first.
pub fn decrypt_block(
    private: &HpePrivateKey,
    public: &HpePublicKey,
    y: &[FqElem],
) -> Result<Vec<Candidate>> {
    let ctx = private.ctx();
    let mut candidates: Vec<Candidate> = private_roots(private, y)?
        .iter()
        .map(|u| {
            let x = private.x_mask.unapply(ctx, u);
            let decoded = decode_block(public.alphabet(), &x);
            Candidate { x, decoded }
        })
        .collect();
    candidates.sort_by_key(|c| c.decoded.is_none());
    Ok(candidates)
}

/// Default cap on re-encodings per block.
pub const DEFAULT_MAX_RETRIES: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedMessage {
    pub blocks: Vec<Vec<FqElem>>,
    /// Re-encodings used per block.
    pub retries: Vec<u64>,
}

/// Runs `attempt` on a block and its re-encodings until it yields a
/// ciphertext. Fails after `max_retries` re-encodings or when the
/// representative choices run out.
pub(crate) fn with_retries(
    alpha: &Alphabet,
    enc: &BlockEncoding,
    seed: u64,
    block_index: u64,
    max_retries: u64,
    mut attempt: impl FnMut(&[FqElem]) -> Result<EncryptOutcome>,
) -> Result<(Vec<FqElem>, u64)> {
    let mut state = RetryState::new(alpha, enc, seed, block_index);
    let mut current = enc.clone();
    let mut retries = 0;
    loop {
        if let EncryptOutcome::Ciphertext(y) = attempt(&current.block)? {
            return Ok((y, retries));
        }
        if retries >= max_retries {
            return Err(Error::RetryExhausted(retries as usize + 1));
        }
        match next_retry(alpha, enc, &mut state) {
            RetryOutcome::Next(e) => current = e,
            RetryOutcome::Exhausted => return Err(Error::RetryExhausted(retries as usize + 1)),
        }
        retries += 1;
    }
}

/// Encodes `message` with the key's alphabet and encrypts every block,
/// re-encoding blocks whose system has no solution.
pub fn encrypt_message(public: &HpePublicKey, message: &[u8], seed: u64, max_retries: u64) -> Result<EncryptedMessage> {
    let alpha = public.alphabet();
    let mut out = EncryptedMessage {
        blocks: Vec::new(),
        retries: Vec::new(),
    };
    for (i, enc) in encode_message(alpha, message, public.n())?.iter().enumerate() {
        let (y, r) = with_retries(alpha, enc, seed, i as u64, max_retries, |x| encrypt_block(public, x))?;
        out.blocks.push(y);
        out.retries.push(r);
    }
    Ok(out)
}

/// Candidates for every block, decodable ones first.
pub fn decrypt_message(
    private: &HpePrivateKey,
    public: &HpePublicKey,
    blocks: &[Vec<FqElem>],
) -> Result<Vec<Vec<Candidate>>> {
    blocks
        .par_iter()
        .map(|y| decrypt_block(private, public, y))
        .collect()
}

/// The message spelled by the first decodable candidate of each block,
/// or `None` when some block has no decodable candidate.
pub fn assemble_message(candidates: &[Vec<Candidate>]) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    for block in candidates {
        out.extend(block.first()?.decoded.as_ref()?);
    }
    Some(out)
}
