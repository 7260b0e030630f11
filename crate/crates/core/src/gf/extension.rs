use super::{BaseField, Field, FieldSpec, FqElem};
use crate::error::{Error, Result};
use crate::rng::{domain, Prng};
use crate::upoly;

/// An element of `K`: its coordinates in the power basis `1, ξ, …, ξ^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KElem(pub(crate) Vec<FqElem>);

impl KElem {
    pub fn coords(&self) -> &[FqElem] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<FqElem> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

/// `K = F_q[ξ]/(k_modulus)` with the data of its power basis `β_i = ξ^{i-1}`:
/// the Frobenius matrices `P^{(k)}` (row `i` holds the coordinates of
/// `β_i^{q^k}`) and the multiplication tensor `m_{ijℓ}` (the coordinates
/// of `β_i β_j`).
#[derive(Clone, Debug)]
pub struct ExtensionContext {
    base: BaseField,
    n: usize,
    k_modulus: Vec<FqElem>,
    frobenius: Vec<Vec<FqElem>>,
    mult_tensor: Vec<FqElem>,
}

impl PartialEq for ExtensionContext {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.k_modulus == other.k_modulus
    }
}

impl Eq for ExtensionContext {}

impl ExtensionContext {
    /// Samples a monic irreducible degree-`n` modulus from the seeded stream.
    pub fn build(spec: &FieldSpec, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegreeTooSmall(n));
        }
        let base = BaseField::new(spec);
        check_order(&base, n)?;
        let mut rng = Prng::for_domain(seed, domain::FIELD);
        loop {
            let mut poly: Vec<FqElem> = (0..n).map(|_| base.random(&mut rng)).collect();
            poly.push(FqElem::ONE);
            if upoly::is_irreducible(&base, &poly) {
                return Ok(Self::assemble(base, poly));
            }
        }
    }

    /// Uses the given monic irreducible modulus (constant term first).
    pub fn with_modulus(spec: &FieldSpec, k_modulus: Vec<FqElem>) -> Result<Self> {
        let base = BaseField::new(spec);
        let n = k_modulus.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::DegreeTooSmall(n));
        }
        check_order(&base, n)?;
        if k_modulus.iter().any(|c| c.0 >= base.q()) {
            return Err(Error::Malformed("modulus coefficient outside F_q".into()));
        }
        if k_modulus[n] != FqElem::ONE {
            return Err(Error::InvalidFieldSpec("K modulus must be monic".into()));
        }
        if !upoly::is_irreducible(&base, &k_modulus) {
            return Err(Error::NotIrreducible);
        }
        Ok(Self::assemble(base, k_modulus))
    }

    fn assemble(base: BaseField, k_modulus: Vec<FqElem>) -> Self {
        let n = k_modulus.len() - 1;
        let mut ctx = ExtensionContext {
            base,
            n,
            k_modulus,
            frobenius: Vec::new(),
            mult_tensor: Vec::new(),
        };

        let mut tensor = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                tensor.extend(ctx.mul(&ctx.basis(i), &ctx.basis(j)).0);
            }
        }
        ctx.mult_tensor = tensor;

        let q = ctx.base.q() as u128;
        let xi_q = ctx.pow_unchecked(&ctx.basis(1), q);
        let mut p1 = Vec::with_capacity(n * n);
        let mut row = ctx.one();
        for _ in 0..n {
            p1.extend(row.0.iter().copied());
            row = ctx.mul(&row, &xi_q);
        }
        let identity = ctx.identity_matrix();
        let mut mats = vec![identity];
        for k in 1..n {
            let prev = &mats[k - 1];
            mats.push(ctx.base_matmul(prev, &p1));
        }
        ctx.frobenius = mats;
        ctx
    }

    fn identity_matrix(&self) -> Vec<FqElem> {
        let n = self.n;
        let mut m = vec![FqElem::ZERO; n * n];
        for i in 0..n {
            m[i * n + i] = FqElem::ONE;
        }
        m
    }

    fn base_matmul(&self, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
        let n = self.n;
        let f = &self.base;
        let mut out = vec![FqElem::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = f.mul(&aik, &b[k * n + j]);
                    out[i * n + j] = f.add(&out[i * n + j], &t);
                }
            }
        }
        out
    }

    pub fn base(&self) -> &BaseField {
        &self.base
    }

    pub fn spec(&self) -> &FieldSpec {
        self.base.spec()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.base.q() as u64
    }

    /// `q^n`.
    pub fn size(&self) -> u128 {
        (self.base.q() as u128).pow(self.n as u32)
    }

    pub fn k_modulus(&self) -> &[FqElem] {
        &self.k_modulus
    }

    /// `P^{(k)}`, row-major `n × n`.
    pub fn frobenius_matrix(&self, k: usize) -> Result<&[FqElem]> {
        self.frobenius
            .get(k)
            .map(|m| m.as_slice())
            .ok_or(Error::FrobeniusIndex { k, n: self.n })
    }

    /// Tensor entry `m_{ijℓ}` (zero-based).
    #[inline]
    pub fn tensor(&self, i: usize, j: usize, l: usize) -> FqElem {
        self.mult_tensor[(i * self.n + j) * self.n + l]
    }

    /// `β_{i+1} = ξ^i`.
    pub fn basis(&self, i: usize) -> KElem {
        let mut c = vec![FqElem::ZERO; self.n];
        c[i] = FqElem::ONE;
        KElem(c)
    }

    pub fn from_coords(&self, coords: Vec<FqElem>) -> Result<KElem> {
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| c.0 >= self.base.q()) {
            return Err(Error::Malformed("coordinate outside F_q".into()));
        }
        Ok(KElem(coords))
    }

    /// Embeds `c ∈ F_q` as `c·β_1`.
    pub fn from_base(&self, c: FqElem) -> KElem {
        let mut v = vec![FqElem::ZERO; self.n];
        v[0] = c;
        KElem(v)
    }

    /// Element whose coordinates are the base-`q` digits of `index`.
    pub fn from_index(&self, mut index: u128) -> KElem {
        let q = self.base.q() as u128;
        KElem(
            (0..self.n)
                .map(|_| {
                    let d = index % q;
                    index /= q;
                    FqElem(d as u32)
                })
                .collect(),
        )
    }

    pub fn to_index(&self, a: &KElem) -> u128 {
        let q = self.base.q() as u128;
        a.0.iter().rev().fold(0, |acc, c| acc * q + c.0 as u128)
    }

    /// Every element of `K`, in index order.
    pub fn elements(&self) -> impl Iterator<Item = KElem> + '_ {
        (0..self.size()).map(|i| self.from_index(i))
    }

    fn check_dim(&self, a: &KElem) -> Result<()> {
        if a.0.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: a.0.len(),
            });
        }
        Ok(())
    }

    /// Product through schoolbook multiplication mod `k_modulus`.
    pub fn k_mul(&self, a: &KElem, b: &KElem) -> Result<KElem> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.mul(a, b))
    }

    /// Product through the multiplication tensor:
    /// `(ab)_ℓ = Σ_{i,j} a_i b_j m_{ijℓ}`.
    pub fn mul_via_tensor(&self, a: &KElem, b: &KElem) -> KElem {
        let f = &self.base;
        let mut out = vec![FqElem::ZERO; self.n];
        for (i, ai) in a.0.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.0.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let s = f.mul(ai, bj);
                for (l, o) in out.iter_mut().enumerate() {
                    *o = f.add(o, &f.mul(&s, &self.tensor(i, j, l)));
                }
            }
        }
        KElem(out)
    }

    /// Square-and-multiply; `0^0` is rejected.
    pub fn k_pow(&self, a: &KElem, e: u128) -> Result<KElem> {
        self.check_dim(a)?;
        if e == 0 && a.is_zero() {
            return Err(Error::ZeroToZero);
        }
        Ok(self.pow_unchecked(a, e))
    }

    /// Square-and-multiply with the convention `a^0 = 1`.
    pub fn pow_unchecked(&self, a: &KElem, mut e: u128) -> KElem {
        let mut result = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        result
    }

    /// `a^{q^k}` as the row vector `a · P^{(k)}`.
    pub fn frobenius_apply(&self, a: &KElem, k: usize) -> Result<KElem> {
        self.check_dim(a)?;
        let p = self.frobenius_matrix(k)?;
        Ok(self.apply_row_matrix(&a.0, p))
    }

    pub(crate) fn apply_row_matrix(&self, a: &[FqElem], p: &[FqElem]) -> KElem {
        let n = self.n;
        let f = &self.base;
        let mut out = vec![FqElem::ZERO; n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(o, &f.mul(ai, &p[i * n + j]));
            }
        }
        KElem(out)
    }

    pub fn k_inverse(&self, a: &KElem) -> Result<KElem> {
        self.check_dim(a)?;
        self.inv(a).ok_or(Error::ZeroInverse)
    }
}

fn check_order(base: &BaseField, n: usize) -> Result<()> {
    let bits = (base.q() as f64).log2() * n as f64;
    if bits > 120.0 {
        return Err(Error::FieldTooLarge(format!(
            "q^n = {}^{n} exceeds 2^120",
            base.q()
        )));
    }
    Ok(())
}

impl Field for ExtensionContext {
    type Elem = KElem;

    fn zero(&self) -> KElem {
        KElem(vec![FqElem::ZERO; self.n])
    }

    fn one(&self) -> KElem {
        self.from_base(FqElem::ONE)
    }

    fn is_zero(&self, a: &KElem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &KElem, b: &KElem) -> KElem {
        KElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| self.base.add(x, y))
                .collect(),
        )
    }

    fn sub(&self, a: &KElem, b: &KElem) -> KElem {
        KElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| self.base.sub(x, y))
                .collect(),
        )
    }

    fn neg(&self, a: &KElem) -> KElem {
        KElem(a.0.iter().map(|x| self.base.neg(x)).collect())
    }

    fn mul(&self, a: &KElem, b: &KElem) -> KElem {
        let n = self.n;
        let f = &self.base;
        let mut prod = vec![FqElem::ZERO; 2 * n - 1];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                let t = f.mul(x, y);
                prod[i + j] = f.add(&prod[i + j], &t);
            }
        }
        for d in (n..2 * n - 1).rev() {
            let c = prod[d];
            if c.is_zero() {
                continue;
            }
            for k in 0..n {
                let t = f.mul(&c, &self.k_modulus[k]);
                prod[d - n + k] = f.sub(&prod[d - n + k], &t);
            }
        }
        prod.truncate(n);
        KElem(prod)
    }

    fn inv(&self, a: &KElem) -> Option<KElem> {
        if a.is_zero() {
            return None;
        }
        let poly = upoly::trim(&self.base, a.0.clone());
        let mut inv = upoly::inverse_mod(&self.base, &poly, &self.k_modulus)?;
        inv.resize(self.n, FqElem::ZERO);
        Some(KElem(inv))
    }

    fn characteristic(&self) -> u64 {
        self.base.p()
    }

    fn order(&self) -> u128 {
        self.size()
    }

    fn prime_degree(&self) -> u32 {
        (self.base.m() * self.n) as u32
    }

    fn random(&self, rng: &mut Prng) -> KElem {
        KElem((0..self.n).map(|_| self.base.random(rng)).collect())
    }
}
