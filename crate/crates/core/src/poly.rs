//! Univariate polynomials over `K` with complete root enumeration, and the
//! symbolic `K`-algebra used to expand public keys.
//!
//! Symbolic arithmetic lives in the quotient ring
//! `F_q[x, y] / (x_i^q - x_i, y_j^q - y_j)`: every exponent stays below `q`,
//! which never changes a value at an `F_q`-point.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::{BaseField, ExtensionContext, Field, FqElem, KElem};
use crate::linalg::Matrix;
use crate::rng::{domain, Prng};
use crate::upoly;

/// Largest field on which [`brute_roots`] will run.
pub const BRUTE_FORCE_LIMIT: u128 = 1 << 16;

/// A polynomial in `K[X]`, constant term first, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPolyK(Vec<KElem>);

impl UniPolyK {
    pub fn new(ctx: &ExtensionContext, coeffs: Vec<KElem>) -> Result<Self> {
        for c in &coeffs {
            if c.coords().len() != ctx.n() {
                return Err(Error::DimensionMismatch {
                    expected: ctx.n(),
                    got: c.coords().len(),
                });
            }
        }
        Ok(UniPolyK(upoly::trim(ctx, coeffs)))
    }

    pub fn coeffs(&self) -> &[KElem] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        upoly::degree(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, ctx: &ExtensionContext, x: &KElem) -> KElem {
        upoly::eval(ctx, &self.0, x)
    }
}

fn sorted(ctx: &ExtensionContext, mut roots: Vec<KElem>) -> Vec<KElem> {
    roots.sort_by_key(|r| ctx.to_index(r));
    roots.dedup();
    roots
}

/// Every root of `g` in `K`, each once, sorted by element index.
///
/// `gcd(g, X^{q^n} - X)` isolates the distinct linear factors, which are
/// then split by trace maps (characteristic 2) or by
/// `(X + δ)^{(q^n-1)/2} - 1` (odd characteristic), with `δ` drawn from the
/// `poly/roots` stream of `seed`.
pub fn roots_in_k(ctx: &ExtensionContext, g: &UniPolyK, seed: u64) -> Result<Vec<KElem>> {
    if g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut rng = Prng::for_domain(seed, domain::ROOTS);
    Ok(sorted(ctx, upoly::roots(ctx, &g.0, &mut rng)))
}

/// Whether `g` has a root in `K`: `gcd(g, X^{q^n} - X)` is nonconstant.
pub fn has_root_in_k(ctx: &ExtensionContext, g: &UniPolyK) -> Result<bool> {
    if g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if g.degree() == Some(0) {
        return Ok(false);
    }
    let x = vec![ctx.zero(), ctx.one()];
    let xq = upoly::powmod(ctx, &x, ctx.size(), &g.0);
    let h = upoly::sub(ctx, &xq, &x);
    Ok(upoly::degree(&upoly::gcd(ctx, &g.0, &h)).is_some_and(|d| d > 0))
}

/// Evaluates `g` at every element of `K` (reference oracle).
pub fn brute_roots(ctx: &ExtensionContext, g: &UniPolyK) -> Result<Vec<KElem>> {
    if ctx.size() > BRUTE_FORCE_LIMIT {
        return Err(Error::FieldTooLarge(format!(
            "q^n = {} exceeds the brute-force limit {BRUTE_FORCE_LIMIT}",
            ctx.size()
        )));
    }
    Ok(ctx
        .elements()
        .filter(|a| g.eval(ctx, a).is_zero())
        .collect())
}

/// `g(X) = Σ_i (Σ_j a_ij v^j) X^i` for `f = Σ a_ij X^i Y^j`, keyed by `(i, j)`.
pub fn partial_eval_bivariate(
    ctx: &ExtensionContext,
    f: &BTreeMap<(usize, u128), KElem>,
    v: &KElem,
) -> Result<UniPolyK> {
    let max_i = f.keys().map(|&(i, _)| i).max().unwrap_or(0);
    let mut coeffs = vec![ctx.zero(); max_i + 1];
    for (&(i, j), a) in f {
        if a.coords().len() != ctx.n() {
            return Err(Error::DimensionMismatch {
                expected: ctx.n(),
                got: a.coords().len(),
            });
        }
        let term = if j == 0 {
            a.clone()
        } else {
            ctx.mul(a, &ctx.pow_unchecked(v, j))
        };
        coeffs[i] = ctx.add(&coeffs[i], &term);
    }
    UniPolyK::new(ctx, coeffs)
}

/// Exponent vector, ordered graded-lexicographically with
/// `x_1 < … < x_n < y_1 < … < y_n`: total degree first, then the exponent
/// of the largest variable, and so on downwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            degree: 0,
            exps: vec![0; nvars].into_boxed_slice(),
        }
    }

    pub fn new(exps: Vec<u16>) -> Self {
        Monomial {
            degree: exps.iter().map(|&e| e as u32).sum(),
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::new(e)
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Degree counted over the variables in `range`.
    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.exps[range].iter().map(|&e| e as u32).sum()
    }

    /// Product reduced by `z^q = z`.
    fn mul_reduced(&self, other: &Monomial, q: u32) -> Monomial {
        let exps: Vec<u16> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(&a, &b)| {
                let e = a as u32 + b as u32;
                (if e >= q { e - (q - 1) } else { e }) as u16
            })
            .collect();
        Self::new(exps)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.iter().rev().cmp(other.exps.iter().rev()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial over `F_q` in `nvars` variables, exponents below `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPolyFq {
    nvars: usize,
    terms: BTreeMap<Monomial, FqElem>,
}

impl MultiPolyFq {
    pub fn zero(nvars: usize) -> Self {
        MultiPolyFq {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: FqElem) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), FqElem::ONE);
        p
    }

    /// Builds from raw terms, merging duplicates and reducing exponents
    /// into the quotient ring.
    pub fn from_terms(
        f: &BaseField,
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u16>, FqElem)>,
    ) -> Result<Self> {
        let q = f.q();
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            if c.index() >= q {
                return Err(Error::Malformed("coefficient outside F_q".into()));
            }
            let exps = exps
                .into_iter()
                .map(|e| {
                    let e = e as u32;
                    (if e >= q { (e - 1) % (q - 1) + 1 } else { e }) as u16
                })
                .collect();
            p.add_term(f, Monomial::new(exps), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FqElem)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree).max().unwrap_or(0)
    }

    pub fn max_degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(range.clone()))
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, f: &BaseField, m: Monomial, c: FqElem) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = f.add(e.get(), &c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `self += scalar · other`.
    pub fn add_scaled(&mut self, f: &BaseField, other: &MultiPolyFq, scalar: FqElem) {
        if scalar.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(f, m.clone(), f.mul(c, &scalar));
        }
    }

    pub fn add(&self, f: &BaseField, other: &MultiPolyFq) -> MultiPolyFq {
        let mut out = self.clone();
        out.add_scaled(f, other, FqElem::ONE);
        out
    }

    pub fn mul(&self, f: &BaseField, other: &MultiPolyFq) -> MultiPolyFq {
        let q = f.q();
        let mut out = MultiPolyFq::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(f, ma.mul_reduced(mb, q), f.mul(ca, cb));
            }
        }
        out
    }

    pub fn eval(&self, f: &BaseField, point: &[FqElem]) -> FqElem {
        assert_eq!(point.len(), self.nvars, "dimension mismatch");
        let mut acc = FqElem::ZERO;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (&e, x) in m.exps.iter().zip(point) {
                if e == 0 {
                    continue;
                }
                t = f.mul(&t, &f.pow(*x, e as u64));
                if t.is_zero() {
                    break;
                }
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    /// Keeps the first `keep` variables, which must be the only ones present.
    pub fn restrict_vars(&self, keep: usize) -> MultiPolyFq {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                debug_assert!(m.exps[keep..].iter().all(|&e| e == 0));
                (Monomial::new(m.exps[..keep].to_vec()), *c)
            })
            .collect();
        MultiPolyFq { nvars: keep, terms }
    }

    /// Pads with `extra` trailing variables of exponent zero.
    pub fn extend_vars(&self, extra: usize) -> MultiPolyFq {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.exps.to_vec();
                e.resize(self.nvars + extra, 0);
                (Monomial::new(e), *c)
            })
            .collect();
        MultiPolyFq {
            nvars: self.nvars + extra,
            terms,
        }
    }
}

/// A `K`-valued expression: `n` coordinate polynomials over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicFieldElement {
    coords: Vec<MultiPolyFq>,
}

impl SymbolicFieldElement {
    pub fn coords(&self) -> &[MultiPolyFq] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<MultiPolyFq> {
        self.coords
    }

    pub fn nvars(&self) -> usize {
        self.coords.first().map_or(0, |c| c.nvars())
    }

    pub fn constant(ctx: &ExtensionContext, a: &KElem, nvars: usize) -> Self {
        SymbolicFieldElement {
            coords: a
                .coords()
                .iter()
                .map(|&c| MultiPolyFq::constant(nvars, c))
                .collect(),
        }
        .checked(ctx)
    }

    pub fn zero(ctx: &ExtensionContext, nvars: usize) -> Self {
        Self::constant(ctx, &ctx.zero(), nvars)
    }

    /// `M · (z_offset, …, z_{offset+n-1}) + shift`, coordinatewise.
    pub fn affine(
        ctx: &ExtensionContext,
        matrix: &Matrix,
        shift: &KElem,
        offset: usize,
        nvars: usize,
    ) -> Self {
        let f = ctx.base();
        let n = ctx.n();
        let coords = (0..n)
            .map(|i| {
                let mut p = MultiPolyFq::constant(nvars, shift.coords()[i]);
                for j in 0..n {
                    p.add_term(f, Monomial::var(nvars, offset + j), matrix[(i, j)]);
                }
                p
            })
            .collect();
        SymbolicFieldElement { coords }
    }

    /// The element whose coordinates are the variables `z_offset..z_{offset+n}`.
    pub fn variables(ctx: &ExtensionContext, offset: usize, nvars: usize) -> Self {
        Self::affine(ctx, &Matrix::identity(ctx.n()), &ctx.zero(), offset, nvars)
    }

    fn checked(self, ctx: &ExtensionContext) -> Self {
        debug_assert_eq!(self.coords.len(), ctx.n());
        self
    }

    pub fn evaluate(&self, ctx: &ExtensionContext, point: &[FqElem]) -> KElem {
        KElem(
            self.coords
                .iter()
                .map(|p| p.eval(ctx.base(), point))
                .collect(),
        )
    }
}

fn check_sym(ctx: &ExtensionContext, a: &SymbolicFieldElement) -> Result<()> {
    if a.coords.len() != ctx.n() {
        return Err(Error::DimensionMismatch {
            expected: ctx.n(),
            got: a.coords.len(),
        });
    }
    Ok(())
}

pub fn sym_add(
    ctx: &ExtensionContext,
    a: &SymbolicFieldElement,
    b: &SymbolicFieldElement,
) -> Result<SymbolicFieldElement> {
    check_sym(ctx, a)?;
    check_sym(ctx, b)?;
    Ok(SymbolicFieldElement {
        coords: a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x.add(ctx.base(), y))
            .collect(),
    })
}

/// `(ab)_ℓ = Σ_{i,j} a_i b_j m_{ijℓ}` with quotient-ring coefficient
/// arithmetic. The tensor is symmetric, so each unordered pair `{i, j}`
/// is multiplied once.
pub fn sym_mul(
    ctx: &ExtensionContext,
    a: &SymbolicFieldElement,
    b: &SymbolicFieldElement,
) -> Result<SymbolicFieldElement> {
    check_sym(ctx, a)?;
    check_sym(ctx, b)?;
    if a.nvars() != b.nvars() {
        return Err(Error::DimensionMismatch {
            expected: a.nvars(),
            got: b.nvars(),
        });
    }
    let f = ctx.base();
    let n = ctx.n();
    let nvars = a.nvars();
    let mut out: Vec<MultiPolyFq> = (0..n).map(|_| MultiPolyFq::zero(nvars)).collect();
    for i in 0..n {
        for j in i..n {
            let mut prod = a.coords[i].mul(f, &b.coords[j]);
            if i != j {
                prod = prod.add(f, &a.coords[j].mul(f, &b.coords[i]));
            }
            if prod.is_zero() {
                continue;
            }
            for (l, o) in out.iter_mut().enumerate() {
                o.add_scaled(f, &prod, ctx.tensor(i, j, l));
            }
        }
    }
    Ok(SymbolicFieldElement { coords: out })
}

/// Multiplication by a constant of `K`.
pub fn sym_scale(
    ctx: &ExtensionContext,
    k: &KElem,
    a: &SymbolicFieldElement,
) -> Result<SymbolicFieldElement> {
    check_sym(ctx, a)?;
    let f = ctx.base();
    let n = ctx.n();
    let mut out: Vec<MultiPolyFq> = (0..n).map(|_| MultiPolyFq::zero(a.nvars())).collect();
    for (i, ki) in k.coords().iter().enumerate() {
        if ki.is_zero() {
            continue;
        }
        for (j, aj) in a.coords.iter().enumerate() {
            for (l, o) in out.iter_mut().enumerate() {
                let s = f.mul(ki, &ctx.tensor(i, j, l));
                o.add_scaled(f, aj, s);
            }
        }
    }
    Ok(SymbolicFieldElement { coords: out })
}

/// `a^{q^k}` as the row vector of polynomials times `P^{(k)}`. Sound
/// because the coefficients lie in `F_q` and the variables satisfy
/// `z^q = z` on `F_q`-points.
pub fn sym_frobenius(
    ctx: &ExtensionContext,
    a: &SymbolicFieldElement,
    k: usize,
) -> Result<SymbolicFieldElement> {
    check_sym(ctx, a)?;
    let p = ctx.frobenius_matrix(k)?;
    let f = ctx.base();
    let n = ctx.n();
    let mut out: Vec<MultiPolyFq> = (0..n).map(|_| MultiPolyFq::zero(a.nvars())).collect();
    for (i, ai) in a.coords.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            o.add_scaled(f, ai, p[i * n + j]);
        }
    }
    Ok(SymbolicFieldElement { coords: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;

    fn gf2_ext(modulus: &[u32]) -> ExtensionContext {
        let spec = FieldSpec::prime(2).unwrap();
        ExtensionContext::with_modulus(&spec, modulus.iter().map(|&c| FqElem(c)).collect()).unwrap()
    }

    fn poly(ctx: &ExtensionContext, coeffs: &[u128]) -> UniPolyK {
        UniPolyK::new(ctx, coeffs.iter().map(|&c| ctx.from_index(c)).collect()).unwrap()
    }

    #[test]
    fn roots_over_prime_field_view() {
        let f2 = BaseField::new(&FieldSpec::prime(2).unwrap());
        let g = vec![FqElem::ZERO, FqElem::ONE, FqElem::ONE];
        let mut r = upoly::roots(&f2, &g, &mut Prng::new(0));
        r.sort();
        assert_eq!(r, vec![FqElem::ZERO, FqElem::ONE]);
    }

    #[test]
    fn roots_in_f4_and_f8() {
        let f4 = gf2_ext(&[1, 1, 1]);
        let g = poly(&f4, &[1, 1, 1]);
        assert_eq!(
            roots_in_k(&f4, &g, 0).unwrap(),
            vec![f4.from_index(0b10), f4.from_index(0b11)]
        );
        let f8 = gf2_ext(&[1, 1, 0, 1]);
        let g = poly(&f8, &[0b011, 0, 0, 1]);
        assert_eq!(roots_in_k(&f8, &g, 3).unwrap(), vec![f8.from_index(0b010)]);
        assert_eq!(
            roots_in_k(&f8, &g, 3).unwrap(),
            brute_roots(&f8, &g).unwrap()
        );
    }

    #[test]
    fn brute_force_edge_cases() {
        let f4 = gf2_ext(&[1, 1, 1]);
        assert_eq!(
            brute_roots(&f4, &poly(&f4, &[0, 1])).unwrap(),
            vec![f4.zero()]
        );
        assert!(brute_roots(&f4, &poly(&f4, &[1])).unwrap().is_empty());
        assert!(roots_in_k(&f4, &poly(&f4, &[1]), 0).unwrap().is_empty());
        assert_eq!(
            roots_in_k(&f4, &poly(&f4, &[]), 0).unwrap_err(),
            Error::ZeroPolynomial
        );
        let big = ExtensionContext::build(&FieldSpec::prime(2).unwrap(), 17, 0).unwrap();
        assert!(matches!(
            brute_roots(&big, &poly(&big, &[0, 1])),
            Err(Error::FieldTooLarge(_))
        ));
    }

    #[test]
    fn partial_evaluation() {
        let f8 = gf2_ext(&[1, 1, 0, 1]);
        let v = f8.from_index(0b011);
        let mut f = BTreeMap::new();
        f.insert((3usize, 0u128), f8.one());
        f.insert((0, 1), f8.one());
        assert_eq!(
            partial_eval_bivariate(&f8, &f, &v).unwrap(),
            poly(&f8, &[0b011, 0, 0, 1])
        );
        let g0 = partial_eval_bivariate(&f8, &f, &f8.zero()).unwrap();
        assert_eq!(g0, poly(&f8, &[0, 0, 0, 1]));
        let c = f8.from_index(0b101);
        let mut constant = BTreeMap::new();
        constant.insert((0usize, 0u128), c.clone());
        assert_eq!(
            partial_eval_bivariate(&f8, &constant, &v).unwrap(),
            UniPolyK::new(&f8, vec![c]).unwrap()
        );
        // Like powers of X are merged.
        let mut merged = BTreeMap::new();
        merged.insert((1usize, 0u128), f8.one());
        merged.insert((1, 1), f8.one());
        let g = partial_eval_bivariate(&f8, &merged, &v).unwrap();
        assert_eq!(g, poly(&f8, &[0, 0b010]));
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let a = Monomial::new(vec![2, 0, 0]);
        let b = Monomial::new(vec![0, 0, 1]);
        let c = Monomial::new(vec![1, 1, 0]);
        let d = Monomial::new(vec![0, 2, 0]);
        assert!(b < a);
        assert!(a < c && c < d);
        assert!(Monomial::one(3) < b);
    }

    #[test]
    fn quotient_reduction_in_from_terms() {
        let f3 = BaseField::new(&FieldSpec::prime(3).unwrap());
        let p = MultiPolyFq::from_terms(&f3, 1, vec![(vec![5], FqElem::ONE)]).unwrap();
        // x^5 = x^3 x^2 = x^3 = x on F_3.
        let expect = MultiPolyFq::from_terms(&f3, 1, vec![(vec![1], FqElem::ONE)]).unwrap();
        assert_eq!(p, expect);
        for x in f3.elements() {
            assert_eq!(p.eval(&f3, &[x]), f3.pow(x, 5));
        }
    }

    #[test]
    fn symbolic_frobenius_in_f4() {
        let f4 = gf2_ext(&[1, 1, 1]);
        let a = SymbolicFieldElement::variables(&f4, 0, 2);
        let fa = sym_frobenius(&f4, &a, 1).unwrap();
        let x1 = MultiPolyFq::variable(2, 0);
        let x2 = MultiPolyFq::variable(2, 1);
        assert_eq!(fa.coords()[0], x1.add(f4.base(), &x2));
        assert_eq!(fa.coords()[1], x2);
        assert_eq!(sym_frobenius(&f4, &a, 0).unwrap(), a);
        let w = SymbolicFieldElement::constant(&f4, &f4.from_index(0b10), 2);
        let fw = sym_frobenius(&f4, &w, 1).unwrap();
        assert_eq!(
            fw,
            SymbolicFieldElement::constant(&f4, &f4.from_index(0b11), 2)
        );
    }

    #[test]
    fn symbolic_identities() {
        let f4 = gf2_ext(&[1, 1, 1]);
        let a = SymbolicFieldElement::variables(&f4, 0, 4);
        let one = SymbolicFieldElement::constant(&f4, &f4.one(), 4);
        let zero = SymbolicFieldElement::zero(&f4, 4);
        assert_eq!(sym_mul(&f4, &one, &a).unwrap(), a);
        assert_eq!(sym_mul(&f4, &zero, &a).unwrap(), zero);
    }
}
