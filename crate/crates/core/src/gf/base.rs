use super::{is_prime, Field};
use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::upoly;

/// Largest supported `q = p^m`. Elements are table-driven.
pub const MAX_BASE_ORDER: u64 = 1 << 16;

/// The ground field `F_q`, given as `p`, `m` and a monic irreducible
/// degree-`m` modulus over `F_p` (coefficients constant term first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    m: usize,
    fq_modulus: Vec<u64>,
}

impl FieldSpec {
    pub fn new(p: u64, m: usize, fq_modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidFieldSpec("m must be at least 1".into()));
        }
        match p.checked_pow(m as u32) {
            Some(q) if q <= MAX_BASE_ORDER => {}
            _ => {
                return Err(Error::FieldTooLarge(format!(
                    "q = {p}^{m} exceeds {MAX_BASE_ORDER}"
                )))
            }
        }
        if fq_modulus.len() != m + 1 {
            return Err(Error::InvalidFieldSpec(format!(
                "modulus must have {} coefficients, got {}",
                m + 1,
                fq_modulus.len()
            )));
        }
        if fq_modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidFieldSpec(
                "modulus coefficients must lie in [0, p)".into(),
            ));
        }
        if fq_modulus[m] != 1 {
            return Err(Error::InvalidFieldSpec("modulus must be monic".into()));
        }
        let prime = BaseField::prime(p);
        let poly: Vec<FqElem> = fq_modulus.iter().map(|&c| FqElem(c as u32)).collect();
        if !upoly::is_irreducible(&prime, &poly) {
            return Err(Error::NotIrreducible);
        }
        Ok(FieldSpec { p, m, fq_modulus })
    }

    /// `F_p` itself, with the `[0, 1]` modulus convention.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1, vec![0, 1])
    }

    /// `F_{p^m}` with the irreducible modulus that is smallest when its
    /// coefficient list is read as a base-`p` integer.
    pub fn with_default_modulus(p: u64, m: usize) -> Result<Self> {
        if m == 1 {
            return Self::prime(p);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = p
            .checked_pow(m as u32)
            .filter(|&q| q <= MAX_BASE_ORDER)
            .ok_or_else(|| Error::FieldTooLarge(format!("q = {p}^{m}")))?;
        let prime = BaseField::prime(p);
        for low in 0..q {
            let mut coeffs = digits(low, p, m);
            coeffs.push(1);
            let poly: Vec<FqElem> = coeffs.iter().map(|&c| FqElem(c as u32)).collect();
            if upoly::is_irreducible(&prime, &poly) {
                return Self::new(p, m, coeffs);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.m as u32)
    }

    pub fn fq_modulus(&self) -> &[u64] {
        &self.fq_modulus
    }
}

fn digits(mut x: u64, p: u64, m: usize) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

/// An element of `F_q`, packed as the base-`p` integer `Σ c_i p^i` of its
/// coefficient vector `(c_0, …, c_{m-1})`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqElem(pub(crate) u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// `F_q` with precomputed discrete log tables.
#[derive(Clone, Debug)]
pub struct BaseField {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for BaseField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for BaseField {}

impl BaseField {
    pub fn new(spec: &FieldSpec) -> Self {
        let q = spec.q() as u32;
        let mut field = BaseField {
            spec: spec.clone(),
            q,
            exp: Vec::new(),
            log: Vec::new(),
        };
        field.build_tables();
        field
    }

    fn prime(p: u64) -> Self {
        // Bypasses FieldSpec validation, which itself needs F_p.
        Self::new(&FieldSpec {
            p,
            m: 1,
            fq_modulus: vec![0, 1],
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn elem(&self, index: u32) -> Result<FqElem> {
        if index < self.q {
            Ok(FqElem(index))
        } else {
            Err(Error::Malformed(format!(
                "{index} is not an element index of F_{}",
                self.q
            )))
        }
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FqElem> {
        if coeffs.len() != self.spec.m {
            return Err(Error::DimensionMismatch {
                expected: self.spec.m,
                got: coeffs.len(),
            });
        }
        let p = self.spec.p;
        if coeffs.iter().any(|&c| c >= p) {
            return Err(Error::Malformed("coefficient not reduced mod p".into()));
        }
        Ok(FqElem(
            coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32,
        ))
    }

    pub fn coeffs(&self, a: FqElem) -> Vec<u64> {
        digits(a.0 as u64, self.spec.p, self.spec.m)
    }

    /// Multiplication by polynomial arithmetic mod `fq_modulus`; only used
    /// to build the tables.
    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p;
        let m = self.spec.m;
        let da = digits(a as u64, p, m);
        let db = digits(b as u64, p, m);
        let mut prod = vec![0u64; 2 * m];
        for i in 0..m {
            for j in 0..m {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        let modulus = &self.spec.fq_modulus;
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            for (k, &coef) in modulus.iter().enumerate().take(m + 1) {
                let idx = d - m + k;
                prod[idx] = (prod[idx] + (p - c) * coef) % p;
            }
        }
        prod.truncate(m);
        prod.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32
    }

    fn build_tables(&mut self) {
        let q = self.q;
        if q == 2 {
            self.exp = vec![1, 1];
            self.log = vec![0, 0];
            return;
        }
        for g in 2..q {
            let mut exp = Vec::with_capacity(2 * (q as usize - 1));
            let mut x = 1u32;
            let mut ok = true;
            for k in 0..q - 1 {
                if k > 0 && x == 1 {
                    ok = false;
                    break;
                }
                exp.push(x);
                x = self.mul_slow(x, g);
            }
            if !ok || x != 1 {
                continue;
            }
            let mut log = vec![0u32; q as usize];
            for (k, &e) in exp.iter().enumerate() {
                log[e as usize] = k as u32;
            }
            let tail = exp.clone();
            exp.extend(tail);
            self.exp = exp;
            self.log = log;
            return;
        }
        unreachable!("multiplicative group of a finite field is cyclic")
    }

    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        if e == 0 {
            return FqElem::ONE;
        }
        if a.0 == 0 {
            return FqElem::ZERO;
        }
        let order = (self.q - 1) as u64;
        let l = (self.log[a.0 as usize] as u64 * (e % order)) % order;
        FqElem(self.exp[l as usize])
    }

    pub fn from_int(&self, v: u64) -> FqElem {
        FqElem((v % self.spec.p) as u32)
    }
}

impl Field for BaseField {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        FqElem::ZERO
    }

    fn one(&self) -> FqElem {
        FqElem::ONE
    }

    fn is_zero(&self, a: &FqElem) -> bool {
        a.0 == 0
    }

    #[inline]
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let p = self.spec.p as u32;
        if p == 2 {
            return FqElem(a.0 ^ b.0);
        }
        if self.spec.m == 1 {
            return FqElem((a.0 + b.0) % p);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FqElem(out)
    }

    fn neg(&self, a: &FqElem) -> FqElem {
        let p = self.spec.p as u32;
        if p == 2 {
            return *a;
        }
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        FqElem(out)
    }

    fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.add(a, &self.neg(b))
    }

    #[inline]
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        let l = self.log[a.0 as usize] + self.log[b.0 as usize];
        FqElem(self.exp[l as usize])
    }

    fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if a.0 == 0 {
            return None;
        }
        let order = self.q - 1;
        let l = (order - self.log[a.0 as usize]) % order;
        Some(FqElem(self.exp[l as usize]))
    }

    fn characteristic(&self) -> u64 {
        self.spec.p
    }

    fn order(&self) -> u128 {
        self.q as u128
    }

    fn prime_degree(&self) -> u32 {
        self.spec.m as u32
    }

    fn random(&self, rng: &mut Prng) -> FqElem {
        FqElem(rng.below(self.q as u64) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(FieldSpec::prime(4), Err(Error::NotPrime(4)));
        assert!(matches!(
            FieldSpec::new(2, 2, vec![1, 0, 1]),
            Err(Error::NotIrreducible)
        ));
        assert!(FieldSpec::new(2, 2, vec![1, 1, 0]).is_err());
        assert!(FieldSpec::new(3, 2, vec![1, 0]).is_err());
        assert!(FieldSpec::with_default_modulus(2, 17).is_err());
    }

    #[test]
    fn default_moduli() {
        assert_eq!(
            FieldSpec::with_default_modulus(2, 8).unwrap().fq_modulus(),
            &[1, 1, 0, 1, 1, 0, 0, 0, 1]
        );
        assert_eq!(
            FieldSpec::with_default_modulus(3, 2).unwrap().fq_modulus(),
            &[1, 0, 1]
        );
        assert_eq!(FieldSpec::prime(5).unwrap().fq_modulus(), &[0, 1]);
    }

    #[test]
    fn tables_match_schoolbook() {
        for (p, m) in [(2, 1), (2, 4), (3, 1), (3, 3), (5, 2), (7, 1)] {
            let f = BaseField::new(&FieldSpec::with_default_modulus(p, m).unwrap());
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(&a, &b).0, f.mul_slow(a.0, b.0), "p={p} m={m}");
                }
                if !a.is_zero() {
                    assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), FqElem::ONE);
                }
                assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
            }
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let f = BaseField::new(&FieldSpec::with_default_modulus(3, 3).unwrap());
        for a in f.elements() {
            assert_eq!(f.from_coeffs(&f.coeffs(a)).unwrap(), a);
        }
    }
}
