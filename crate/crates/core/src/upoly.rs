//! Dense univariate polynomials over any [`Field`], constant term first.
//!
//! All routines keep results trimmed: no trailing zeros, and the zero
//! polynomial is the empty vector.

use crate::gf::Field;
use crate::rng::Prng;

pub fn trim<F: Field>(f: &F, mut a: Vec<F::Elem>) -> Vec<F::Elem> {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
    a
}

pub fn degree<E>(a: &[E]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(f, out)
}

pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.sub(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => f.neg(y),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(f, out)
}

pub fn scale<F: Field>(f: &F, a: &[F::Elem], s: &F::Elem) -> Vec<F::Elem> {
    trim(f, a.iter().map(|c| f.mul(c, s)).collect())
}

pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = f.mul(x, y);
            out[i + j] = f.add(&out[i + j], &t);
        }
    }
    trim(f, out)
}

/// Quotient and remainder; panics on a zero divisor.
pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("trimmed polynomial has nonzero lead");
    let mut r: Vec<F::Elem> = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), trim(f, r));
    }
    let mut quot = vec![f.zero(); r.len() - db];
    for d in (db..r.len()).rev() {
        if f.is_zero(&r[d]) {
            continue;
        }
        let c = f.mul(&r[d], &lead_inv);
        for (k, bk) in b.iter().enumerate() {
            let t = f.mul(&c, bk);
            let idx = d - db + k;
            r[idx] = f.sub(&r[idx], &t);
        }
        quot[d - db] = c;
    }
    r.truncate(db);
    (trim(f, quot), trim(f, r))
}

pub fn rem<F: Field>(f: &F, a: &[F::Elem], m: &[F::Elem]) -> Vec<F::Elem> {
    divrem(f, a, m).1
}

pub fn monic<F: Field>(f: &F, a: &[F::Elem]) -> Vec<F::Elem> {
    match a.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = f.inv(lead).expect("nonzero lead");
            scale(f, a, &inv)
        }
    }
}

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn gcd<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let mut x = trim(f, a.to_vec());
    let mut y = trim(f, b.to_vec());
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

/// Inverse of `a` modulo `m` by extended Euclid, `None` when not coprime.
pub fn inverse_mod<F: Field>(f: &F, a: &[F::Elem], m: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let (mut r0, mut r1) = (m.to_vec(), rem(f, a, m));
    let (mut s0, mut s1): (Vec<F::Elem>, Vec<F::Elem>) = (Vec::new(), vec![f.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let inv = f.inv(&r0[0])?;
    Some(rem(f, &scale(f, &s0, &inv), m))
}

pub fn mulmod<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem], m: &[F::Elem]) -> Vec<F::Elem> {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod<F: Field>(f: &F, base: &[F::Elem], mut e: u128, m: &[F::Elem]) -> Vec<F::Elem> {
    let mut result = rem(f, &[f.one()], m);
    let mut b = rem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(f, &result, &b, m);
        }
        e >>= 1;
        if e > 0 {
            b = mulmod(f, &b, &b, m);
        }
    }
    result
}

pub fn eval<F: Field>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    a.iter()
        .rev()
        .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

fn x_poly<F: Field>(f: &F) -> Vec<F::Elem> {
    vec![f.zero(), f.one()]
}

/// Rabin-style test: `f` of degree `d` is irreducible iff
/// `gcd(f, X^{Q^i} - X) = 1` for every `1 ≤ i ≤ d/2`, with `Q = |field|`.
pub fn is_irreducible<F: Field>(f: &F, poly: &[F::Elem]) -> bool {
    let poly = monic(f, poly);
    let d = match degree(&poly) {
        None | Some(0) => return false,
        Some(d) => d,
    };
    if d == 1 {
        return true;
    }
    let x = x_poly(f);
    let mut xq = rem(f, &x, &poly);
    for _ in 1..=d / 2 {
        xq = powmod(f, &xq, f.order(), &poly);
        let g = gcd(f, &poly, &sub(f, &xq, &x));
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Every root of `g` in the field, each once, by `gcd(g, X^Q - X)`
/// followed by randomized equal-degree splitting into linear factors.
pub fn roots<F: Field>(f: &F, g: &[F::Elem], rng: &mut Prng) -> Vec<F::Elem> {
    let g = monic(f, g);
    if degree(&g).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let x = x_poly(f);
    let xq = powmod(f, &x, f.order(), &g);
    let split = gcd(f, &g, &sub(f, &xq, &x));
    let mut out = Vec::new();
    split_linear(f, split, rng, &mut out);
    out
}

fn split_linear<F: Field>(f: &F, r: Vec<F::Elem>, rng: &mut Prng, out: &mut Vec<F::Elem>) {
    match degree(&r) {
        None | Some(0) => {}
        Some(1) => out.push(f.neg(&r[0])),
        Some(d) => loop {
            let probe = splitting_probe(f, &r, rng);
            let h = gcd(f, &r, &probe);
            let dh = degree(&h).unwrap_or(0);
            if dh > 0 && dh < d {
                let (other, _) = divrem(f, &r, &h);
                split_linear(f, h, rng, out);
                split_linear(f, monic(f, &other), rng, out);
                return;
            }
        },
    }
}

/// In characteristic 2, the absolute trace `Σ_{i<k} (δX)^{2^i}`; otherwise
/// `(X + δ)^{(Q-1)/2} - 1`. Both reduced mod `r`.
fn splitting_probe<F: Field>(f: &F, r: &[F::Elem], rng: &mut Prng) -> Vec<F::Elem> {
    let delta = f.random_nonzero(rng);
    if f.characteristic() == 2 {
        let mut term = rem(f, &[f.zero(), delta], r);
        let mut acc = term.clone();
        for _ in 1..f.prime_degree() {
            term = mulmod(f, &term, &term, r);
            acc = add(f, &acc, &term);
        }
        acc
    } else {
        let base = vec![delta, f.one()];
        let e = (f.order() - 1) / 2;
        sub(f, &powmod(f, &base, e, r), &[f.one()])
    }
}
