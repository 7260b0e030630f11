use hpe_core::gf::{ExtensionContext, Field, FieldSpec, FqElem, KElem};
use hpe_core::poly::{
    brute_roots, roots_in_k, sym_frobenius, sym_mul, sym_scale, SymbolicFieldElement, UniPolyK,
};
use hpe_core::{Matrix, Prng};

fn ctx(p: u64, m: usize, n: usize, seed: u64) -> ExtensionContext {
    ExtensionContext::build(&FieldSpec::with_default_modulus(p, m).unwrap(), n, seed).unwrap()
}

fn random_poly(ctx: &ExtensionContext, deg: usize, rng: &mut Prng) -> UniPolyK {
    let mut c: Vec<KElem> = (0..deg).map(|_| ctx.random(rng)).collect();
    c.push(ctx.random_nonzero(rng));
    UniPolyK::new(ctx, c).unwrap()
}

/// Product of `(X - r)` over the given roots, times a random rootless-ish cofactor.
fn planted(ctx: &ExtensionContext, roots: &[KElem], rng: &mut Prng) -> UniPolyK {
    let mut coeffs = vec![ctx.random_nonzero(rng)];
    for r in roots {
        let mut next = vec![ctx.zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = ctx.add(&next[i + 1], c);
            next[i] = ctx.sub(&next[i], &ctx.mul(c, r));
        }
        coeffs = next;
    }
    UniPolyK::new(ctx, coeffs).unwrap()
}

#[test]
fn cubics_over_gf256_agree_with_brute_force() {
    let k = ctx(2, 1, 8, 1);
    let mut rng = Prng::new(2024);
    for i in 0..500 {
        let g = random_poly(&k, 3, &mut rng);
        assert_eq!(roots_in_k(&k, &g, i).unwrap(), brute_roots(&k, &g).unwrap());
    }
}

#[test]
fn random_and_planted_polynomials_across_fields() {
    let fields = [
        ctx(2, 1, 5, 1),
        ctx(3, 1, 4, 2),
        ctx(5, 1, 3, 3),
        ctx(2, 2, 4, 4),
        ctx(3, 2, 3, 5),
        ctx(7, 1, 2, 6),
        ctx(2, 4, 4, 7),
    ];
    let mut rng = Prng::new(77);
    for k in &fields {
        assert!(k.size() <= 1 << 16);
        for deg in 1..=8 {
            for t in 0..6 {
                let g = random_poly(k, deg, &mut rng);
                let r = roots_in_k(k, &g, t).unwrap();
                assert_eq!(r, brute_roots(k, &g).unwrap());
                assert!(r.len() <= deg);
            }
            // Repeated and distinct planted roots.
            let a = k.random(&mut rng);
            let b = k.random(&mut rng);
            let g = planted(k, &[a.clone(), a.clone(), b.clone()], &mut rng);
            let r = roots_in_k(k, &g, deg as u64).unwrap();
            assert_eq!(r, brute_roots(k, &g).unwrap());
            assert!(r.contains(&a) && r.contains(&b));
        }
    }
}

#[test]
fn fully_split_polynomial_in_large_field() {
    // The roots of X^16 - X in F_{2^12} form the subfield F_16.
    let k = ctx(2, 1, 12, 3);
    let mut coeffs = vec![k.zero(); 17];
    coeffs[1] = k.neg(&k.one());
    coeffs[16] = k.one();
    let g = UniPolyK::new(&k, coeffs).unwrap();
    let r = roots_in_k(&k, &g, 0).unwrap();
    assert_eq!(r.len(), 16);
    assert_eq!(r, brute_roots(&k, &g).unwrap());
}

fn all_points(k: &ExtensionContext, nvars: usize) -> Vec<Vec<FqElem>> {
    let q = k.q();
    let total = q.pow(nvars as u32);
    (0..total)
        .map(|mut i| {
            (0..nvars)
                .map(|_| {
                    let d = i % q;
                    i /= q;
                    k.base().elem(d as u32).unwrap()
                })
                .collect()
        })
        .collect()
}

fn random_points(
    k: &ExtensionContext,
    nvars: usize,
    count: usize,
    rng: &mut Prng,
) -> Vec<Vec<FqElem>> {
    (0..count)
        .map(|_| (0..nvars).map(|_| k.base().random(rng)).collect())
        .collect()
}

fn points(k: &ExtensionContext, nvars: usize, rng: &mut Prng) -> Vec<Vec<FqElem>> {
    if (k.q() as f64).powi(nvars as i32) <= 4096.0 {
        all_points(k, nvars)
    } else {
        random_points(k, nvars, 1000, rng)
    }
}

/// Random affine images of two disjoint variable blocks.
fn operands(k: &ExtensionContext, rng: &mut Prng) -> (SymbolicFieldElement, SymbolicFieldElement) {
    let n = k.n();
    let a = SymbolicFieldElement::affine(
        k,
        &Matrix::random(k.base(), n, n, rng),
        &k.random(rng),
        0,
        2 * n,
    );
    let b = SymbolicFieldElement::affine(
        k,
        &Matrix::random(k.base(), n, n, rng),
        &k.random(rng),
        n,
        2 * n,
    );
    (a, b)
}

#[test]
fn f4_product_of_variable_embeddings() {
    let k = ExtensionContext::with_modulus(
        &FieldSpec::prime(2).unwrap(),
        vec![FqElem::ONE, FqElem::ONE, FqElem::ONE],
    )
    .unwrap();
    let a = SymbolicFieldElement::variables(&k, 0, 4);
    let b = SymbolicFieldElement::variables(&k, 2, 4);
    let ab = sym_mul(&k, &a, &b).unwrap();
    let pts = all_points(&k, 4);
    assert_eq!(pts.len(), 16);
    for pt in pts {
        let expect = k.mul(&a.evaluate(&k, &pt), &b.evaluate(&k, &pt));
        assert_eq!(ab.evaluate(&k, &pt), expect);
    }
}

#[test]
fn symbolic_operations_commute_with_evaluation() {
    let fields = [
        ctx(2, 1, 3, 1),
        ctx(2, 1, 6, 2),
        ctx(3, 1, 3, 3),
        ctx(2, 2, 3, 4),
        ctx(2, 1, 8, 5),
    ];
    let mut rng = Prng::new(5);
    for k in &fields {
        let (a, b) = operands(k, &mut rng);
        let ab = sym_mul(k, &a, &b).unwrap();
        let aa = sym_mul(k, &a, &a).unwrap();
        let c = k.random(&mut rng);
        let ca = sym_scale(k, &c, &b).unwrap();
        let frobs: Vec<_> = (0..k.n())
            .map(|t| sym_frobenius(k, &a, t).unwrap())
            .collect();
        let qn = k.q() as u128;
        for pt in points(k, 2 * k.n(), &mut rng) {
            let va = a.evaluate(k, &pt);
            let vb = b.evaluate(k, &pt);
            assert_eq!(ab.evaluate(k, &pt), k.mul(&va, &vb));
            assert_eq!(aa.evaluate(k, &pt), k.mul(&va, &va));
            assert_eq!(ca.evaluate(k, &pt), k.mul(&c, &vb));
            for (t, fa) in frobs.iter().enumerate() {
                assert_eq!(fa.evaluate(k, &pt), k.pow_unchecked(&va, qn.pow(t as u32)));
            }
        }
    }
}

#[test]
fn quotient_reduction_preserves_values() {
    // Cubing a symbolic element forces exponents past q - 1 in F_2 and F_3.
    for k in [ctx(2, 1, 3, 8), ctx(3, 1, 2, 9)] {
        let mut rng = Prng::new(1);
        let (a, _) = operands(&k, &mut rng);
        let a3 = sym_mul(&k, &sym_mul(&k, &a, &a).unwrap(), &a).unwrap();
        for c in a3.coords() {
            for (m, _) in c.terms() {
                assert!(m.exps().iter().all(|&e| (e as u64) < k.q()));
            }
        }
        for pt in all_points(&k, 2 * k.n()) {
            assert_eq!(
                a3.evaluate(&k, &pt),
                k.pow_unchecked(&a.evaluate(&k, &pt), 3)
            );
        }
    }
}
