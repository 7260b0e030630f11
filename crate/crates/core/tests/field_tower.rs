use hpe_core::gf::{ExtensionContext, Field, FieldSpec, FqElem, KElem};
use hpe_core::Prng;
use proptest::prelude::*;

/// Carry-less multiplication in GF(2)[w]/(modulus), modulus given as a bitmask.
fn gf2_mul(mut a: u32, mut b: u32, modulus: u32, n: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> n & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

fn gf2_pow(a: u32, mut e: u128, modulus: u32, n: u32) -> u32 {
    let (mut r, mut b) = (1u32, a);
    while e > 0 {
        if e & 1 == 1 {
            r = gf2_mul(r, b, modulus, n);
        }
        b = gf2_mul(b, b, modulus, n);
        e >>= 1;
    }
    r
}

fn bitmask(ctx: &ExtensionContext) -> u32 {
    ctx.k_modulus()
        .iter()
        .enumerate()
        .fold(0, |acc, (i, c)| acc | (c.index() << i))
}

fn contexts() -> Vec<ExtensionContext> {
    let mut out = Vec::new();
    for (p, m, n) in [
        (2, 1, 2),
        (2, 1, 3),
        (2, 1, 8),
        (2, 2, 3),
        (3, 1, 4),
        (2, 4, 3),
        (5, 1, 3),
        (2, 3, 4),
    ] {
        let spec = FieldSpec::with_default_modulus(p, m).unwrap();
        out.push(ExtensionContext::build(&spec, n, 7).unwrap());
    }
    out
}

#[test]
fn multiplication_matches_carryless_oracle() {
    for n in [2u32, 3, 5, 8, 12] {
        let spec = FieldSpec::prime(2).unwrap();
        let ctx = ExtensionContext::build(&spec, n as usize, 3).unwrap();
        let modulus = bitmask(&ctx);
        let mut rng = Prng::new(n as u64);
        for _ in 0..1000 {
            let a = rng.below(1 << n) as u32;
            let b = rng.below(1 << n) as u32;
            let got = ctx.mul(&ctx.from_index(a as u128), &ctx.from_index(b as u128));
            assert_eq!(ctx.to_index(&got) as u32, gf2_mul(a, b, modulus, n));
        }
    }
}

#[test]
fn tensor_route_matches_schoolbook() {
    for ctx in contexts() {
        let mut rng = Prng::new(1);
        for i in 0..ctx.n() {
            for j in 0..ctx.n() {
                for l in 0..ctx.n() {
                    assert_eq!(ctx.tensor(i, j, l), ctx.tensor(j, i, l));
                }
            }
        }
        for _ in 0..1000 {
            let a = ctx.random(&mut rng);
            let b = ctx.random(&mut rng);
            assert_eq!(ctx.mul_via_tensor(&a, &b), ctx.mul(&a, &b));
        }
    }
}

#[test]
fn frobenius_equals_power_exhaustively() {
    for ctx in contexts().into_iter().filter(|c| c.size() <= 4096) {
        let q = ctx.q() as u128;
        for a in ctx.elements() {
            for k in 0..ctx.n() {
                let expect = ctx.pow_unchecked(&a, q.pow(k as u32));
                assert_eq!(ctx.frobenius_apply(&a, k).unwrap(), expect);
            }
        }
    }
}

#[test]
fn frobenius_matrices_are_powers_of_the_first() {
    for ctx in contexts() {
        let n = ctx.n();
        let p1 = ctx.frobenius_matrix(1).unwrap().to_vec();
        let mul = |a: &[FqElem], b: &[FqElem]| {
            let f = ctx.base();
            let mut out = vec![FqElem::ZERO; n * n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        out[i * n + j] =
                            f.add(&out[i * n + j], &f.mul(&a[i * n + k], &b[k * n + j]));
                    }
                }
            }
            out
        };
        let mut acc = ctx.frobenius_matrix(0).unwrap().to_vec();
        for k in 1..n {
            acc = mul(&acc, &p1);
            assert_eq!(acc, ctx.frobenius_matrix(k).unwrap());
        }
        assert_eq!(mul(&acc, &p1), ctx.frobenius_matrix(0).unwrap());
        // Row i of P^(k) is β_i^{q^k}.
        let q = ctx.q() as u128;
        for k in 0..n {
            let pk = ctx.frobenius_matrix(k).unwrap();
            for i in 0..n {
                let img = ctx.pow_unchecked(&ctx.basis(i), q.pow(k as u32));
                assert_eq!(&pk[i * n..(i + 1) * n], img.coords());
            }
        }
    }
}

#[test]
fn power_map_bijective_iff_coprime() {
    for ctx in contexts().into_iter().filter(|c| c.size() <= 512) {
        let order = ctx.size() - 1;
        for h in 1..(order + 3).min(40) {
            let mut images: Vec<u128> = ctx
                .elements()
                .map(|a| ctx.to_index(&ctx.pow_unchecked(&a, h)))
                .collect();
            images.sort();
            images.dedup();
            let bijective = images.len() as u128 == ctx.size();
            let g = gcd(h, order);
            assert_eq!(bijective, g == 1, "h={h} |K|={}", ctx.size());
        }
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn powers_match_oracle_in_gf256() {
    let spec = FieldSpec::prime(2).unwrap();
    let ctx = ExtensionContext::build(&spec, 8, 11).unwrap();
    let modulus = bitmask(&ctx);
    for a in 0..256u32 {
        for e in [0u128, 1, 2, 3, 7, 254, 255, 1000] {
            if a == 0 && e == 0 {
                continue;
            }
            let got = ctx.k_pow(&ctx.from_index(a as u128), e).unwrap();
            assert_eq!(ctx.to_index(&got) as u32, gf2_pow(a, e, modulus, 8));
        }
    }
}

fn arb_elem(ctx: &ExtensionContext) -> impl Strategy<Value = KElem> + '_ {
    any::<u64>().prop_map(move |s| ctx.random(&mut Prng::new(s)))
}

proptest! {
    #[test]
    fn field_axioms_odd_characteristic(seed in any::<u64>()) {
        let spec = FieldSpec::with_default_modulus(3, 2).unwrap();
        let ctx = ExtensionContext::build(&spec, 3, 5).unwrap();
        let mut rng = Prng::new(seed);
        let (a, b, c) = (ctx.random(&mut rng), ctx.random(&mut rng), ctx.random(&mut rng));
        prop_assert_eq!(ctx.mul(&ctx.mul(&a, &b), &c), ctx.mul(&a, &ctx.mul(&b, &c)));
        prop_assert_eq!(ctx.mul(&a, &ctx.add(&b, &c)), ctx.add(&ctx.mul(&a, &b), &ctx.mul(&a, &c)));
        prop_assert_eq!(ctx.mul(&a, &b), ctx.mul(&b, &a));
        if !a.is_zero() {
            prop_assert_eq!(ctx.mul(&a, &ctx.k_inverse(&a).unwrap()), ctx.one());
        }
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative(seed in any::<u64>()) {
        let spec = FieldSpec::with_default_modulus(2, 4).unwrap();
        let ctx = ExtensionContext::build(&spec, 5, 9).unwrap();
        let mut rng = Prng::new(seed);
        let (a, b) = (ctx.random(&mut rng), ctx.random(&mut rng));
        for k in 0..ctx.n() {
            let fa = ctx.frobenius_apply(&a, k).unwrap();
            let fb = ctx.frobenius_apply(&b, k).unwrap();
            prop_assert_eq!(ctx.frobenius_apply(&ctx.mul(&a, &b), k).unwrap(), ctx.mul(&fa, &fb));
            prop_assert_eq!(ctx.frobenius_apply(&ctx.add(&a, &b), k).unwrap(), ctx.add(&fa, &fb));
        }
    }

    #[test]
    fn inverse_in_gf2_16(a in 1u128..(1 << 16)) {
        let spec = FieldSpec::prime(2).unwrap();
        let ctx = ExtensionContext::build(&spec, 16, 1).unwrap();
        let x = ctx.from_index(a);
        prop_assert_eq!(ctx.mul(&x, &ctx.k_inverse(&x).unwrap()), ctx.one());
    }
}

#[test]
fn random_elements_strategy_smoke() {
    let spec = FieldSpec::prime(2).unwrap();
    let ctx = ExtensionContext::build(&spec, 4, 0).unwrap();
    let mut runner = proptest::test_runner::TestRunner::default();
    runner
        .run(&arb_elem(&ctx), |a| {
            prop_assert_eq!(ctx.frobenius_apply(&a, 0).unwrap(), a);
            Ok(())
        })
        .unwrap();
}
