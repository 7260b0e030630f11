use std::time::Instant;

use hpe_core::hpe::{
    decrypt_block, encrypt_block, expand_public_key, keygen, AffineMask, EncryptOutcome,
    HpeParams, HpePrivateKey, HpePublicKey, PrivateMonomial,
};
use hpe_core::{BaseField, ExtensionContext, Field, FieldSpec, FqElem, Prng};

fn spec(p: u64, m: usize) -> FieldSpec {
    FieldSpec::with_default_modulus(p, m).unwrap()
}

fn random_block(f: &BaseField, n: usize, rng: &mut Prng) -> Vec<FqElem> {
    (0..n).map(|_| f.random(rng)).collect()
}

fn all_blocks(f: &BaseField, n: usize) -> Vec<Vec<FqElem>> {
    let q = f.q() as u64;
    (0..q.pow(n as u32))
        .map(|mut i| {
            (0..n)
                .map(|_| {
                    let d = i % q;
                    i /= q;
                    f.elem(d as u32).unwrap()
                })
                .collect()
        })
        .collect()
}

/// Public values against `f(A·x + c, B·y + d)` computed in `K`.
fn agrees(private: &HpePrivateKey, public: &HpePublicKey, x: &[FqElem], y: &[FqElem]) -> bool {
    let ctx = private.ctx();
    let u = private.x_mask().apply(ctx, x);
    let v = private.y_mask().apply(ctx, y);
    let expect = private.evaluate_f(&u, &v);
    public.evaluate(x, y).unwrap() == expect.coords()
}

#[test]
fn expansion_matches_pointwise_evaluation() {
    for (n, t) in [(4, 2), (4, 3), (8, 2), (8, 3)] {
        for seed in 0..3 {
            let (private, public) = keygen(&HpeParams::new(spec(2, 1), n, t, seed)).unwrap();
            let f = public.field().clone();
            if n == 4 {
                let pts = all_blocks(&f, n);
                for x in &pts {
                    for y in &pts {
                        assert!(agrees(&private, &public, x, y), "n={n} t={t} seed={seed}");
                    }
                }
            } else {
                let mut rng = Prng::new(seed);
                for _ in 0..1000 {
                    let x = random_block(&f, n, &mut rng);
                    let y = random_block(&f, n, &mut rng);
                    assert!(agrees(&private, &public, &x, &y), "n={n} t={t} seed={seed}");
                }
            }
        }
    }
}

#[test]
fn expansion_over_larger_fields() {
    for (p, m, n, t) in [(3, 1, 3, 2), (2, 2, 3, 3), (5, 1, 2, 2), (2, 4, 3, 2)] {
        let (private, public) = keygen(&HpeParams::new(spec(p, m), n, t, 7)).unwrap();
        let f = public.field().clone();
        let mut rng = Prng::new(1);
        for _ in 0..300 {
            let x = random_block(&f, n, &mut rng);
            let y = random_block(&f, n, &mut rng);
            assert!(agrees(&private, &public, &x, &y), "p={p} m={m} n={n}");
        }
    }
}

#[test]
fn roundtrip_and_candidate_bound() {
    for (p, m, n, t) in [(2, 1, 8, 2), (2, 1, 8, 3), (3, 1, 5, 2), (2, 2, 4, 2)] {
        let mut successes = 0;
        let mut rng = Prng::new(99);
        for seed in 0..10 {
            let (private, public) = keygen(&HpeParams::new(spec(p, m), n, t, seed)).unwrap();
            let f = public.field().clone();
            let bound = private.x_degree() as usize;
            for _ in 0..50 {
                let x = random_block(&f, n, &mut rng);
                if let EncryptOutcome::Ciphertext(y) = encrypt_block(&public, &x).unwrap() {
                    successes += 1;
                    assert!(public.accepts(&x, &y).unwrap());
                    let cands = decrypt_block(&private, &public, &y).unwrap();
                    assert!(cands.iter().any(|c| c.x == x));
                    assert!(cands.len() <= bound);
                }
            }
        }
        assert!(successes >= 200, "only {successes} successful encryptions");
    }
}

#[test]
fn every_solution_decrypts_to_the_plaintext() {
    let mut checked = 0;
    for seed in 0..20 {
        let (private, public) = keygen(&HpeParams::new(spec(2, 1), 5, 3, seed)).unwrap();
        let f = public.field().clone();
        for x in all_blocks(&f, 5) {
            let Some(space) = public.solution_space(&x).unwrap() else {
                continue;
            };
            if space.dimension() == 0 {
                continue;
            }
            for y in space.enumerate(&f, 1 << 10).unwrap() {
                let cands = decrypt_block(&private, &public, &y).unwrap();
                assert!(cands.iter().any(|c| c.x == x));
                checked += 1;
            }
        }
    }
    assert!(checked > 0, "no singular consistent systems met");
}

#[test]
fn inconsistent_system_requests_retry() {
    // Two pure-y monomials make the y-part of f a linear map with a kernel,
    // so some x yield an inconsistent system.
    let sp = spec(2, 1);
    let f = BaseField::new(&sp);
    let ctx = ExtensionContext::with_modulus(&sp, [1, 1, 0, 1].map(|c| f.from_int(c)).to_vec()).unwrap();
    let one = ctx.one();
    let mono = |x: Vec<u32>, y: Option<u32>| PrivateMonomial {
        coeff: one.clone(),
        x_thetas: x,
        y_theta: y,
    };
    let id = AffineMask::identity(&ctx);
    let private = HpePrivateKey::new(
        ctx.clone(),
        vec![mono(vec![0, 1], None), mono(vec![], Some(0)), mono(vec![], Some(1))],
        id.clone(),
        id,
        4,
        0,
    )
    .unwrap();
    let public = expand_public_key(&private).unwrap();
    let mut retries = 0;
    for x in all_blocks(&f, 3) {
        match encrypt_block(&public, &x).unwrap() {
            EncryptOutcome::RetryNeeded => {
                retries += 1;
                let u = private.x_mask().apply(&ctx, &x);
                // v + v² = u³ has no solution exactly when Tr(u³) = 1.
                let u3 = ctx.pow_unchecked(&u, 3);
                let tr = (0..3).fold(ctx.zero(), |acc, k| {
                    ctx.add(&acc, &ctx.frobenius_apply(&u3, k).unwrap())
                });
                assert_eq!(tr, ctx.one());
            }
            EncryptOutcome::Ciphertext(y) => assert!(public.accepts(&x, &y).unwrap()),
        }
    }
    assert!(retries > 0);
}

#[test]
fn malformed_block_rejected() {
    let (_, public) = keygen(&HpeParams::new(spec(2, 1), 6, 2, 1)).unwrap();
    assert!(encrypt_block(&public, &[FqElem::ZERO; 5]).is_err());
}

#[test]
fn term_counts_grow_with_n() {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in [4, 6, 8, 10] {
        let (private, public) = keygen(&HpeParams::new(spec(2, 1), n, 2, 5)).unwrap();
        let bound = (2 * n).pow(private.t() as u32 + 1);
        counts.push((n, public.term_count(), bound));
    }
    for (n, c, b) in &counts {
        println!("n={n:>2} terms={c:>6} bound (2n)^(t+1)={b}");
        assert!(c <= b);
    }
    assert!(counts.windows(2).all(|w| w[0].1 < w[1].1), "{counts:?}");
    println!("{:?}", start.elapsed());
}
