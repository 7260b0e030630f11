use std::collections::HashSet;

use hpe_core::codec::{encode_message, Alphabet, DEFAULT_SYMBOLS};
use hpe_core::hpe::{degenerate_keygen, keygen, EncryptOutcome, HpeParams};
use hpe_core::protocols::{
    dual_candidates, dual_decrypt, dual_encrypt, hash_to_field, sign, sign_with_salt, verify,
    SIGN_ATTEMPTS,
};
use hpe_core::{Error, Field, FieldSpec, FqElem, Prng};

fn f2() -> FieldSpec {
    FieldSpec::prime(2).unwrap()
}

#[test]
fn hash_separates_one_byte_changes() {
    let spec = f2();
    let mut rng = Prng::new(3);
    let mut seen = HashSet::new();
    for i in 0..1000u32 {
        let mut m: Vec<u8> = (0..16).map(|_| rng.below(256) as u8).collect();
        m.extend_from_slice(&i.to_be_bytes());
        let a = hash_to_field(&spec, 64, &m);
        let pos = rng.below(m.len() as u64) as usize;
        m[pos] ^= 1 + rng.below(255) as u8;
        let b = hash_to_field(&spec, 64, &m);
        assert_ne!(a, b);
        assert!(seen.insert(a));
    }
}

#[test]
fn hash_is_balanced_over_f3() {
    let spec = FieldSpec::prime(3).unwrap();
    let mut counts = [0u32; 3];
    for i in 0..300u32 {
        for e in hash_to_field(&spec, 100, &i.to_le_bytes()) {
            counts[e.index() as usize] += 1;
        }
    }
    // 30 000 draws, expectation 10 000 each, sd ≈ 82.
    assert!(counts.iter().all(|&c| (9_600..=10_400).contains(&c)), "{counts:?}");
}

#[test]
fn honest_signatures_verify() {
    let (private, public) = keygen(&HpeParams::new(f2(), 10, 2, 4)).unwrap();
    let mut rng = Prng::new(5);
    for i in 0..200u32 {
        let msg: Vec<u8> = (0..rng.below(40)).map(|_| rng.below(256) as u8).chain(i.to_le_bytes()).collect();
        let sig = sign(&private, &msg, SIGN_ATTEMPTS).unwrap();
        assert!(verify(&public, &msg, &sig));
        assert_eq!(sig, sign(&private, &msg, SIGN_ATTEMPTS).unwrap());
    }
}

#[test]
fn bijective_key_never_salts() {
    let (private, public) = degenerate_keygen(&f2(), 9, 1, 2).unwrap();
    for i in 0..200u32 {
        let msg = format!("message {i}");
        let sig = sign(&private, msg.as_bytes(), 1).unwrap();
        assert_eq!(sig.salt, 0);
        assert!(verify(&public, msg.as_bytes(), &sig));
    }
}

#[test]
fn rootless_hash_is_salted_away() {
    let (private, public) = keygen(&HpeParams::new(f2(), 6, 2, 1)).unwrap();
    let msg = (0..1000u32)
        .map(|i| format!("m{i}").into_bytes())
        .find(|m| sign_with_salt(&private, m, 0).unwrap().is_none())
        .expect("some hash has no preimage");
    let sig = sign(&private, &msg, SIGN_ATTEMPTS).unwrap();
    assert!(sig.salt > 0);
    assert!(verify(&public, &msg, &sig));
    assert!(matches!(sign(&private, &msg, 1), Err(Error::RetryExhausted(1))));
}

#[test]
fn tampering_and_wrong_messages_rejected() {
    let (private, public) = keygen(&HpeParams::new(f2(), 16, 2, 7)).unwrap();
    let mut rng = Prng::new(11);
    let mut rejected = 0;
    let mut forged = 0;
    for i in 0..1000u32 {
        let msg = format!("tamper {i}");
        let mut sig = sign(&private, msg.as_bytes(), SIGN_ATTEMPTS).unwrap();
        assert!(verify(&public, msg.as_bytes(), &sig));
        if verify(&public, format!("tamper {i}!").as_bytes(), &sig) {
            forged += 1;
        }
        let k = rng.below(16) as usize;
        sig.block[k] = public.field().add(&sig.block[k], &FqElem::ONE);
        if !verify(&public, msg.as_bytes(), &sig) {
            rejected += 1;
        }
    }
    assert!(rejected >= 990, "{rejected}/1000 rejected");
    assert_eq!(forged, 0);
}

#[test]
fn dual_roundtrip_on_random_blocks() {
    let (priv_a, pub_a) = keygen(&HpeParams::new(f2(), 7, 2, 1)).unwrap();
    let (priv_b, pub_b) = keygen(&HpeParams::new(f2(), 7, 2, 2)).unwrap();
    let f = pub_a.field().clone();
    let mut rng = Prng::new(8);
    let mut ok = 0;
    for i in 0..500 {
        let x: Vec<FqElem> = (0..7).map(|_| f.random(&mut rng)).collect();
        if let EncryptOutcome::Ciphertext(y) = dual_encrypt(&pub_a, &priv_b, &x, 3, i).unwrap() {
            ok += 1;
            assert!(dual_candidates(&priv_a, &pub_b, &y).unwrap().iter().any(|c| c.x == x));
            assert_eq!(dual_encrypt(&pub_a, &priv_b, &x, 3, i).unwrap(), EncryptOutcome::Ciphertext(y));
        }
    }
    assert!(ok >= 150, "{ok}");
}

#[test]
fn dual_text_roundtrip() {
    let (priv_a, pub_a) = keygen(&HpeParams::new(f2(), 8, 2, 3)).unwrap();
    let (priv_b, pub_b) = keygen(&HpeParams::new(f2(), 8, 2, 4)).unwrap();
    let alpha = pub_b.alphabet().clone();
    let mut seen = 0;
    for (i, enc) in encode_message(&alpha, b"Dual protocol", 8).unwrap().iter().enumerate() {
        if let EncryptOutcome::Ciphertext(y) = dual_encrypt(&pub_a, &priv_b, &enc.block, 1, i as u64).unwrap() {
            let cands = dual_decrypt(&priv_a, &pub_b, &y).unwrap();
            assert!(cands.iter().any(|c| c.x == enc.block));
            assert!(cands.iter().all(|c| c.decoded.is_some()));
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn dual_with_bijective_keys_is_exact() {
    let (priv_a, pub_a) = degenerate_keygen(&f2(), 7, 1, 1).unwrap();
    let (priv_b, pub_b) = degenerate_keygen(&f2(), 7, 1, 2).unwrap();
    let f = pub_a.field().clone();
    let mut rng = Prng::new(1);
    for i in 0..100 {
        let x: Vec<FqElem> = (0..7).map(|_| f.random(&mut rng)).collect();
        let EncryptOutcome::Ciphertext(y) = dual_encrypt(&pub_a, &priv_b, &x, 1, i).unwrap() else {
            panic!("bijective keys always encrypt");
        };
        // A different seed picks the same (only) root.
        assert_eq!(dual_encrypt(&pub_a, &priv_b, &x, 2, i).unwrap(), EncryptOutcome::Ciphertext(y.clone()));
        let cands = dual_candidates(&priv_a, &pub_b, &y).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].x, x);
    }
}

#[test]
fn dual_rejects_mismatched_keys() {
    let (_, pub_a) = keygen(&HpeParams::new(f2(), 7, 2, 1)).unwrap();
    let (priv_b, _) = keygen(&HpeParams::new(f2(), 8, 2, 2)).unwrap();
    let x = vec![FqElem::ZERO; 8];
    assert!(matches!(dual_encrypt(&pub_a, &priv_b, &x, 0, 0), Err(Error::IncompatibleKeys(_))));
}

#[test]
fn garbage_rarely_decodes() {
    // One representative per letter: half of all 7-bit strings are letters,
    // so a random 14-element block decodes with probability 1/4.
    let n = 14;
    let (priv_a, _) = keygen(&HpeParams::new(f2(), n, 2, 3)).unwrap();
    let (_, pub_b) = keygen(&HpeParams::new(f2(), n, 2, 4)).unwrap();
    let f = pub_b.field().clone();
    let reps = (0..64u32)
        .map(|s| vec![(0..7).map(|k| f.elem(s >> k & 1).unwrap()).collect()])
        .collect();
    let sparse = Alphabet::new(DEFAULT_SYMBOLS.to_vec(), reps, 7).unwrap();
    let pub_b = pub_b.with_alphabet(sparse).unwrap();
    let mut rng = Prng::new(4);
    let trials = 300;
    let mut decodable = 0;
    for _ in 0..trials {
        let y: Vec<FqElem> = (0..n).map(|_| f.random(&mut rng)).collect();
        decodable += usize::from(!dual_decrypt(&priv_a, &pub_b, &y).unwrap().is_empty());
    }
    let rate = decodable as f64 / trials as f64;
    println!("garbage decodable rate {rate:.3}");
    assert!(rate < 0.5, "{rate}");
}
