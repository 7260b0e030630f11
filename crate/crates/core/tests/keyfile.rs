use hpe_core::classic::{im_encrypt, im_keygen};
use hpe_core::hpe::{encrypt_block, keygen, HpeParams};
use hpe_core::keyfile::{sha256_hex, Ciphertext, Key, Scheme, SignatureFile};
use hpe_core::protocols::{sign, verify, SIGN_ATTEMPTS};
use hpe_core::{Error, Field, FieldSpec, FqElem, Prng};

fn specs() -> Vec<FieldSpec> {
    vec![
        FieldSpec::prime(2).unwrap(),
        FieldSpec::with_default_modulus(3, 2).unwrap(),
        FieldSpec::prime(7).unwrap(),
    ]
}

fn roundtrip(key: &Key) -> Key {
    let text = key.to_json().unwrap();
    let back = Key::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text, "{:?}", key.role());
    back
}

#[test]
fn hpe_keys_roundtrip_byte_exact() {
    for spec in specs() {
        let (private, public) = keygen(&HpeParams::new(spec.clone(), 4, 3, 2)).unwrap();
        let Key::HpePublic(pub2) = roundtrip(&Key::HpePublic(public.clone())) else {
            panic!("role changed")
        };
        let Key::HpePrivate(priv2) = roundtrip(&Key::HpePrivate(private.clone())) else {
            panic!("role changed")
        };
        assert_eq!(pub2.equations(), public.equations());
        assert_eq!(pub2.alphabet(), public.alphabet());
        assert_eq!(priv2.monomials(), private.monomials());
        assert_eq!(priv2.x_mask(), private.x_mask());
        assert_eq!(priv2.y_mask(), private.y_mask());
        assert_eq!(priv2.ctx().k_modulus(), private.ctx().k_modulus());
        let f = public.field().clone();
        let mut rng = Prng::new(1);
        for _ in 0..20 {
            let x: Vec<FqElem> = (0..4).map(|_| f.random(&mut rng)).collect();
            assert_eq!(encrypt_block(&public, &x).unwrap(), encrypt_block(&pub2, &x).unwrap());
        }
    }
}

#[test]
fn public_keys_omit_the_secret_field() {
    let (_, public) = keygen(&HpeParams::new(FieldSpec::prime(2).unwrap(), 8, 2, 1)).unwrap();
    let text = Key::HpePublic(public).to_json().unwrap();
    assert!(!text.contains("k_modulus"));
    assert!(text.contains("\"role\": \"hpe-public\""));
}

#[test]
fn im_keys_roundtrip_byte_exact() {
    let spec = FieldSpec::prime(2).unwrap();
    let (private, public) = im_keygen(&spec, 7, 1, 3).unwrap();
    let Key::ImPublic(pub2) = roundtrip(&Key::ImPublic(public.clone())) else {
        panic!("role changed")
    };
    assert_eq!(pub2, public);
    let Key::ImPrivate(priv2) = roundtrip(&Key::ImPrivate(private.clone())) else {
        panic!("role changed")
    };
    assert_eq!((priv2.h(), priv2.h_inv()), (private.h(), private.h_inv()));
    let x = vec![FqElem::ONE; 7];
    assert_eq!(im_encrypt(&pub2, &x).unwrap(), im_encrypt(&public, &x).unwrap());
}

#[test]
fn ciphertext_and_signature_files() {
    let spec = FieldSpec::with_default_modulus(3, 2).unwrap();
    let (private, public) = keygen(&HpeParams::new(spec.clone(), 5, 2, 4)).unwrap();
    let ct = Ciphertext {
        scheme: Scheme::Hpe,
        spec: spec.clone(),
        n: 5,
        blocks: vec![vec![FqElem::ONE; 5], vec![FqElem::ZERO; 5]],
        retries: vec![0, 3],
    };
    let text = ct.to_json().unwrap();
    assert_eq!(Ciphertext::from_json(&text).unwrap(), ct);
    let sig = sign(&private, b"hello", SIGN_ATTEMPTS).unwrap();
    let file = SignatureFile::new(&spec, b"hello", sig);
    assert_eq!(file.message_digest, sha256_hex(b"hello"));
    let text = file.to_json().unwrap();
    let back = SignatureFile::from_json(&text).unwrap();
    assert_eq!(back, file);
    assert!(verify(&public, b"hello", &back.signature));
}

#[test]
fn malformed_files_rejected() {
    let spec = FieldSpec::prime(2).unwrap();
    let (_, public) = im_keygen(&spec, 3, 1, 1).unwrap();
    let text = Key::ImPublic(public).to_json().unwrap();
    let bad = [
        text.replace("\"version\": \"1\"", "\"version\": \"9\""),
        text.replace("\"n\": \"3\"", "\"n\": \"three\""),
        text.replace("\"role\": \"im-public\"", "\"role\": \"im-secret\""),
        text.replacen("{", "{\n  \"extra\": \"1\",", 1),
        text.replace("\"p\": \"2\"", "\"p\": \"4\""),
        "not json".to_string(),
    ];
    for b in bad {
        assert!(Key::from_json(&b).is_err(), "{b}");
    }
    let missing = text.replace("\"role\": \"im-public\"", "\"role\": \"im-private\"");
    assert!(matches!(Key::from_json(&missing), Err(Error::Malformed(_))));
}
