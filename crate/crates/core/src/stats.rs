//! Statistical experiments: how often a random polynomial has a root, how
//! block failures decay under re-encoding, and how public keys grow.
//!
//! Each trial draws from its own stream `(seed, index)`, so results do not
//! depend on thread scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{encode_message, next_retry, Alphabet, RetryOutcome, RetryState};
use crate::error::{Error, Result};
use crate::gf::{ExtensionContext, Field, FieldSpec};
use crate::hpe::{
    encrypt_block, expand_public_key, keygen, AffineMask, EncryptOutcome, HpeParams, HpePrivateKey,
    HpePublicKey, PrivateMonomial,
};
use crate::keyfile::Key;
use crate::linalg::Matrix;
use crate::poly::{has_root_in_k, UniPolyK};
use crate::rng::{domain, Prng};

/// The limiting root probability `1 - 1/e`.
pub const LIMIT_ROOT_PROBABILITY: f64 = 0.632;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub label: String,
    pub trials: u64,
    pub observed: f64,
    pub expected: f64,
    pub band: [f64; 2],
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub detail: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub rows: Vec<StatsRow>,
    pub pass: bool,
}

impl StatsReport {
    fn new(experiment: &str, parameters: &[(&str, String)], rows: Vec<StatsRow>) -> Self {
        let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
        StatsReport {
            experiment: experiment.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            rows,
            pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Malformed(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Exact probability that a random degree-`m` polynomial over a field of
/// size `size` has a root, by inclusion–exclusion over root sets.
pub fn exact_root_probability(size: u128, m: usize) -> f64 {
    let s = size as f64;
    let mut term = 1.0;
    let mut none = 1.0;
    for k in 1..=m.min(size as usize) {
        term *= -(s - (k as f64 - 1.0)) / (k as f64 * s);
        none += term;
    }
    1.0 - none
}

/// Frequency with which a random degree-`degree` polynomial over
/// `F_{q^n}` (leading coefficient nonzero) has a root, against `1 - 1/e`
/// with a 3σ binomial band.
pub fn root_probability(spec: &FieldSpec, n: usize, degree: usize, trials: u64, seed: u64) -> Result<StatsReport> {
    if degree == 0 {
        return Err(Error::InvalidParams("degree must be at least 1".into()));
    }
    let ctx = ExtensionContext::build(spec, n, seed)?;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = Prng::for_index(seed, domain::STATS, i);
            let mut coeffs: Vec<_> = (0..degree).map(|_| ctx.random(&mut rng)).collect();
            coeffs.push(ctx.random_nonzero(&mut rng));
            Ok(u64::from(has_root_in_k(&ctx, &UniPolyK::new(&ctx, coeffs)?)?))
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    let observed = hits as f64 / trials as f64;
    let exact = exact_root_probability(ctx.size(), degree);
    let (expected, band) = if degree == 1 {
        (1.0, [1.0, 1.0])
    } else {
        let width = 3.0 * binomial_sigma(LIMIT_ROOT_PROBABILITY, trials);
        (LIMIT_ROOT_PROBABILITY, [LIMIT_ROOT_PROBABILITY - width, LIMIT_ROOT_PROBABILITY + width])
    };
    let row = StatsRow {
        label: format!("degree {degree}"),
        trials,
        observed,
        expected,
        band,
        pass: band[0] <= observed && observed <= band[1],
        detail: [("exact_probability".to_string(), format!("{exact:.6}"))].into(),
    };
    Ok(StatsReport::new(
        "root-probability",
        &[
            ("p", spec.p().to_string()),
            ("m", spec.m().to_string()),
            ("n", n.to_string()),
            ("degree", degree.to_string()),
            ("seed", seed.to_string()),
        ],
        vec![row],
    ))
}

/// An HPE key whose `y`-part `b·Y + Y^q` has a one-dimensional kernel, so
/// a block encrypts only when its constant part lands in the image.
pub fn singular_key(spec: &FieldSpec, n: usize, seed: u64) -> Result<(HpePrivateKey, HpePublicKey)> {
    let ctx = ExtensionContext::build(spec, n, seed)?;
    let mut rng = Prng::for_domain(seed, domain::STATS);
    let q = spec.q();
    let f = ctx.base().clone();
    let w = ctx.random_nonzero(&mut rng);
    // b·w + w^q = 0 for b = -w^{q-1}.
    let b = ctx.neg(&ctx.pow_unchecked(&w, q as u128 - 1));
    let monomials = vec![
        PrivateMonomial {
            coeff: ctx.random_nonzero(&mut rng),
            x_thetas: vec![0, 1],
            y_theta: None,
        },
        PrivateMonomial {
            coeff: b,
            x_thetas: vec![],
            y_theta: Some(0),
        },
        PrivateMonomial {
            coeff: ctx.one(),
            x_thetas: vec![],
            y_theta: Some(1),
        },
    ];
    let (a, _) = Matrix::random_invertible(&f, n, &mut rng);
    let (bm, _) = Matrix::random_invertible(&f, n, &mut rng);
    let c = ctx.random(&mut rng);
    let d = ctx.random(&mut rng);
    let private = HpePrivateKey::new(
        ctx,
        monomials,
        AffineMask::new(&f, a, c)?,
        AffineMask::new(&f, bm, d)?,
        2 * q as u128,
        seed,
    )?;
    let public = expand_public_key(&private)?;
    Ok((private, public))
}

fn random_message(alpha: &Alphabet, len: usize, rng: &mut Prng) -> Vec<u8> {
    let symbols = alpha.symbols();
    (0..len).map(|_| symbols[rng.below(symbols.len() as u64) as usize]).collect()
}

/// Attempts until the first success (1-based), or `None` within `limit`.
fn attempts_until_success(public: &HpePublicKey, seed: u64, index: u64, limit: u32) -> Result<Option<u32>> {
    let alpha = public.alphabet();
    let n = public.n();
    let mut rng = Prng::for_index(seed, domain::STATS, index);
    let msg = random_message(alpha, alpha.letters_per_block(n)?, &mut rng);
    let first = encode_message(alpha, &msg, n)?.remove(0);
    let mut state = RetryState::new(alpha, &first, seed, index);
    let mut enc = first.clone();
    for attempt in 1..=limit {
        if let EncryptOutcome::Ciphertext(_) = encrypt_block(public, &enc.block)? {
            return Ok(Some(attempt));
        }
        match next_retry(alpha, &first, &mut state) {
            RetryOutcome::Next(e) => enc = e,
            RetryOutcome::Exhausted => return Ok(None),
        }
    }
    Ok(None)
}

/// Fraction of blocks still failing after `s` attempts, against
/// `(1 - ρ̂)^s` with `ρ̂` the single-attempt success rate on an independent
/// calibration set. The band is 3σ, combining the binomial spread of the
/// measured fraction with the delta-method spread of the prediction.
pub fn retry_decay(spec: &FieldSpec, n: usize, trials: u64, max_s: u32, seed: u64) -> Result<StatsReport> {
    let (_, public) = singular_key(spec, n, seed)?;
    let run = |offset: u64, limit: u32| -> Result<Vec<Option<u32>>> {
        (0..trials)
            .into_par_iter()
            .map(|i| attempts_until_success(&public, seed, offset + i, limit))
            .collect()
    };
    let calibration = run(0, 1)?;
    let rho = calibration.iter().filter(|a| a.is_some()).count() as f64 / trials as f64;
    let measured = run(trials, max_s)?;
    let rows = (1..=max_s)
        .map(|s| {
            let failing = measured.iter().filter(|a| a.is_none_or(|k| k > s)).count();
            let observed = failing as f64 / trials as f64;
            let expected = (1.0 - rho).powi(s as i32);
            let var_obs = expected * (1.0 - expected) / trials as f64;
            let slope = s as f64 * (1.0 - rho).powi(s as i32 - 1);
            let var_pred = slope * slope * rho * (1.0 - rho) / trials as f64;
            let width = 3.0 * (var_obs + var_pred).sqrt();
            StatsRow {
                label: format!("s = {s}"),
                trials,
                observed,
                expected,
                band: [expected - width, expected + width],
                pass: (observed - expected).abs() <= width,
                detail: BTreeMap::new(),
            }
        })
        .collect();
    Ok(StatsReport::new(
        "retry-decay",
        &[
            ("p", spec.p().to_string()),
            ("m", spec.m().to_string()),
            ("n", n.to_string()),
            ("seed", seed.to_string()),
            ("rho_hat", format!("{rho:.6}")),
            ("calibration_trials", trials.to_string()),
        ],
        rows,
    ))
}

/// Public-key term counts and file sizes across `ns` at fixed `t`, checked
/// to increase with `n` and to stay below `(2n)^{t+1}`.
pub fn pubkey_size(spec: &FieldSpec, ns: &[usize], t: usize, seed: u64) -> Result<StatsReport> {
    let mut rows = Vec::new();
    let mut previous = 0usize;
    for &n in ns {
        let (private, public) = keygen(&HpeParams::new(spec.clone(), n, t, seed))?;
        let terms = public.term_count();
        let bytes = Key::HpePublic(public).to_json()?.len();
        let bound = ((2 * n) as f64).powi(private.t() as i32 + 1);
        rows.push(StatsRow {
            label: format!("n = {n}"),
            trials: 1,
            observed: terms as f64,
            expected: bound,
            band: [previous as f64 + 1.0, bound],
            pass: terms > previous && (terms as f64) <= bound,
            detail: [
                ("terms".to_string(), terms.to_string()),
                ("json_bytes".to_string(), bytes.to_string()),
                ("t".to_string(), private.t().to_string()),
            ]
            .into(),
        });
        previous = terms;
    }
    Ok(StatsReport::new(
        "pubkey-size",
        &[
            ("p", spec.p().to_string()),
            ("m", spec.m().to_string()),
            ("t", t.to_string()),
            ("seed", seed.to_string()),
        ],
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_probabilities() {
        assert_eq!(exact_root_probability(256, 1), 1.0);
        // Degree 2 over F_Q: 1 - (1/2)(1 - 1/Q).
        assert!((exact_root_probability(256, 2) - (1.0 - 0.5 * (1.0 - 1.0 / 256.0))).abs() < 1e-12);
        let p4 = exact_root_probability(256, 4);
        assert!((0.62..0.63).contains(&p4), "{p4}");
        assert!((exact_root_probability(1 << 40, 30) - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn linear_polynomials_always_have_roots() {
        let spec = FieldSpec::prime(2).unwrap();
        let r = root_probability(&spec, 8, 1, 500, 1).unwrap();
        assert_eq!(r.rows[0].observed, 1.0);
        assert!(r.pass);
    }
}
