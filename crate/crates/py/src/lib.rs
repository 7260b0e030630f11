//! Python bindings. Field elements cross the boundary as their integer
//! index in `F_q`; blocks are lists of such integers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use hpe_core::classic::{
    im_decrypt, im_encrypt, im_keygen, patarin_attack, relation_dimension, ImPrivateKey, ImPublicKey,
    ImPublicMap, PublicMap, DEFAULT_MAX_DIMENSION,
};
use hpe_core::hpe::{
    assemble_message, decrypt_block, decrypt_message, degenerate_keygen, encrypt_block, encrypt_message,
    keygen as hpe_keygen, private_roots, Candidate, EncryptOutcome, HpeParams, HpePrivateKey, HpePublicKey,
    DEFAULT_MAX_RETRIES,
};
use hpe_core::keyfile::Key;
use hpe_core::poly::{roots_in_k, UniPolyK};
use hpe_core::protocols::{self, Signature, SIGN_ATTEMPTS};
use hpe_core::{BaseField, Error, ExtensionContext, FieldSpec, FqElem};

fn err(e: Error) -> PyErr {
    match e {
        Error::RetryExhausted(_) | Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_block(field: &BaseField, xs: &[u32]) -> PyResult<Vec<FqElem>> {
    xs.iter().map(|&i| field.elem(i).map_err(err)).collect()
}

/// Per-block `(block, decoded bytes)` pairs as handed to Python.
type PyCandidates<'py> = Vec<Vec<(Vec<u32>, Option<Bound<'py, PyBytes>>)>>;

fn from_block(xs: &[FqElem]) -> Vec<u32> {
    xs.iter().map(|x| x.index()).collect()
}

#[pyclass(name = "PublicKey", module = "hpe_py", frozen)]
struct PyPublicKey {
    key: Key,
}

#[pyclass(name = "PrivateKey", module = "hpe_py", frozen)]
struct PyPrivateKey {
    key: Key,
}

impl PyPublicKey {
    fn hpe(&self) -> PyResult<&HpePublicKey> {
        match &self.key {
            Key::HpePublic(k) => Ok(k),
            _ => Err(PyValueError::new_err("expected an HPE public key")),
        }
    }
}

impl PyPrivateKey {
    fn hpe(&self) -> PyResult<&HpePrivateKey> {
        match &self.key {
            Key::HpePrivate(k) => Ok(k),
            _ => Err(PyValueError::new_err("expected an HPE private key")),
        }
    }
}

#[pymethods]
impl PyPublicKey {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match Key::from_json(text).map_err(err)? {
            key @ (Key::HpePublic(_) | Key::ImPublic(_)) => Ok(Self { key }),
            _ => Err(PyValueError::new_err("not a public key")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        self.key.to_json().map_err(err)
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        match self.key {
            Key::HpePublic(_) => "hpe",
            _ => "im",
        }
    }

    #[getter]
    fn n(&self) -> usize {
        match &self.key {
            Key::HpePublic(k) => k.n(),
            Key::ImPublic(k) => k.n(),
            _ => unreachable!(),
        }
    }

    #[getter]
    fn q(&self) -> u64 {
        match &self.key {
            Key::HpePublic(k) => k.spec().q(),
            Key::ImPublic(k) => k.spec().q(),
            _ => unreachable!(),
        }
    }

    #[getter]
    fn term_count(&self) -> usize {
        match &self.key {
            Key::HpePublic(k) => k.term_count(),
            Key::ImPublic(k) => k.equations().iter().map(|e| e.len()).sum(),
            _ => unreachable!(),
        }
    }

    /// Ciphertext block for `x`, or `None` when the block must be re-encoded.
    fn encrypt_block(&self, x: Vec<u32>) -> PyResult<Option<Vec<u32>>> {
        match &self.key {
            Key::HpePublic(k) => match encrypt_block(k, &to_block(k.field(), &x)?).map_err(err)? {
                EncryptOutcome::Ciphertext(y) => Ok(Some(from_block(&y))),
                EncryptOutcome::RetryNeeded => Ok(None),
            },
            Key::ImPublic(k) => {
                let field = BaseField::new(k.spec());
                Ok(Some(from_block(&im_encrypt(k, &to_block(&field, &x)?).map_err(err)?)))
            }
            _ => unreachable!(),
        }
    }

    /// Whether `(x, y)` satisfies every public equation.
    fn accepts(&self, x: Vec<u32>, y: Vec<u32>) -> PyResult<bool> {
        let map = self.map();
        let f = map.field();
        map.accepts(&to_block(f, &x)?, &to_block(f, &y)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("PublicKey(scheme={}, q={}, n={}, terms={})", self.scheme(), self.q(), self.n(), self.term_count())
    }
}

impl PyPublicKey {
    fn map(&self) -> Box<dyn PublicMap + '_> {
        match &self.key {
            Key::HpePublic(k) => Box::new(k.clone()),
            Key::ImPublic(k) => Box::new(ImPublicMap::new(k.clone())),
            _ => unreachable!(),
        }
    }
}

#[pymethods]
impl PyPrivateKey {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match Key::from_json(text).map_err(err)? {
            key @ (Key::HpePrivate(_) | Key::ImPrivate(_)) => Ok(Self { key }),
            _ => Err(PyValueError::new_err("not a private key")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        self.key.to_json().map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        match &self.key {
            Key::HpePrivate(k) => k.n(),
            Key::ImPrivate(k) => k.ctx().n(),
            _ => unreachable!(),
        }
    }

    /// Every root `u ∈ K` of `f(X, v)` for the unmasked `v`, as coordinate lists.
    fn roots(&self, y: Vec<u32>) -> PyResult<Vec<Vec<u32>>> {
        let k = self.hpe()?;
        let roots = private_roots(k, &to_block(k.ctx().base(), &y)?).map_err(err)?;
        Ok(roots.iter().map(|r| from_block(r.coords())).collect())
    }

    /// Candidate plaintext blocks for `y`, alphabet-decodable ones first.
    /// HPE keys need the matching public key; IM keys ignore it.
    #[pyo3(signature = (y, public=None))]
    fn decrypt_block(&self, y: Vec<u32>, public: Option<&PyPublicKey>) -> PyResult<Vec<Vec<u32>>> {
        match &self.key {
            Key::HpePrivate(k) => {
                let public = public.ok_or_else(|| PyValueError::new_err("an HPE key needs its public key"))?;
                let cands = decrypt_block(k, public.hpe()?, &to_block(k.ctx().base(), &y)?).map_err(err)?;
                Ok(cands.iter().map(|c| from_block(&c.x)).collect())
            }
            Key::ImPrivate(k) => Ok(vec![from_block(&im_decrypt(k, &to_block(k.ctx().base(), &y)?).map_err(err)?)]),
            _ => unreachable!(),
        }
    }
}

fn spec_of(p: u64, m: usize) -> PyResult<FieldSpec> {
    FieldSpec::with_default_modulus(p, m).map_err(err)
}

/// Generates `(private, public)`. `scheme` is "hpe" or "im".
#[pyfunction]
#[pyo3(signature = (n, p=2, m=1, t=2, seed=0, scheme="hpe", theta=1, degenerate=false))]
#[allow(clippy::too_many_arguments)]
fn keygen(
    n: usize,
    p: u64,
    m: usize,
    t: usize,
    seed: u64,
    scheme: &str,
    theta: u32,
    degenerate: bool,
) -> PyResult<(PyPrivateKey, PyPublicKey)> {
    let spec = spec_of(p, m)?;
    let (private, public) = match scheme {
        "hpe" => {
            let (k, pk) = if degenerate {
                degenerate_keygen(&spec, n, theta, seed)
            } else {
                hpe_keygen(&HpeParams::new(spec, n, t, seed))
            }
            .map_err(err)?;
            (Key::HpePrivate(k), Key::HpePublic(pk))
        }
        "im" => {
            let (k, pk): (ImPrivateKey, ImPublicKey) = im_keygen(&spec, n, theta, seed).map_err(err)?;
            (Key::ImPrivate(k), Key::ImPublic(pk))
        }
        other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    Ok((PyPrivateKey { key: private }, PyPublicKey { key: public }))
}

/// Encrypts a byte message with alphabet re-encoding; returns the blocks.
#[pyfunction]
#[pyo3(signature = (public, message, seed=0, max_retries=DEFAULT_MAX_RETRIES))]
fn encrypt(public: &PyPublicKey, message: &[u8], seed: u64, max_retries: u64) -> PyResult<Vec<Vec<u32>>> {
    let enc = encrypt_message(public.hpe()?, message, seed, max_retries).map_err(err)?;
    Ok(enc.blocks.iter().map(|b| from_block(b)).collect())
}

fn candidates_to_py<'py>(py: Python<'py>, blocks: &[Vec<Candidate>]) -> PyCandidates<'py> {
    blocks
        .iter()
        .map(|b| {
            b.iter()
                .map(|c| (from_block(&c.x), c.decoded.as_ref().map(|d| PyBytes::new(py, d))))
                .collect()
        })
        .collect()
}

/// Per-block candidates as `(block, decoded bytes or None)` pairs.
#[pyfunction]
fn decrypt<'py>(
    py: Python<'py>,
    private: &PyPrivateKey,
    public: &PyPublicKey,
    blocks: Vec<Vec<u32>>,
) -> PyResult<PyCandidates<'py>> {
    let k = private.hpe()?;
    let ys = blocks.iter().map(|b| to_block(k.ctx().base(), b)).collect::<PyResult<Vec<_>>>()?;
    let cands = decrypt_message(k, public.hpe()?, &ys).map_err(err)?;
    Ok(candidates_to_py(py, &cands))
}

/// The message read off the first decodable candidate of every block.
#[pyfunction]
fn decrypt_text<'py>(
    py: Python<'py>,
    private: &PyPrivateKey,
    public: &PyPublicKey,
    blocks: Vec<Vec<u32>>,
) -> PyResult<Option<Bound<'py, PyBytes>>> {
    let k = private.hpe()?;
    let ys = blocks.iter().map(|b| to_block(k.ctx().base(), b)).collect::<PyResult<Vec<_>>>()?;
    let cands = decrypt_message(k, public.hpe()?, &ys).map_err(err)?;
    Ok(assemble_message(&cands).map(|m| PyBytes::new(py, &m)))
}

/// Returns `(block, salt)`.
#[pyfunction]
#[pyo3(signature = (private, message, max_attempts=SIGN_ATTEMPTS))]
fn sign(private: &PyPrivateKey, message: &[u8], max_attempts: u64) -> PyResult<(Vec<u32>, u64)> {
    let sig = protocols::sign(private.hpe()?, message, max_attempts).map_err(err)?;
    Ok((from_block(&sig.block), sig.salt))
}

#[pyfunction]
fn verify(public: &PyPublicKey, message: &[u8], block: Vec<u32>, salt: u64) -> PyResult<bool> {
    let k = public.hpe()?;
    let sig = Signature {
        block: to_block(k.field(), &block)?,
        salt,
    };
    Ok(protocols::verify(k, message, &sig))
}

/// Runs the bilinear-relation attack and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (public, samples=None, trials=100, seed=0))]
fn patarin<'py>(
    py: Python<'py>,
    public: &PyPublicKey,
    samples: Option<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let map = public.map();
    let samples = samples.unwrap_or(3 * relation_dimension(map.n()));
    let r = py
        .detach(|| patarin_attack(map.as_ref(), samples, trials, seed, DEFAULT_MAX_DIMENSION))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("relation_dimension", r.relation_dimension)?;
    d.set_item("samples_used", r.samples_used)?;
    d.set_item("trials", r.trials)?;
    d.set_item("recovered", r.recovered)?;
    d.set_item("recovery_rate", r.recovery_rate)?;
    d.set_item("success", r.success)?;
    Ok(d)
}

/// Roots in `F_{q^n}` of `Σ coeffs[i] X^i`; each coefficient and root is a
/// coordinate list over `F_q` in the basis of the field built from `field_seed`.
#[pyfunction]
#[pyo3(signature = (coeffs, n, p=2, m=1, field_seed=0, seed=0))]
fn roots(coeffs: Vec<Vec<u32>>, n: usize, p: u64, m: usize, field_seed: u64, seed: u64) -> PyResult<Vec<Vec<u32>>> {
    let ctx = ExtensionContext::build(&spec_of(p, m)?, n, field_seed).map_err(err)?;
    let ks = coeffs
        .iter()
        .map(|c| ctx.from_coords(to_block(ctx.base(), c)?).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let g = UniPolyK::new(&ctx, ks).map_err(err)?;
    let rs = roots_in_k(&ctx, &g, seed).map_err(err)?;
    Ok(rs.iter().map(|r| from_block(r.coords())).collect())
}

#[pymodule]
fn hpe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPublicKey>()?;
    m.add_class::<PyPrivateKey>()?;
    m.add_function(wrap_pyfunction!(keygen, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt_text, m)?)?;
    m.add_function(wrap_pyfunction!(sign, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(patarin, m)?)?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    Ok(())
}
