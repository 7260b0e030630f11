//! Canonical JSON for keys, ciphertexts and signatures.
//!
//! Integers are decimal strings and an `F_q` element is the list of its
//! coefficients over `F_p`, constant first. Public equations are stored as
//! full term lists over `(x, y)` in ascending graded-lex order, so equal
//! keys serialize to identical bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classic::{ImPrivateKey, ImPublicKey};
use crate::codec::Alphabet;
use crate::error::{Error, Result};
use crate::gf::{BaseField, ExtensionContext, FieldSpec, FqElem};
use crate::hpe::{AffineMask, HpePrivateKey, HpePublicKey, PrivateMonomial, PublicEquation};
use crate::linalg::Matrix;
use crate::poly::MultiPolyFq;
use crate::protocols::Signature;

pub const FORMAT_VERSION: &str = "1";

type ElemDto = Vec<String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    HpePublic,
    HpePrivate,
    ImPublic,
    ImPrivate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDto {
    p: String,
    m: String,
    fq_modulus: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDto {
    coefficient: ElemDto,
    exponents: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphabetDto {
    width: String,
    symbols: String,
    /// One list per symbol, then the pad letter's list.
    representatives: Vec<Vec<Vec<ElemDto>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialDto {
    coefficient: Vec<ElemDto>,
    x_thetas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_theta: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFileDto {
    version: String,
    role: Role,
    field: FieldDto,
    n: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_modulus: Option<Vec<ElemDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equations: Option<Vec<Vec<TermDto>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<AlphabetDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    monomials: Option<Vec<MonomialDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root_degree_bound: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<ElemDto>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<ElemDto>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<ElemDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<Vec<ElemDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<String>,
}

#[derive(Clone, Debug)]
pub enum Key {
    HpePublic(HpePublicKey),
    HpePrivate(HpePrivateKey),
    ImPublic(ImPublicKey),
    ImPrivate(ImPrivateKey),
}

impl Key {
    pub fn role(&self) -> Role {
        match self {
            Key::HpePublic(_) => Role::HpePublic,
            Key::HpePrivate(_) => Role::HpePrivate,
            Key::ImPublic(_) => Role::ImPublic,
            Key::ImPrivate(_) => Role::ImPrivate,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let dto = match self {
            Key::HpePublic(k) => hpe_public_dto(k)?,
            Key::HpePrivate(k) => hpe_private_dto(k),
            Key::ImPublic(k) => im_public_dto(k),
            Key::ImPrivate(k) => im_private_dto(k),
        };
        to_canonical(&dto)
    }

    pub fn from_json(text: &str) -> Result<Key> {
        let dto: KeyFileDto = parse(text)?;
        check_version(&dto.version)?;
        match dto.role {
            Role::HpePublic => hpe_public_from(dto).map(Key::HpePublic),
            Role::HpePrivate => hpe_private_from(dto).map(Key::HpePrivate),
            Role::ImPublic => im_public_from(dto).map(Key::ImPublic),
            Role::ImPrivate => im_private_from(dto).map(Key::ImPrivate),
        }
    }
}

fn to_canonical<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

fn check_version(v: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Malformed(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Malformed(format!("{what}: expected a decimal integer, got {s:?}")))
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Malformed(format!("missing field {what}")))
}

fn field_dto(spec: &FieldSpec) -> FieldDto {
    FieldDto {
        p: spec.p().to_string(),
        m: spec.m().to_string(),
        fq_modulus: spec.fq_modulus().iter().map(u64::to_string).collect(),
    }
}

fn field_from(dto: &FieldDto) -> Result<FieldSpec> {
    let modulus = dto
        .fq_modulus
        .iter()
        .map(|c| int(c, "fq_modulus"))
        .collect::<Result<_>>()?;
    FieldSpec::new(int(&dto.p, "p")?, int(&dto.m, "m")?, modulus)
}

fn elem_dto(f: &BaseField, e: FqElem) -> ElemDto {
    f.coeffs(e).iter().map(u64::to_string).collect()
}

fn elem_from(f: &BaseField, dto: &ElemDto) -> Result<FqElem> {
    let coeffs: Vec<u64> = dto.iter().map(|c| int(c, "coefficient")).collect::<Result<_>>()?;
    f.from_coeffs(&coeffs)
}

fn block_dto(f: &BaseField, block: &[FqElem]) -> Vec<ElemDto> {
    block.iter().map(|&e| elem_dto(f, e)).collect()
}

fn block_from(f: &BaseField, dto: &[ElemDto]) -> Result<Vec<FqElem>> {
    dto.iter().map(|e| elem_from(f, e)).collect()
}

fn matrix_dto(f: &BaseField, m: &Matrix) -> Vec<Vec<ElemDto>> {
    m.to_rows().iter().map(|r| block_dto(f, r)).collect()
}

fn matrix_from(f: &BaseField, dto: &[Vec<ElemDto>]) -> Result<Matrix> {
    Matrix::from_rows(dto.iter().map(|r| block_from(f, r)).collect::<Result<_>>()?)
}

fn poly_dto(f: &BaseField, p: &MultiPolyFq) -> Vec<TermDto> {
    p.terms()
        .map(|(mono, &c)| TermDto {
            coefficient: elem_dto(f, c),
            exponents: mono.exps().iter().map(u16::to_string).collect(),
        })
        .collect()
}

fn poly_from(f: &BaseField, nvars: usize, dto: &[TermDto]) -> Result<MultiPolyFq> {
    let terms = dto
        .iter()
        .map(|t| {
            let exps = t.exponents.iter().map(|e| int(e, "exponent")).collect::<Result<_>>()?;
            Ok((exps, elem_from(f, &t.coefficient)?))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiPolyFq::from_terms(f, nvars, terms)
}

fn alphabet_dto(f: &BaseField, a: &Alphabet) -> Result<AlphabetDto> {
    let symbols = String::from_utf8(a.symbols().to_vec())
        .ok()
        .filter(|s| s.is_ascii())
        .ok_or_else(|| Error::InvalidAlphabet("symbols must be ASCII to serialize".into()))?;
    Ok(AlphabetDto {
        width: a.width().to_string(),
        symbols,
        representatives: (0..a.letter_count())
            .map(|l| a.representatives(l).iter().map(|r| block_dto(f, r)).collect())
            .collect(),
    })
}

fn alphabet_from(f: &BaseField, dto: &AlphabetDto) -> Result<Alphabet> {
    let reps = dto
        .representatives
        .iter()
        .map(|set| set.iter().map(|r| block_from(f, r)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    Alphabet::new(dto.symbols.as_bytes().to_vec(), reps, int(&dto.width, "alphabet width")?)
}

/// The full `2n`-variable polynomial of a public equation.
fn equation_poly(f: &BaseField, eq: &PublicEquation, n: usize) -> Result<MultiPolyFq> {
    let mut terms = Vec::new();
    let polys = eq.linear.iter().map(Some).enumerate().chain([(n, None)]);
    for (j, p) in polys {
        let p = p.unwrap_or(&eq.constant);
        for (mono, &c) in p.terms() {
            let mut exps = mono.exps().to_vec();
            exps.resize(2 * n, 0);
            if j < n {
                exps[n + j] = 1;
            }
            terms.push((exps, c));
        }
    }
    MultiPolyFq::from_terms(f, 2 * n, terms)
}

fn hpe_public_dto(k: &HpePublicKey) -> Result<KeyFileDto> {
    let f = k.field();
    let n = k.n();
    let equations = k
        .equations()
        .iter()
        .map(|eq| Ok(poly_dto(f, &equation_poly(f, eq, n)?)))
        .collect::<Result<_>>()?;
    Ok(KeyFileDto {
        equations: Some(equations),
        alphabet: Some(alphabet_dto(f, k.alphabet())?),
        ..bare(Role::HpePublic, k.spec(), n)
    })
}

fn bare(role: Role, spec: &FieldSpec, n: usize) -> KeyFileDto {
    KeyFileDto {
        version: FORMAT_VERSION.into(),
        role,
        field: field_dto(spec),
        n: n.to_string(),
        k_modulus: None,
        equations: None,
        alphabet: None,
        monomials: None,
        theta: None,
        root_degree_bound: None,
        a: None,
        b: None,
        c: None,
        d: None,
        seed: None,
    }
}

fn hpe_public_from(dto: KeyFileDto) -> Result<HpePublicKey> {
    let spec = field_from(&dto.field)?;
    let f = BaseField::new(&spec);
    let n: usize = int(&dto.n, "n")?;
    let equations = need(dto.equations, "equations")?
        .iter()
        .map(|terms| crate::hpe::split_y_linear(&f, &poly_from(&f, 2 * n, terms)?, n))
        .collect::<Result<_>>()?;
    let alphabet = alphabet_from(&f, &need(dto.alphabet, "alphabet")?)?;
    HpePublicKey::new(&spec, n, equations, alphabet)
}

fn mask_dto(f: &BaseField, m: &AffineMask) -> (Vec<Vec<ElemDto>>, Vec<ElemDto>) {
    (matrix_dto(f, m.matrix()), block_dto(f, m.shift().coords()))
}

fn private_common(role: Role, ctx: &ExtensionContext, x: &AffineMask, y: &AffineMask, seed: u64) -> KeyFileDto {
    let f = ctx.base();
    let (a, c) = mask_dto(f, x);
    let (b, d) = mask_dto(f, y);
    KeyFileDto {
        k_modulus: Some(block_dto(f, ctx.k_modulus())),
        a: Some(a),
        b: Some(b),
        c: Some(c),
        d: Some(d),
        seed: Some(seed.to_string()),
        ..bare(role, ctx.spec(), ctx.n())
    }
}

fn hpe_private_dto(k: &HpePrivateKey) -> KeyFileDto {
    let f = k.ctx().base();
    let monomials = k
        .monomials()
        .iter()
        .map(|m| MonomialDto {
            coefficient: block_dto(f, m.coeff.coords()),
            x_thetas: m.x_thetas.iter().map(u32::to_string).collect(),
            y_theta: m.y_theta.map(|t| t.to_string()),
        })
        .collect();
    KeyFileDto {
        monomials: Some(monomials),
        root_degree_bound: Some(k.root_degree_bound().to_string()),
        ..private_common(Role::HpePrivate, k.ctx(), k.x_mask(), k.y_mask(), k.seed())
    }
}

struct PrivateParts {
    ctx: ExtensionContext,
    x_mask: AffineMask,
    y_mask: AffineMask,
    seed: u64,
}

fn private_parts(dto: &mut KeyFileDto) -> Result<PrivateParts> {
    let spec = field_from(&dto.field)?;
    let f = BaseField::new(&spec);
    let k_modulus = block_from(&f, &need(dto.k_modulus.take(), "k_modulus")?)?;
    let ctx = ExtensionContext::with_modulus(&spec, k_modulus)?;
    let n: usize = int(&dto.n, "n")?;
    if ctx.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ctx.n() });
    }
    let mask = |m: Option<Vec<Vec<ElemDto>>>, s: Option<Vec<ElemDto>>, name: &str| -> Result<AffineMask> {
        let m = matrix_from(&f, &need(m, name)?)?;
        let s = ctx.from_coords(block_from(&f, &need(s, name)?)?)?;
        AffineMask::new(&f, m, s)
    };
    let x_mask = mask(dto.a.take(), dto.c.take(), "a/c")?;
    let y_mask = mask(dto.b.take(), dto.d.take(), "b/d")?;
    let seed = int(&need(dto.seed.take(), "seed")?, "seed")?;
    Ok(PrivateParts { ctx, x_mask, y_mask, seed })
}

fn hpe_private_from(mut dto: KeyFileDto) -> Result<HpePrivateKey> {
    let parts = private_parts(&mut dto)?;
    let f = parts.ctx.base().clone();
    let monomials = need(dto.monomials, "monomials")?
        .iter()
        .map(|m| {
            Ok(PrivateMonomial {
                coeff: parts.ctx.from_coords(block_from(&f, &m.coefficient)?)?,
                x_thetas: m.x_thetas.iter().map(|t| int(t, "x_thetas")).collect::<Result<_>>()?,
                y_theta: m.y_theta.as_deref().map(|t| int(t, "y_theta")).transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let bound = int(&need(dto.root_degree_bound, "root_degree_bound")?, "root_degree_bound")?;
    HpePrivateKey::new(parts.ctx, monomials, parts.x_mask, parts.y_mask, bound, parts.seed)
}

fn im_public_dto(k: &ImPublicKey) -> KeyFileDto {
    let f = BaseField::new(k.spec());
    KeyFileDto {
        equations: Some(k.equations().iter().map(|q| poly_dto(&f, q)).collect()),
        ..bare(Role::ImPublic, k.spec(), k.n())
    }
}

fn im_public_from(dto: KeyFileDto) -> Result<ImPublicKey> {
    let spec = field_from(&dto.field)?;
    let f = BaseField::new(&spec);
    let n: usize = int(&dto.n, "n")?;
    let equations = need(dto.equations, "equations")?
        .iter()
        .map(|terms| poly_from(&f, n, terms))
        .collect::<Result<_>>()?;
    ImPublicKey::new(&spec, n, equations)
}

fn im_private_dto(k: &ImPrivateKey) -> KeyFileDto {
    KeyFileDto {
        theta: Some(k.theta().to_string()),
        ..private_common(Role::ImPrivate, k.ctx(), k.x_mask(), k.y_mask(), k.seed())
    }
}

fn im_private_from(mut dto: KeyFileDto) -> Result<ImPrivateKey> {
    let parts = private_parts(&mut dto)?;
    let theta = int(&need(dto.theta, "theta")?, "theta")?;
    ImPrivateKey::new(parts.ctx, theta, parts.x_mask, parts.y_mask, parts.seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Hpe,
    Im,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub scheme: Scheme,
    pub spec: FieldSpec,
    pub n: usize,
    pub blocks: Vec<Vec<FqElem>>,
    /// Re-encodings needed per block.
    pub retries: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiphertextDto {
    version: String,
    scheme: Scheme,
    field: FieldDto,
    n: String,
    blocks: Vec<Vec<ElemDto>>,
    retries: Vec<String>,
}

impl Ciphertext {
    pub fn to_json(&self) -> Result<String> {
        let f = BaseField::new(&self.spec);
        to_canonical(&CiphertextDto {
            version: FORMAT_VERSION.into(),
            scheme: self.scheme,
            field: field_dto(&self.spec),
            n: self.n.to_string(),
            blocks: self.blocks.iter().map(|b| block_dto(&f, b)).collect(),
            retries: self.retries.iter().map(u64::to_string).collect(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: CiphertextDto = parse(text)?;
        check_version(&dto.version)?;
        let spec = field_from(&dto.field)?;
        let f = BaseField::new(&spec);
        let n = int(&dto.n, "n")?;
        let blocks: Vec<Vec<FqElem>> = dto
            .blocks
            .iter()
            .map(|b| block_from(&f, b))
            .collect::<Result<_>>()?;
        if blocks.iter().any(|b| b.len() != n) {
            return Err(Error::Malformed("ciphertext block of the wrong length".into()));
        }
        Ok(Ciphertext {
            scheme: dto.scheme,
            spec,
            n,
            blocks,
            retries: dto.retries.iter().map(|r| int(r, "retries")).collect::<Result<_>>()?,
        })
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureFile {
    pub spec: FieldSpec,
    pub n: usize,
    pub message_digest: String,
    pub signature: Signature,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureDto {
    version: String,
    field: FieldDto,
    n: String,
    message_digest: String,
    salt: String,
    sig_block: Vec<ElemDto>,
}

impl SignatureFile {
    pub fn new(spec: &FieldSpec, message: &[u8], signature: Signature) -> Self {
        SignatureFile {
            spec: spec.clone(),
            n: signature.block.len(),
            message_digest: sha256_hex(message),
            signature,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let f = BaseField::new(&self.spec);
        to_canonical(&SignatureDto {
            version: FORMAT_VERSION.into(),
            field: field_dto(&self.spec),
            n: self.n.to_string(),
            message_digest: self.message_digest.clone(),
            salt: self.signature.salt.to_string(),
            sig_block: block_dto(&f, &self.signature.block),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: SignatureDto = parse(text)?;
        check_version(&dto.version)?;
        let spec = field_from(&dto.field)?;
        let f = BaseField::new(&spec);
        let block = block_from(&f, &dto.sig_block)?;
        let n = int(&dto.n, "n")?;
        if block.len() != n {
            return Err(Error::Malformed("signature block of the wrong length".into()));
        }
        Ok(SignatureFile {
            spec,
            n,
            message_digest: dto.message_digest,
            signature: Signature {
                block,
                salt: int(&dto.salt, "salt")?,
            },
        })
    }
}

/// Serializes a candidate block for reports.
pub fn block_to_strings(spec: &FieldSpec, block: &[FqElem]) -> Vec<Vec<String>> {
    block_dto(&BaseField::new(spec), block)
}

/// Parses a block written by [`block_to_strings`].
pub fn block_from_strings(spec: &FieldSpec, dto: &[Vec<String>]) -> Result<Vec<FqElem>> {
    block_from(&BaseField::new(spec), dto)
}
