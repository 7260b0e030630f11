//! Hidden polynomial equation (HPE) public-key toolkit.
//!
//! - [`gf`]: the field tower `F_p ⊆ F_q ⊆ K`, Frobenius matrices and
//!   multiplication tensor.
//! - [`poly`]: root finding in `K[X]` and the symbolic algebra that expands
//!   public keys.
//! - [`hpe`]: key generation, encryption by linear solving, decryption by
//!   root finding.
//! - [`codec`]: alphabets whose letters are sets of field strings, and the
//!   re-encoding retry used when a block cannot be encrypted.
//! - [`classic`]: the Imai–Matsumoto baseline, its linearization attack and
//!   an exhaustive-search attacker.
//! - [`protocols`]: signatures and the dual probabilistic protocol.
//! - [`keyfile`] and [`stats`]: canonical JSON artifacts and the
//!   statistical experiments behind the `hpe` command-line tool.

pub mod classic;
pub mod codec;
pub mod error;
pub mod gf;
pub mod hpe;
pub mod keyfile;
pub mod linalg;
pub mod poly;
pub mod protocols;
pub mod rng;
pub mod stats;
pub mod upoly;

pub use error::{Error, Result};
pub use gf::{BaseField, ExtensionContext, Field, FieldSpec, FqElem, KElem};
pub use linalg::Matrix;
pub use rng::Prng;
