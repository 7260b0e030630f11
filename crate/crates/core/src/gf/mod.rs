//! Arithmetic for the tower `F_p ⊆ F_q ⊆ K`.
//!
//! [`BaseField`] is `F_q = F_p[t]/(fq_modulus)` with log/exp tables.
//! [`ExtensionContext`] is `K = F_q[ξ]/(k_modulus)` in the power basis
//! `1, ξ, …, ξ^{n-1}`, together with the Frobenius matrices and the
//! multiplication tensor of that basis.

mod base;
mod extension;

pub use base::{BaseField, FieldSpec, FqElem, MAX_BASE_ORDER};
pub use extension::{ExtensionContext, KElem};

use crate::rng::Prng;
use std::fmt::Debug;

/// Operations shared by `F_q` and `K`, enough for the generic polynomial
/// routines in [`crate::upoly`].
pub trait Field {
    type Elem: Clone + PartialEq + Eq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn characteristic(&self) -> u64;
    /// Number of elements.
    fn order(&self) -> u128;
    /// `log_p(order)`.
    fn prime_degree(&self) -> u32;
    fn random(&self, rng: &mut Prng) -> Self::Elem;

    fn random_nonzero(&self, rng: &mut Prng) -> Self::Elem {
        loop {
            let a = self.random(rng);
            if !self.is_zero(&a) {
                return a;
            }
        }
    }
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
