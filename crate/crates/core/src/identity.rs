//! Parametric decomposition identities and their enumeration.
//!
//! Each identity covers a full residue class: every n in the class gets a
//! decomposition of 4/n by direct substitution. An identity is therefore
//! summarized by its class `(modulus, residue)` together with the
//! parameters needed to rebuild the triple.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::arith::{divisors, factorize, mod_inv};
use crate::triple::SolutionTriple;

/// A parametric identity producing decompositions over one residue class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Identity {
    /// For n = rho (mod 4uvw - 1): with q = (nu + v)/(4uvw - 1),
    /// 4/n = 1/(nuwq) + 1/(vwq) + 1/(nuvw).
    T1 { u: u64, v: u64, w: u64 },
    /// For n = -a (mod 4uv), where a divides u + v: with t = (n + a)/(4uv),
    /// 4/n = 1/(uvt) + 1/(nut(u+v)/a) + 1/(nvt(u+v)/a).
    T2 { u: u64, v: u64, a: u64 },
    /// For n = 0 (mod g): scale a decomposition of 4/g by n/g.
    Gcd { g: u64, base: (u64, u64, u64) },
}

impl Identity {
    /// The modulus of the covered class.
    pub fn modulus(&self) -> u64 {
        match *self {
            Identity::T1 { u, v, w } => 4 * u * v * w - 1,
            Identity::T2 { u, v, .. } => 4 * u * v,
            Identity::Gcd { g, .. } => g,
        }
    }

    /// The covered residue mod [`Self::modulus`].
    ///
    /// Never 1: both families produce residues structurally distinct
    /// from 1, which is what leaves the hard classes open.
    pub fn residue(&self) -> u64 {
        match *self {
            Identity::T1 { u, v, w } => {
                let m = 4 * u * v * w - 1;
                // gcd(u, m) = 1 since m = -1 mod u
                let inv = mod_inv(u % m, m).unwrap();
                (m - (v % m) * inv % m) % m
            }
            Identity::T2 { u, v, a } => {
                debug_assert!(a <= u + v && (u + v) % a == 0);
                let m = 4 * u * v;
                (m - a % m) % m
            }
            Identity::Gcd { .. } => 0,
        }
    }

    /// The covered class as `(modulus, residue)`.
    pub fn class(&self) -> (u64, u64) {
        (self.modulus(), self.residue())
    }

    /// Builds the decomposition of 4/n, or `None` when n is not in the
    /// covered class (or the parameters are inconsistent).
    pub fn construct(&self, n: &BigUint) -> Option<SolutionTriple> {
        if n.is_zero() {
            return None;
        }
        match *self {
            Identity::T1 { u, v, w } => {
                let m = 4 * u * v * w - 1;
                let (q, rem) = num_integer::Integer::div_rem(&(n * u + v), &BigUint::from(m));
                if !rem.is_zero() || q.is_zero() {
                    return None;
                }
                let x = n * u * w * &q;
                let y = &q * (v * w);
                let z = n * (u * v * w);
                Some(SolutionTriple::new(x, y, z))
            }
            Identity::T2 { u, v, a } => {
                if a == 0 || (u + v) % a != 0 {
                    return None;
                }
                let m = 4 * u * v;
                let (t, rem) = num_integer::Integer::div_rem(&(n + a), &BigUint::from(m));
                if !rem.is_zero() || t.is_zero() {
                    return None;
                }
                let s = (u + v) / a;
                let x = &t * (u * v);
                let y = n * (u * s) * &t;
                let z = n * (v * s) * &t;
                Some(SolutionTriple::new(x, y, z))
            }
            Identity::Gcd { g, base } => {
                let (k, rem) = num_integer::Integer::div_rem(n, &BigUint::from(g));
                if !rem.is_zero() || k.is_zero() {
                    return None;
                }
                let (x, y, z) = base;
                Some(SolutionTriple::new(&k * x, &k * y, &k * z))
            }
        }
    }
}

/// Enumerates every T1 identity with uvw <= bound and every T2 identity
/// with uv <= bound (one per divisor a of u + v), deduplicated by covered
/// class. When several parameter sets cover the same class, the
/// lexicographically least (T1 before T2, then parameters) is kept.
/// Output is sorted by class.
pub fn enumerate_db(bound: u64) -> Vec<Identity> {
    let mut best: alloc::collections::BTreeMap<(u64, u64), Identity> =
        alloc::collections::BTreeMap::new();
    let mut offer = |ident: Identity| {
        let class = ident.class();
        debug_assert_ne!(class.1, 1, "no identity covers residue 1");
        match best.get_mut(&class) {
            Some(cur) => {
                if ident < *cur {
                    *cur = ident;
                }
            }
            None => {
                best.insert(class, ident);
            }
        }
    };
    for u in 1..=bound {
        for v in 1..=bound / u {
            for w in 1..=bound / (u * v) {
                offer(Identity::T1 { u, v, w });
            }
        }
    }
    for u in 1..=bound {
        for v in 1..=bound / u {
            for a in divisors(&factorize(u + v)) {
                offer(Identity::T2 { u, v, a });
            }
        }
    }
    best.into_values().collect()
}
