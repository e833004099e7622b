//! Residue systems: combining filters over coprime moduli into a single
//! grand modulus G and the short list of surviving classes R.
//!
//! Only integers in a surviving class need direct verification; everything
//! else is accepted by some filter. Batch k is the translate
//! {r + kG : r in R}, the unit of verification work.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use crate::arith::{gcd, mod_inv};
use crate::filter::{Filter, IdentityIndex};

/// A grand modulus with its surviving residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSystem {
    moduli: Vec<u64>,
    grand_modulus: u64,
    residues: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemError {
    /// Two moduli share a common factor.
    NotCoprime(u64, u64),
    /// The grand modulus does not fit in u64.
    Overflow,
    /// A residue is out of range or the list is not strictly ascending.
    BadResidues,
}

impl fmt::Display for SystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemError::NotCoprime(a, b) => write!(f, "moduli {a} and {b} are not coprime"),
            SystemError::Overflow => write!(f, "grand modulus overflows u64"),
            SystemError::BadResidues => write!(f, "residues must be ascending and below G"),
        }
    }
}

impl ResidueSystem {
    /// Assembles a system from already-known parts, validating shape.
    pub fn from_parts(moduli: Vec<u64>, residues: Vec<u64>) -> Result<Self, SystemError> {
        let mut g = 1u64;
        for (i, &m) in moduli.iter().enumerate() {
            for &m2 in &moduli[..i] {
                if gcd(m, m2) != 1 {
                    return Err(SystemError::NotCoprime(m2, m));
                }
            }
            g = g.checked_mul(m).ok_or(SystemError::Overflow)?;
        }
        let ascending = residues.windows(2).all(|w| w[0] < w[1]);
        if !ascending || residues.iter().any(|&r| r >= g) {
            return Err(SystemError::BadResidues);
        }
        Ok(Self {
            moduli,
            grand_modulus: g,
            residues,
        })
    }

    pub fn grand_modulus(&self) -> u64 {
        self.grand_modulus
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// The members of batch k, ascending.
    pub fn batch(&self, k: u64) -> Vec<u64> {
        let base = k.checked_mul(self.grand_modulus).expect("batch base overflow");
        self.residues
            .iter()
            .map(|&r| base.checked_add(r).expect("batch member overflow"))
            .collect()
    }

    /// The last batch index needed to cover 2..=limit. Requires limit >= 1.
    pub fn max_batch_index(&self, limit: u64) -> u64 {
        assert!(limit >= 1);
        (limit - 1) / self.grand_modulus
    }

    /// Number of batches covering 2..=limit.
    pub fn batch_count(&self, limit: u64) -> u64 {
        self.max_batch_index(limit) + 1
    }

    /// G / |R| rendered with one decimal (truncated), e.g. "12314.3".
    /// This is the average span of integers dispatched per checked
    /// candidate.
    pub fn efficiency_display(&self) -> String {
        use alloc::format;
        let n = self.residues.len() as u64;
        if n == 0 {
            return String::from("inf");
        }
        let tenths = 10 * self.grand_modulus / n;
        format!("{}.{}", tenths / 10, tenths % 10)
    }
}

/// Builds the residue system for a list of filters with pairwise coprime
/// moduli.
///
/// Surviving classes are assembled incrementally: the non-members of each
/// filter are CRT-combined with the classes accumulated so far, and after
/// every merge the classes covered directly by an identity at a divisor
/// of the partial grand modulus are pruned. Pruning early keeps the
/// intermediate lists near their final size without changing the result.
pub fn build_system(
    filters: &[Filter],
    index: &IdentityIndex,
) -> Result<ResidueSystem, SystemError> {
    let mut g = 1u64;
    let mut classes: Vec<u64> = vec![0];
    let mut moduli = Vec::with_capacity(filters.len());
    for filter in filters {
        let m = filter.modulus();
        for &seen in &moduli {
            if gcd(m, seen) != 1 {
                return Err(SystemError::NotCoprime(seen, m));
            }
        }
        let combined = g.checked_mul(m).ok_or(SystemError::Overflow)?;
        let survivors: Vec<u64> = (0..m).filter(|&r| !filter.accepts(r)).collect();
        let inv = mod_inv(g % m, m).expect("moduli are coprime");
        let applicable: Vec<u64> = index
            .moduli()
            .iter()
            .copied()
            .filter(|&d| combined % d == 0)
            .collect();
        let mut merged = Vec::with_capacity(classes.len() * survivors.len());
        for &r in &classes {
            for &s in &survivors {
                // x = r (mod g), x = s (mod m)
                let k = (s + m - r % m) % m;
                let x = r + g * ((k as u128 * inv as u128 % m as u128) as u64);
                let covered = applicable
                    .iter()
                    .any(|&d| index.lookup(d, x % d).is_some());
                if !covered {
                    merged.push(x);
                }
            }
        }
        classes = merged;
        g = combined;
        moduli.push(m);
    }
    classes.sort_unstable();
    ResidueSystem::from_parts(moduli, classes)
}
