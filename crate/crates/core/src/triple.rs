//! Decomposition triples and the exact solution invariant.

use core::fmt;

use alloc::string::String;

use num_bigint::BigUint;
use num_traits::Zero;

/// A candidate decomposition 4/n = 1/x + 1/y + 1/z.
///
/// Components are arbitrary-precision: constructions routinely produce
/// values near n^2 even when n itself is small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionTriple {
    pub x: BigUint,
    pub y: BigUint,
    pub z: BigUint,
}

impl SolutionTriple {
    pub fn new(x: BigUint, y: BigUint, z: BigUint) -> Self {
        Self { x, y, z }
    }

    pub fn from_u64(x: u64, y: u64, z: u64) -> Self {
        Self::new(BigUint::from(x), BigUint::from(y), BigUint::from(z))
    }

    /// Renders as `x y z` for logs and reports.
    pub fn display(&self) -> String {
        use alloc::format;
        format!("{} {} {}", self.x, self.y, self.z)
    }
}

impl fmt::Display for SolutionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Checks 4/n = 1/x + 1/y + 1/z exactly, by clearing denominators:
/// 4xyz = n(xy + yz + zx). All components must be positive.
pub fn check_solution(n: &BigUint, t: &SolutionTriple) -> bool {
    if n.is_zero() || t.x.is_zero() || t.y.is_zero() || t.z.is_zero() {
        return false;
    }
    let lhs = 4u32 * &t.x * &t.y * &t.z;
    let rhs = n * (&t.x * &t.y + &t.y * &t.z + &t.z * &t.x);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_u64(n: u64, x: u64, y: u64, z: u64) -> bool {
        check_solution(&BigUint::from(n), &SolutionTriple::from_u64(x, y, z))
    }

    #[test]
    fn accepts_known_decompositions() {
        assert!(check_u64(2, 1, 2, 2));
        assert!(check_u64(5, 2, 5, 10));
        assert!(check_u64(5, 2, 4, 20));
        assert!(check_u64(7, 2, 15, 210));
        assert!(check_u64(73, 20, 219, 4380));
    }

    #[test]
    fn rejects_near_misses() {
        assert!(!check_u64(5, 2, 5, 11));
        assert!(!check_u64(5, 2, 4, 19));
        assert!(!check_u64(7, 3, 6, 15));
    }

    #[test]
    fn rejects_zero_components() {
        assert!(!check_u64(5, 0, 5, 10));
        assert!(!check_u64(0, 1, 2, 2));
    }

    #[test]
    fn order_does_not_matter_for_the_invariant() {
        assert!(check_u64(5, 10, 5, 2));
        assert!(check_u64(5, 5, 2, 10));
    }

    #[test]
    fn display_is_parenthesized() {
        use alloc::format;
        let t = SolutionTriple::from_u64(2, 5, 10);
        assert_eq!(format!("{t}"), "(2, 5, 10)");
        assert_eq!(t.display(), "2 5 10");
    }
}
