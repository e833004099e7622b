//! Direct decomposition search for individual integers.

use crate::arith::{divisors_of_square, is_prime};
use crate::bradford::{brange, construct_type1, construct_type2, type1_holds, type2_holds};
use crate::triple::SolutionTriple;

/// Finds the lexicographically least decomposition 4/n = 1/x + 1/y + 1/z
/// with x <= y <= z by bounded enumeration. Suited to small n; the prime
/// sweep in [`direct_search`] is the scalable path.
pub fn naive_search(n: u64) -> Option<(u64, u64, u64)> {
    if n < 2 {
        return None;
    }
    let n = n as u128;
    for x in n / 4 + 1..=3 * n / 4 {
        // 4/n - 1/x = num/den
        let num = 4 * x - n;
        let den = n * x;
        let y_lo = (den / num + 1).max(x);
        let y_hi = 2 * den / num;
        for y in y_lo..=y_hi {
            let z_num = den * y;
            let z_den = num * y - den;
            if z_den > 0 && z_num % z_den == 0 {
                let z = z_num / z_den;
                return Some((x as u64, y as u64, z as u64));
            }
        }
    }
    None
}

/// Finds a decomposition of 4/n, or `None` when none exists in range
/// (n < 2) or the search is exhausted without a hit.
///
/// Composites and tiny n go through plain enumeration. For primes p >= 5
/// the search walks the Bradford range: the first x (then smallest
/// divisor d of x^2, condition one before condition two) yielding a hit
/// determines the triple.
pub fn direct_search(n: u64) -> Option<SolutionTriple> {
    if n < 2 {
        return None;
    }
    if n < 5 || !is_prime(n) {
        return naive_search(n).map(|(x, y, z)| SolutionTriple::from_u64(x, y, z));
    }
    let p = n;
    let (lo, hi) = brange(p);
    for x in lo..=hi {
        for d in divisors_of_square(x) {
            if type1_holds(p, x, d) {
                return Some(construct_type1(p, x, d));
            }
            if type2_holds(p, x, d) {
                return Some(construct_type2(p, x, d));
            }
        }
    }
    None
}

/// Convenience wrapper returning the triple for `naive_search`.
pub fn naive_triple(n: u64) -> Option<SolutionTriple> {
    naive_search(n).map(|(x, y, z)| SolutionTriple::from_u64(x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple::check_solution;
    use num_bigint::BigUint;

    fn checked(n: u64, t: &SolutionTriple) -> bool {
        check_solution(&BigUint::from(n), t)
    }

    #[test]
    fn naive_search_small_values() {
        assert_eq!(naive_search(2), Some((1, 2, 2)));
        assert_eq!(naive_search(3), Some((1, 4, 12)));
        assert_eq!(naive_search(4), Some((2, 3, 6)));
        assert_eq!(naive_search(1), None);
        assert_eq!(naive_search(0), None);
    }

    #[test]
    fn direct_search_pinned_values() {
        assert_eq!(direct_search(1), None);
        assert_eq!(
            direct_search(2).unwrap(),
            SolutionTriple::from_u64(1, 2, 2)
        );
        assert_eq!(
            direct_search(3).unwrap(),
            SolutionTriple::from_u64(1, 4, 12)
        );
        assert_eq!(
            direct_search(5).unwrap(),
            SolutionTriple::from_u64(2, 5, 10)
        );
        assert_eq!(
            direct_search(73).unwrap(),
            SolutionTriple::from_u64(20, 219, 4380)
        );
    }

    #[test]
    fn direct_search_solves_every_small_n() {
        for n in 2..500u64 {
            let t = direct_search(n).unwrap_or_else(|| panic!("no triple for {n}"));
            assert!(checked(n, &t), "bad triple for {n}");
        }
    }

    #[test]
    fn direct_search_handles_larger_difficult_primes() {
        for p in [1009u64, 1129, 1201, 1801, 110569] {
            let t = direct_search(p).unwrap();
            assert!(checked(p, &t), "bad triple for {p}");
        }
    }

    #[test]
    fn naive_search_returns_ordered_components() {
        for n in 2..200u64 {
            if let Some((x, y, z)) = naive_search(n) {
                assert!(x <= y && y <= z, "n = {n}");
                assert!(checked(n, &SolutionTriple::from_u64(x, y, z)));
            }
        }
    }
}
