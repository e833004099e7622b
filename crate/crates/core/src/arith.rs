//! Exact integer arithmetic: gcd, modular arithmetic, CRT, primality,
//! factorization, and divisor enumeration.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::rng::SplitMix64;

/// Greatest common divisor.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// `a * b mod m` without intermediate overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `a^e mod m`.
pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Modular inverse of `a` mod `m`, when `gcd(a, m) = 1`.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Combines congruence pairs `(residue, modulus)` with pairwise coprime
/// moduli into a single class via the Chinese remainder theorem.
///
/// Returns `None` if two moduli share a factor or the combined modulus
/// overflows `u64`.
pub fn crt(pairs: &[(u64, u64)]) -> Option<(u64, u64)> {
    let (mut r, mut m) = (0u64, 1u64);
    for &(r2, m2) in pairs {
        if m2 == 0 {
            return None;
        }
        let combined = m.checked_mul(m2)?;
        let inv = mod_inv(m % m2, m2)?;
        let diff = (r2 % m2 + m2 - r % m2) % m2;
        let k = mul_mod(diff, inv, m2);
        r += m * k;
        m = combined;
        debug_assert!(r < m);
    }
    Some((r, m))
}

/// Witnesses making Miller-Rabin deterministic over the full `u64` range.
const MR_BASES_U64: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for mut a in MR_BASES_U64 {
        a %= n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Outcome of a primality test on an arbitrary-precision integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primality {
    Composite,
    Prime,
    ProbablyPrime,
}

/// Miller-Rabin with the first 13 prime bases is exact below this bound.
fn mr13_exact_bound() -> BigUint {
    BigUint::parse_bytes(b"3317044064679887385961981", 10).unwrap()
}

/// Primality of an arbitrary-precision integer.
///
/// Exact (`Prime`/`Composite`) for inputs below 3.317e24; larger inputs
/// additionally run 64 randomized rounds and report `ProbablyPrime` when
/// no witness is found.
pub fn primality(n: &BigUint, rng: &mut SplitMix64) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for p in SMALL_PRIMES {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let bases: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    for a in bases {
        if mr_witness_big(n, &BigUint::from(a)) {
            return Primality::Composite;
        }
    }
    if *n < mr13_exact_bound() {
        return Primality::Prime;
    }
    let bits = n.bits();
    for _ in 0..64 {
        let mut a = BigUint::zero();
        for _ in 0..bits.div_ceil(64) {
            a = (a << 64u32) | BigUint::from(rng.next_u64());
        }
        let a = a % (n - 3u32) + 2u32;
        if mr_witness_big(n, &a) {
            return Primality::Composite;
        }
    }
    Primality::ProbablyPrime
}

/// True when `a` witnesses that odd `n > 2` is composite.
fn mr_witness_big(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return false;
    }
    for _ in 1..s {
        x = x.modpow(&BigUint::from(2u32), n);
        if x == n1 {
            return false;
        }
    }
    true
}

/// Prime factorization of `n`, smallest prime first. Empty for `n < 2`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in SMALL_PRIMES {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut p = 41u64;
    while p * p <= n && p < 1 << 10 {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 2;
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut primes = Vec::new();
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                primes.push(m);
            } else {
                let d = brent_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        primes.sort_unstable();
        for p in primes {
            match out.last_mut() {
                Some(last) if last.0 == p => last.1 += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

/// Brent's variant of Pollard rho. `n` must be odd, composite, and free
/// of factors below 2^10.
fn brent_rho(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut q) = (2u64, 1u64);
        let (mut y, mut ys) = (x, x);
        let mut g = 1u64;
        let mut r = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..r.min(128).min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r <<= 1;
        }
        if g == n {
            g = 1;
            while g == 1 {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    *factorize(n).first().map(|(p, _)| p).unwrap_or(&n)
}

/// All divisors of the number with the given factorization, ascending.
pub fn divisors(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factors {
        let prev = out.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..prev {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// All divisors of `x^2`, ascending. Values can exceed `u64`, so they are
/// returned as `u128`.
pub fn divisors_of_square(x: u64) -> Vec<u128> {
    let factors = factorize(x);
    let mut out = vec![1u128];
    for &(p, e) in &factors {
        let prev = out.len();
        let mut pk = 1u128;
        for _ in 0..2 * e {
            pk *= p as u128;
            for i in 0..prev {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Sieve of Eratosthenes: `out[i]` is true when `i` is prime, for `i <= limit`.
pub fn prime_sieve(limit: usize) -> Vec<bool> {
    let mut sieve = vec![true; limit + 1];
    sieve[0] = false;
    if limit >= 1 {
        sieve[1] = false;
    }
    let mut p = 2usize;
    while p * p <= limit {
        if sieve[p] {
            let mut q = p * p;
            while q <= limit {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    sieve
}

/// Primes up to and including `limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let sieve = prime_sieve(limit as usize);
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as u64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gcd_matches_pinned_example() {
        assert_eq!(gcd(840, 25878772920), 840);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(12, 18), 6);
    }

    #[test]
    fn crt_combines_three_moduli() {
        let got = crt(&[(1, 24), (4, 5), (2, 7)]).unwrap();
        assert_eq!(got, (289, 840));
    }

    #[test]
    fn crt_rejects_shared_factors() {
        assert!(crt(&[(1, 6), (2, 4)]).is_none());
    }

    #[test]
    fn mod_inv_round_trips() {
        for m in [7u64, 840, 25878772920] {
            for a in [1u64, 2, 3, 11, 39916801] {
                if gcd(a, m) != 1 {
                    continue;
                }
                let inv = mod_inv(a, m).unwrap();
                assert_eq!(mul_mod(a % m, inv, m), 1 % m);
            }
        }
        assert!(mod_inv(4, 8).is_none());
    }

    #[test]
    fn is_prime_agrees_with_trial_division_below_10000() {
        let sieve = prime_sieve(10_000);
        for n in 0..=10_000u64 {
            assert_eq!(is_prime(n), sieve[n as usize], "n = {n}");
        }
    }

    #[test]
    fn is_prime_rejects_strong_pseudoprimes() {
        // strong pseudoprimes to several small bases
        for n in [3215031751u64, 3825123056546413051, 341550071728321] {
            assert!(!is_prime(n), "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(is_prime(10_000_000_019));
    }

    #[test]
    fn primality_handles_large_integers() {
        let mut rng = SplitMix64::new(7);
        let p = BigUint::parse_bytes(b"170141183460469231731687303715884105727", 10).unwrap();
        assert_eq!(primality(&p, &mut rng), Primality::ProbablyPrime);
        let c = &p * 3u32;
        assert_eq!(primality(&c, &mut rng), Primality::Composite);
        let small = BigUint::parse_bytes(b"1000000000000002493", 10).unwrap();
        assert_eq!(primality(&small, &mut rng), Primality::Prime);
        // below the 13-base exact bound, but above u64
        let mid = BigUint::parse_bytes(b"2833419889721787128217599", 10).unwrap();
        assert_eq!(primality(&mid, &mut rng), Primality::Prime);
    }

    #[test]
    fn factorize_matches_pinned_example() {
        assert_eq!(
            factorize(25878772920),
            vec![
                (2, 3),
                (3, 1),
                (5, 1),
                (7, 1),
                (11, 1),
                (13, 1),
                (17, 1),
                (19, 1),
                (23, 1),
                (29, 1),
            ]
        );
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(2), vec![(2, 1)]);
        assert_eq!(factorize(1 << 40), vec![(2, 40)]);
    }

    #[test]
    fn factorize_handles_large_semiprimes() {
        let p = 4294967291u64;
        let q = 4294967279u64;
        assert_eq!(factorize(p * q), vec![(q, 1), (p, 1)]);
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        assert_eq!(divisors(&factorize(840)).len(), 32);
        assert_eq!(divisors(&factorize(36)), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(divisors(&[]), vec![1]);
    }

    #[test]
    fn divisors_of_square_matches_direct_enumeration() {
        let got = divisors_of_square(6);
        assert_eq!(got, vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        let big = divisors_of_square(u32::MAX as u64 + 2);
        let x = u32::MAX as u128 + 2;
        assert!(big.contains(&(x * x)));
    }

    #[test]
    fn smallest_prime_factor_examples() {
        assert_eq!(smallest_prime_factor(2), 2);
        assert_eq!(smallest_prime_factor(9), 3);
        assert_eq!(smallest_prime_factor(10_000_000_019), 10_000_000_019);
    }

    #[test]
    fn primes_up_to_counts() {
        assert_eq!(primes_up_to(100).len(), 25);
        assert_eq!(primes_up_to(1).len(), 0);
    }

    proptest! {
        #[test]
        fn factorize_round_trips(n in 2u64..1 << 50) {
            let factors = factorize(n);
            let mut acc = 1u64;
            for &(p, e) in &factors {
                prop_assert!(is_prime(p));
                acc *= p.pow(e);
            }
            prop_assert_eq!(acc, n);
            for w in factors.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
        }

        #[test]
        fn pow_mod_agrees_with_big(a in 0u64..1 << 32, e in 0u64..1 << 16, m in 1u64..1 << 32) {
            let big = BigUint::from(a).modpow(&BigUint::from(e), &BigUint::from(m));
            prop_assert_eq!(BigUint::from(pow_mod(a, e, m)), big);
        }

        #[test]
        fn crt_result_satisfies_both_congruences(r1 in 0u64..8, r2 in 0u64..105) {
            let (r, m) = crt(&[(r1, 8), (r2, 105)]).unwrap();
            prop_assert_eq!(m, 840);
            prop_assert_eq!(r % 8, r1);
            prop_assert_eq!(r % 105, r2);
        }
    }
}
