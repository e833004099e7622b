//! Solution counting over the bounded search space for prime
//! denominators.
//!
//! For prime p, every decomposition 4/p = 1/x + 1/y + 1/z with p dividing
//! z has x in the range ceil(p/4) <= x <= ceil(p/2). Writing a = 4x - p,
//! each solution corresponds to a divisor d of x^2 (with complement
//! d' = x^2/d) satisfying one of two divisibility conditions:
//!
//! * type 1 (p does not divide y): a | px + d and a | px + p^2 d',
//!   giving y = (px + d)/a and z = px(px + d)/(ad);
//! * type 2 (p divides y): a | x + d and a | x + d',
//!   giving y = p(x + d)/a and z = px(x + d)/(ad).
//!
//! Counting qualifying (x, d, type) candidates evaluates the
//! solution-counting function f(p).

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::arith::prime_sieve;
use crate::triple::SolutionTriple;

/// The x-range `ceil(p/4) ..= ceil(p/2)` searched for solutions.
pub fn brange(p: u64) -> (u64, u64) {
    (p.div_ceil(4), p.div_ceil(2))
}

/// Residues mod 840 of the primes not settled by the classical filters.
pub const DIFFICULT_CLASSES: [u64; 6] = [1, 121, 169, 289, 361, 529];

/// Primes up to `limit` in the six hard residue classes mod 840,
/// ascending.
pub fn difficult_primes(limit: u64) -> Vec<u64> {
    let sieve = prime_sieve(limit as usize);
    let mut out = Vec::new();
    for (n, &is_p) in sieve.iter().enumerate() {
        if is_p && DIFFICULT_CLASSES.contains(&(n as u64 % 840)) {
            out.push(n as u64);
        }
    }
    out
}

/// True when the type-1 condition holds for the divisor d of x^2.
pub fn type1_holds(p: u64, x: u64, d: u128) -> bool {
    let x2 = x as u128 * x as u128;
    if d == 0 || x2 % d != 0 {
        return false;
    }
    let dp = x2 / d;
    let a = (4 * x - p) as u128;
    let px = p as u128 * x as u128;
    let pa = p as u128 % a;
    (px + d) % a == 0 && (px + pa * pa % a * (dp % a)) % a == 0
}

/// True when the type-2 condition holds for the divisor d of x^2.
pub fn type2_holds(p: u64, x: u64, d: u128) -> bool {
    let x2 = x as u128 * x as u128;
    if d == 0 || x2 % d != 0 {
        return false;
    }
    let dp = x2 / d;
    let a = (4 * x - p) as u128;
    (x as u128 + d) % a == 0 && (x as u128 + dp) % a == 0
}

/// The type-1 triple for a qualifying (x, d).
pub fn construct_type1(p: u64, x: u64, d: u128) -> SolutionTriple {
    let a = BigUint::from(4 * x - p);
    let px = BigUint::from(p) * x;
    let y = (&px + d) / &a;
    let z = &px * (&px + d) / (a * d);
    SolutionTriple::new(BigUint::from(x), y, z)
}

/// The type-2 triple for a qualifying (x, d).
pub fn construct_type2(p: u64, x: u64, d: u128) -> SolutionTriple {
    let a = BigUint::from(4 * x - p);
    let xd = BigUint::from(x) + d;
    let y = BigUint::from(p) * &xd / &a;
    let z = BigUint::from(p) * x * &xd / (a * d);
    SolutionTriple::new(BigUint::from(x), y, z)
}

/// Solution counts for one prime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountResult {
    /// Qualifying (x, d, type) candidates: f1 + f2.
    pub f: u64,
    /// Type-1 candidates.
    pub f1: u64,
    /// Type-2 candidates.
    pub f2: u64,
    /// Divisors satisfying both conditions (counted in f1 and in f2).
    pub both: u64,
    /// Divisors examined across the whole range.
    pub de: u64,
}

/// Evaluates f(p) by checking both conditions for every divisor of x^2
/// across the search range. Requires odd p with 5 <= p < 2^32.
pub fn count_solutions(p: u64) -> CountResult {
    assert!(p >= 5 && p % 2 == 1 && p < 1 << 32);
    let (lo, hi) = brange(p);
    let mut res = CountResult::default();
    let mut divisor_buf: Vec<u64> = Vec::new();
    for_each_factored(lo, hi, |x, factors| {
        let x2 = x * x;
        divisor_buf.clear();
        divisor_buf.push(1);
        for &(q, e) in factors {
            let prev = divisor_buf.len();
            let mut qk = 1u64;
            for _ in 0..2 * e {
                qk *= q;
                for i in 0..prev {
                    divisor_buf.push(divisor_buf[i] * qk);
                }
            }
        }
        let a = 4 * x - p;
        let xa = x % a;
        let pa = p % a;
        let pax = (pa as u128 * xa as u128 % a as u128) as u64;
        let pa2 = (pa as u128 * pa as u128 % a as u128) as u64;
        for &d in divisor_buf.iter() {
            let dp = x2 / d;
            let da = d % a;
            let dpa = dp % a;
            let t1 = (pax + da) % a == 0
                && (pax + (pa2 as u128 * dpa as u128 % a as u128) as u64) % a == 0;
            let t2 = (xa + da) % a == 0 && (xa + dpa) % a == 0;
            res.f1 += t1 as u64;
            res.f2 += t2 as u64;
            res.both += (t1 && t2) as u64;
        }
        res.de += divisor_buf.len() as u64;
    });
    res.f = res.f1 + res.f2;
    res
}

/// Totals across a sweep of primes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AggregateStats {
    /// Primes processed.
    pub n: u64,
    /// Divisors examined.
    pub t: u64,
    /// Condition-satisfying counts: s1 + s2.
    pub s: u64,
    /// Type-1 counts.
    pub s1: u64,
    /// Type-2 counts.
    pub s2: u64,
    /// Divisors counted in both s1 and s2.
    pub both: u64,
}

/// Sums per-prime counts into sweep totals.
pub fn aggregate<I: IntoIterator<Item = CountResult>>(results: I) -> AggregateStats {
    let mut stats = AggregateStats::default();
    for r in results {
        stats.n += 1;
        stats.t += r.de;
        stats.s1 += r.f1;
        stats.s2 += r.f2;
        stats.both += r.both;
    }
    stats.s = stats.s1 + stats.s2;
    stats
}

/// Streams (x, prime factorization of x) over `lo ..= hi` using a
/// segmented sieve, in ascending order.
fn for_each_factored(lo: u64, hi: u64, mut visit: impl FnMut(u64, &[(u64, u32)])) {
    const BLOCK: u64 = 1 << 16;
    let root = hi.isqrt() + 2;
    let small: Vec<u64> = prime_sieve(root as usize)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as u64)
        .collect();
    let mut rem: Vec<u64> = Vec::new();
    let mut factors: Vec<Vec<(u64, u32)>> = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = (start + BLOCK - 1).min(hi);
        let len = (end - start + 1) as usize;
        rem.clear();
        rem.extend(start..=end);
        factors.iter_mut().for_each(Vec::clear);
        factors.resize(len.max(factors.len()), Vec::new());
        for &q in &small {
            if q * q > end {
                break;
            }
            let first = start.div_ceil(q) * q;
            let mut j = first;
            while j <= end {
                let slot = (j - start) as usize;
                let mut e = 0u32;
                while rem[slot] % q == 0 {
                    rem[slot] /= q;
                    e += 1;
                }
                factors[slot].push((q, e));
                j += q;
            }
        }
        for i in 0..len {
            if rem[i] > 1 {
                factors[i].push((rem[i], 1));
            }
            visit(start + i as u64, &factors[i]);
        }
        start = end + 1;
    }
}
