//! Modular filters: residue classes proven solvable, with replayable
//! coverage certificates.
//!
//! A filter for modulus m is the set S_m of residues r such that every
//! n = r (mod m) provably has a decomposition. Coverage is established
//! three ways, tried in order:
//!
//! 1. an identity whose class `(m', r mod m')` matches for some divisor
//!    m' of m;
//! 2. a gcd rule: g = gcd(r, m) >= 2 lets 4/n inherit a scaled
//!    decomposition of 4/g;
//! 3. refinement: split the class modulo q*m for the next basis prime q
//!    and require every lifted class to be covered.
//!
//! Each covered residue carries a certificate recording which of these
//! succeeded, so membership can be audited later by rebuilding an actual
//! triple for any n in the class.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::arith::{divisors, factorize, gcd, smallest_prime_factor};
use crate::identity::Identity;
use crate::rng::SplitMix64;
use crate::search::naive_search;
use crate::triple::{check_solution, SolutionTriple};

/// Identity database indexed by covered class.
pub struct IdentityIndex {
    db: Vec<Identity>,
    moduli: Vec<u64>,
    /// Per modulus: covered residues (sorted) and the identity covering each.
    classes: Vec<(Vec<u64>, Vec<u32>)>,
}

impl IdentityIndex {
    /// Builds the index. When several identities cover a class, the first
    /// in `db` order wins.
    pub fn new(db: Vec<Identity>) -> Self {
        let mut grouped: BTreeMap<u64, BTreeMap<u64, u32>> = BTreeMap::new();
        for (id, ident) in db.iter().enumerate() {
            let (m, r) = ident.class();
            grouped.entry(m).or_default().entry(r).or_insert(id as u32);
        }
        let mut moduli = Vec::with_capacity(grouped.len());
        let mut classes = Vec::with_capacity(grouped.len());
        for (m, map) in grouped {
            moduli.push(m);
            let residues: Vec<u64> = map.keys().copied().collect();
            let ids: Vec<u32> = map.values().copied().collect();
            classes.push((residues, ids));
        }
        Self {
            db,
            moduli,
            classes,
        }
    }

    /// The identity covering class `(modulus, residue)`, if any.
    pub fn lookup(&self, modulus: u64, residue: u64) -> Option<&Identity> {
        let slot = self.moduli.binary_search(&modulus).ok()?;
        let (residues, ids) = &self.classes[slot];
        let at = residues.binary_search(&residue).ok()?;
        Some(&self.db[ids[at] as usize])
    }

    /// True when any identity lives at this modulus.
    pub fn has_modulus(&self, modulus: u64) -> bool {
        self.moduli.binary_search(&modulus).is_ok()
    }

    pub fn identities(&self) -> &[Identity] {
        &self.db
    }

    /// Distinct moduli present, ascending.
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }
}

/// Search basis for the coverage engine: identity enumeration bound and
/// refinement prime sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub bound: u64,
    pub primes: Vec<u64>,
}

impl Basis {
    /// Canonical basis for a given refinement depth: primes 2, 2, 3, 5, 7,
    /// 11, ... (the first prime twice, then odd primes ascending).
    pub fn new(bound: u64, depth: usize) -> Self {
        let mut primes = Vec::with_capacity(depth);
        if depth >= 1 {
            primes.push(2);
        }
        let mut p = 2u64;
        while primes.len() < depth {
            primes.push(p);
            p = (p + 1..).find(|&c| crate::arith::is_prime(c)).unwrap();
        }
        Self { bound, primes }
    }

    pub fn depth(&self) -> usize {
        self.primes.len()
    }
}

impl Default for Basis {
    /// Depth 5, bound 50: enough to reproduce the classical filters for
    /// the moduli 8, 3, 5, 7 instantly.
    fn default() -> Self {
        Self::new(50, 5)
    }
}

/// A replayable proof that a residue class is covered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cert {
    /// An identity applies at some divisor of the class modulus.
    Identity(Identity),
    /// Every member shares the factor g >= 2 with the modulus.
    Gcd { g: u64 },
    /// All q lifts of the class modulo q*m are covered; children are
    /// ordered by lift index i, covering r + i*m (mod q*m).
    Refine { q: u64, children: Vec<Arc<Cert>> },
}

enum Memo {
    Covered(Arc<Cert>),
    /// Uncovered when explored with this much refinement budget left.
    Uncovered(usize),
}

/// Certificate-producing coverage search over one identity index.
///
/// The memo caches results per class: positive entries are valid at any
/// budget (certificates do not depend on how much budget was left),
/// negative entries only preclude re-exploration at equal or lower budget.
pub struct CoverageEngine<'a> {
    index: &'a IdentityIndex,
    primes: Vec<u64>,
    gcd_cap: u64,
    memo: BTreeMap<(u64, u64), Memo>,
    gcd_bases: BTreeMap<u64, bool>,
}

/// Largest g for which the gcd rule searches a base decomposition of 4/g
/// directly; beyond it the smallest prime factor of g stands in.
pub const GCD_SEARCH_CAP: u64 = 10_000;

impl<'a> CoverageEngine<'a> {
    pub fn new(index: &'a IdentityIndex, basis: &Basis) -> Self {
        Self {
            index,
            primes: basis.primes.clone(),
            gcd_cap: GCD_SEARCH_CAP,
            memo: BTreeMap::new(),
            gcd_bases: BTreeMap::new(),
        }
    }

    pub fn index(&self) -> &'a IdentityIndex {
        self.index
    }

    /// Attempts to prove that every n = residue (mod modulus) has a
    /// decomposition, returning the certificate on success.
    pub fn is_covered(&mut self, residue: u64, modulus: u64) -> Option<Arc<Cert>> {
        debug_assert!(modulus >= 1 && residue < modulus);
        let fac = factorize(modulus);
        self.covered_at(residue, modulus, &fac, 0)
    }

    fn covered_at(
        &mut self,
        r: u64,
        m: u64,
        fac: &[(u64, u32)],
        depth: usize,
    ) -> Option<Arc<Cert>> {
        let budget = self.primes.len() - depth;
        match self.memo.get(&(r, m)) {
            Some(Memo::Covered(cert)) => return Some(cert.clone()),
            Some(Memo::Uncovered(had)) if *had >= budget => return None,
            _ => {}
        }
        if let Some(cert) = self.identity_hit(r, fac) {
            let cert = Arc::new(cert);
            self.memo.insert((r, m), Memo::Covered(cert.clone()));
            return Some(cert);
        }
        if let Some(cert) = self.gcd_hit(r, m) {
            let cert = Arc::new(cert);
            self.memo.insert((r, m), Memo::Covered(cert.clone()));
            return Some(cert);
        }
        if depth < self.primes.len() {
            let q = self.primes[depth];
            if let Some(lifted) = m.checked_mul(q) {
                let child_fac = merge_factor(fac, q);
                let mut children = Vec::with_capacity(q as usize);
                let mut all = true;
                for i in 0..q {
                    match self.covered_at(r + i * m, lifted, &child_fac, depth + 1) {
                        Some(c) => children.push(c),
                        None => {
                            all = false;
                            break;
                        }
                    }
                }
                if all {
                    let cert = Arc::new(Cert::Refine { q, children });
                    self.memo.insert((r, m), Memo::Covered(cert.clone()));
                    return Some(cert);
                }
            }
        }
        // budget-0 failures are cheap to rediscover; skip storing them
        if budget > 0 {
            self.memo.insert((r, m), Memo::Uncovered(budget));
        }
        None
    }

    fn identity_hit(&self, r: u64, fac: &[(u64, u32)]) -> Option<Cert> {
        for d in divisors(fac) {
            if let Some(ident) = self.index.lookup(d, r % d) {
                return Some(Cert::Identity(*ident));
            }
        }
        None
    }

    fn gcd_hit(&mut self, r: u64, m: u64) -> Option<Cert> {
        let g = gcd(r, m);
        if g < 2 {
            return None;
        }
        let target = if g <= self.gcd_cap {
            g
        } else {
            let p = smallest_prime_factor(g);
            if p > self.gcd_cap {
                return None;
            }
            p
        };
        let index = self.index;
        let solvable = *self
            .gcd_bases
            .entry(target)
            .or_insert_with(|| gcd_base(index, target).is_some());
        solvable.then(|| Cert::Gcd { g: target })
    }
}

/// Base decomposition of 4/g used by gcd certificates: the identity
/// database first, then bounded direct search.
pub fn gcd_base(index: &IdentityIndex, g: u64) -> Option<(u64, u64, u64)> {
    for d in divisors(&factorize(g)) {
        if let Some(ident) = index.lookup(d, g % d) {
            let t = ident.construct(&BigUint::from(g))?;
            return Some(triple_to_u64(&t));
        }
    }
    naive_search(g)
}

fn triple_to_u64(t: &SolutionTriple) -> (u64, u64, u64) {
    use num_traits::ToPrimitive;
    (
        t.x.to_u64().expect("base component fits u64"),
        t.y.to_u64().expect("base component fits u64"),
        t.z.to_u64().expect("base component fits u64"),
    )
}

fn merge_factor(fac: &[(u64, u32)], q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::with_capacity(fac.len() + 1);
    let mut placed = false;
    for &(p, e) in fac {
        if p == q {
            out.push((p, e + 1));
            placed = true;
        } else {
            if !placed && p > q {
                out.push((q, 1));
                placed = true;
            }
            out.push((p, e));
        }
    }
    if !placed {
        out.push((q, 1));
    }
    out
}

/// A built filter: the covered residues of one modulus, each with its
/// certificate.
#[derive(Clone, Debug)]
pub struct Filter {
    modulus: u64,
    members: Vec<(u64, Arc<Cert>)>,
}

impl Filter {
    pub fn from_members(modulus: u64, members: Vec<(u64, Arc<Cert>)>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0].0 < w[1].0));
        Self { modulus, members }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True when n falls in a covered class.
    pub fn accepts(&self, n: u64) -> bool {
        let r = n % self.modulus;
        self.members.binary_search_by_key(&r, |(m, _)| *m).is_ok()
    }

    /// The certificate for n's class, when covered.
    pub fn certificate(&self, n: u64) -> Option<&Arc<Cert>> {
        let r = n % self.modulus;
        self.members
            .binary_search_by_key(&r, |(m, _)| *m)
            .ok()
            .map(|at| &self.members[at].1)
    }

    pub fn members(&self) -> &[(u64, Arc<Cert>)] {
        &self.members
    }

    pub fn member_residues(&self) -> Vec<u64> {
        self.members.iter().map(|(r, _)| *r).collect()
    }
}

/// Builds the filter for one modulus by testing coverage of every residue.
pub fn build_filter(modulus: u64, engine: &mut CoverageEngine<'_>) -> Filter {
    let mut members = Vec::new();
    for r in 0..modulus {
        if let Some(cert) = engine.is_covered(r, modulus) {
            members.push((r, cert));
        }
    }
    Filter::from_members(modulus, members)
}

/// Replays a certificate for a concrete n, producing the triple it
/// promises. `modulus` is the modulus of the filter the certificate came
/// from; n must lie in the certified class.
pub fn construct_from_cert(
    n: &BigUint,
    modulus: u64,
    cert: &Cert,
    index: &IdentityIndex,
) -> Option<SolutionTriple> {
    match cert {
        Cert::Identity(ident) => ident.construct(n),
        Cert::Gcd { g } => {
            let base = gcd_base(index, *g)?;
            Identity::Gcd { g: *g, base }.construct(n)
        }
        Cert::Refine { q, children } => {
            let lifted = modulus.checked_mul(*q)?;
            let r_lifted = residue_of(n, lifted);
            let r = r_lifted % modulus;
            let i = (r_lifted - r) / modulus;
            construct_from_cert(n, lifted, children.get(i as usize)?, index)
        }
    }
}

fn residue_of(n: &BigUint, m: u64) -> u64 {
    use num_traits::ToPrimitive;
    (n % m).to_u64().unwrap()
}

/// Outcome of replaying a filter's certificates on random members.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub checks: u64,
    /// (residue, sampled n) for every replay that failed to produce a
    /// checked solution.
    pub failures: Vec<(u64, u64)>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Samples `samples_per_class` random members (up to 10^12) of each
/// covered class, replays the class certificate on each, and checks the
/// constructed triple exactly. Any failure is a defect in the filter.
pub fn audit_filter(
    filter: &Filter,
    index: &IdentityIndex,
    samples_per_class: usize,
    seed: u64,
) -> AuditReport {
    const MAX_N: u64 = 1_000_000_000_000;
    let mut rng = SplitMix64::new(seed);
    let m = filter.modulus();
    let mut report = AuditReport {
        checks: 0,
        failures: Vec::new(),
    };
    for (r, cert) in filter.members() {
        let span = (MAX_N - r) / m + 1;
        for _ in 0..samples_per_class {
            let mut n = r + m * rng.next_below(span);
            if n < 2 {
                n += m;
            }
            report.checks += 1;
            let big = BigUint::from(n);
            let ok = construct_from_cert(&big, m, cert, index)
                .map(|t| check_solution(&big, &t))
                .unwrap_or(false);
            if !ok {
                report.failures.push((*r, n));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::enumerate_db;
    use crate::triple::check_solution;
    use alloc::vec;

    fn engine_for(bound: u64, depth: usize) -> (IdentityIndex, Basis) {
        let index = IdentityIndex::new(enumerate_db(bound));
        let basis = Basis {
            bound,
            primes: Basis::new(bound, depth).primes,
        };
        (index, basis)
    }

    #[test]
    fn canonical_basis_prime_sequence() {
        assert_eq!(Basis::new(4, 3).primes, vec![2, 2, 3]);
        assert_eq!(Basis::new(50, 5).primes, vec![2, 2, 3, 5, 7]);
        assert_eq!(Basis::new(50, 0).primes, vec![]);
        assert_eq!(Basis::default().primes, vec![2, 2, 3, 5, 7]);
    }

    #[test]
    fn classical_filters_at_default_basis() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        assert_eq!(
            build_filter(8, &mut engine).member_residues(),
            vec![0, 2, 3, 4, 5, 6, 7]
        );
        assert_eq!(build_filter(3, &mut engine).member_residues(), vec![0, 2]);
        assert_eq!(build_filter(5, &mut engine).member_residues(), vec![0, 2, 3]);
        assert_eq!(
            build_filter(7, &mut engine).member_residues(),
            vec![0, 3, 5, 6]
        );
    }

    #[test]
    fn classical_filters_hold_at_minimal_basis() {
        let (index, basis) = engine_for(4, 3);
        let mut engine = CoverageEngine::new(&index, &basis);
        assert_eq!(build_filter(5, &mut engine).member_residues(), vec![0, 2, 3]);
        assert_eq!(
            build_filter(7, &mut engine).member_residues(),
            vec![0, 3, 5, 6]
        );
    }

    #[test]
    fn residue_one_is_never_covered() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        for m in [3u64, 5, 7, 8, 11, 24, 120] {
            assert!(engine.is_covered(1 % m, m).is_none(), "m = {m}");
        }
    }

    #[test]
    fn replay_produces_checked_triples() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        for m in [5u64, 7, 8] {
            let filter = build_filter(m, &mut engine);
            for (r, cert) in filter.members() {
                for k in 1..4u64 {
                    let n_val = r + k * m;
                    if n_val < 2 {
                        continue;
                    }
                    let n = BigUint::from(n_val);
                    let t = construct_from_cert(&n, m, cert, &index).unwrap();
                    assert!(
                        check_solution(&n, &t),
                        "replay failed: m = {m}, r = {r}, n = {n_val}"
                    );
                }
            }
        }
    }

    #[test]
    fn gcd_rule_covers_zero_residue() {
        let (index, basis) = engine_for(4, 3);
        let mut engine = CoverageEngine::new(&index, &basis);
        let cert = engine.is_covered(0, 5).unwrap();
        let n = BigUint::from(25u32);
        let t = construct_from_cert(&n, 5, &cert, &index).unwrap();
        assert!(check_solution(&n, &t));
    }

    #[test]
    fn filter_membership_queries() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        let f = build_filter(8, &mut engine);
        assert!(f.accepts(16));
        assert!(f.accepts(10));
        assert!(!f.accepts(17));
        assert_eq!(f.len(), 7);
        assert_eq!(f.modulus(), 8);
    }

    #[test]
    fn memo_negative_entries_respect_budget() {
        let (index, basis) = engine_for(4, 3);
        let mut engine = CoverageEngine::new(&index, &basis);
        // exhaust the class at full budget, then ask again: both must agree
        assert!(engine.is_covered(1, 8).is_none());
        assert!(engine.is_covered(1, 8).is_none());
        // a covered class stays covered on re-query
        let a = engine.is_covered(3, 8).unwrap();
        let b = engine.is_covered(3, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn audit_passes_on_a_sound_filter() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        let f = build_filter(5, &mut engine);
        let report = audit_filter(&f, &index, 10, 1);
        assert_eq!(report.checks, 30);
        assert!(report.all_pass());
    }

    #[test]
    fn audit_flags_an_injected_member() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        let sound = build_filter(5, &mut engine);
        let borrowed = sound.members()[1].1.clone();
        let mut members = sound.members().to_vec();
        members.insert(1, (1, borrowed));
        let corrupt = Filter::from_members(5, members);
        let report = audit_filter(&corrupt, &index, 5, 1);
        assert_eq!(report.checks, 20);
        assert!(!report.all_pass());
        assert!(report.failures.iter().all(|&(r, n)| r == 1 && n % 5 == 1));
        assert_eq!(report.failures.len(), 5);
    }

    #[test]
    fn audit_with_zero_samples_is_empty() {
        let (index, basis) = engine_for(50, 5);
        let mut engine = CoverageEngine::new(&index, &basis);
        let f = build_filter(7, &mut engine);
        let report = audit_filter(&f, &index, 0, 99);
        assert_eq!(report.checks, 0);
        assert!(report.all_pass());
    }

    #[test]
    fn certificates_are_identical_across_engines() {
        let (index, basis) = engine_for(50, 5);
        let mut one = CoverageEngine::new(&index, &basis);
        let mut two = CoverageEngine::new(&index, &basis);
        let full = build_filter(11, &mut one);
        // second engine queries residues in reverse order
        let mut reversed: Vec<(u64, Arc<Cert>)> = (0..11u64)
            .rev()
            .filter_map(|r| two.is_covered(r, 11).map(|c| (r, c)))
            .collect();
        reversed.reverse();
        assert_eq!(full.members().len(), reversed.len());
        for ((r1, c1), (r2, c2)) in full.members().iter().zip(&reversed) {
            assert_eq!(r1, r2);
            assert_eq!(c1, c2);
        }
    }
}
