//! Batch verification against a bank of filters.
//!
//! Each candidate is probed against the bank in the current probe order.
//! The first accepting filter claims a hit; candidates no filter accepts
//! are escapees and go to direct search when prime. A prime escapee with
//! no solution would be a counterexample.

use alloc::vec;
use alloc::vec::Vec;

use crate::arith::is_prime;
use crate::filter::Filter;
use crate::search::direct_search;
use crate::triple::SolutionTriple;

/// A candidate no filter in the bank accepted.
#[derive(Clone, Debug)]
pub struct Escapee {
    pub n: u64,
    pub batch: u64,
    pub prime: bool,
    /// Present exactly when `prime` and direct search succeeded.
    pub triple: Option<SolutionTriple>,
}

impl Escapee {
    /// A prime escapee that direct search could not solve.
    pub fn is_counterexample(&self) -> bool {
        self.prime && self.triple.is_none()
    }
}

/// Outcome of verifying one batch.
#[derive(Clone, Debug)]
pub struct BatchReport {
    pub batch: u64,
    /// Candidates actually verified (n = 1 is skipped).
    pub checked: u64,
    /// Hits per filter, indexed by bank position.
    pub hits: Vec<u64>,
    /// Total filter probes spent, counting each miss and the final hit.
    pub probes: u64,
    pub escapees: Vec<Escapee>,
}

impl BatchReport {
    /// Every checked candidate is either a hit or an escapee.
    pub fn conserved(&self) -> bool {
        let hit_total: u64 = self.hits.iter().sum();
        hit_total + self.escapees.len() as u64 == self.checked
    }
}

/// Verifies one batch of candidates against the bank, probing filters in
/// the given order. `order` is a permutation of bank positions; hits are
/// reported under the bank position, not the probe position, so counters
/// stay comparable across reorderings.
pub fn verify_batch(members: &[u64], batch: u64, bank: &[Filter], order: &[usize]) -> BatchReport {
    debug_assert_eq!(order.len(), bank.len());
    let mut report = BatchReport {
        batch,
        checked: 0,
        hits: vec![0; bank.len()],
        probes: 0,
        escapees: Vec::new(),
    };
    for &n in members {
        if n < 2 {
            continue;
        }
        report.checked += 1;
        let mut accepted = false;
        for (probed, &pos) in order.iter().enumerate() {
            if bank[pos].accepts(n) {
                report.hits[pos] += 1;
                report.probes += probed as u64 + 1;
                accepted = true;
                break;
            }
        }
        if accepted {
            continue;
        }
        report.probes += bank.len() as u64;
        let prime = is_prime(n);
        let triple = if prime { direct_search(n) } else { None };
        report.escapees.push(Escapee {
            n,
            batch,
            prime,
            triple,
        });
    }
    report
}

/// Running totals across batches.
#[derive(Clone, Debug)]
pub struct VerifyTotals {
    pub batches: u64,
    pub checked: u64,
    pub hits: Vec<u64>,
    pub probes: u64,
    pub composite_escapees: u64,
    pub prime_escapees_solved: u64,
    pub counterexamples: Vec<u64>,
}

impl VerifyTotals {
    pub fn new(bank_len: usize) -> Self {
        Self {
            batches: 0,
            checked: 0,
            hits: vec![0; bank_len],
            probes: 0,
            composite_escapees: 0,
            prime_escapees_solved: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn absorb(&mut self, report: &BatchReport) {
        self.batches += 1;
        self.checked += report.checked;
        for (total, &h) in self.hits.iter_mut().zip(&report.hits) {
            *total += h;
        }
        self.probes += report.probes;
        for e in &report.escapees {
            if !e.prime {
                self.composite_escapees += 1;
            } else if e.triple.is_some() {
                self.prime_escapees_solved += 1;
            } else {
                self.counterexamples.push(e.n);
            }
        }
    }

    pub fn escapees(&self) -> u64 {
        self.composite_escapees + self.prime_escapees_solved + self.counterexamples.len() as u64
    }

    pub fn mean_probes(&self) -> f64 {
        if self.checked == 0 {
            return 0.0;
        }
        self.probes as f64 / self.checked as f64
    }
}

/// Probe order with the most-hit filters first. Stable: ties keep bank
/// order, so reordering is reproducible.
pub fn reorder_by_hits(hits: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| hits[b].cmp(&hits[a]).then(a.cmp(&b)));
    order
}
