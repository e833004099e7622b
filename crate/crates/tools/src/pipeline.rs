//! End-to-end verification runs: bank construction, residue system
//! assembly, batched sweeps with adaptive probe reordering and
//! checkpoint/resume, replay audits, and counting sweeps.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use num_bigint::BigUint;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use straus_core::arith::{divisors_of_square, is_prime};
use straus_core::bradford::{
    brange, construct_type1, construct_type2, count_solutions, difficult_primes, type1_holds,
    type2_holds,
};
use straus_core::filter::{
    build_filter, construct_from_cert, Basis, CoverageEngine, Filter, IdentityIndex,
};
use straus_core::identity::enumerate_db;
use straus_core::residue::{build_system, ResidueSystem, SystemError};
use straus_core::rng::SplitMix64;
use straus_core::triple::{check_solution, SolutionTriple};
use straus_core::verify::{reorder_by_hits, verify_batch, BatchReport, VerifyTotals};

use crate::formats::{self, Checkpoint, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("residue system: {0}")]
    System(SystemError),
    #[error("checkpoint was written by a different configuration")]
    CheckpointMismatch,
    #[error("checkpoint bank size does not match")]
    CheckpointShape,
    #[error("batch {0} failed conservation: hits + escapees != checked")]
    Conservation(u64),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// System moduli followed by ascending primes coprime to all of them,
/// extended until `total` moduli.
pub fn bank_moduli(system: &[u64], total: usize) -> Vec<u64> {
    let mut out = system.to_vec();
    let mut q = 2u64;
    while out.len() < total {
        if is_prime(q) && system.iter().all(|&m| m % q != 0) {
            out.push(q);
        }
        q += 1;
    }
    out
}

/// Builds one filter per modulus, in parallel, each with its own
/// coverage engine. Certificates do not depend on engine history, so the
/// result is identical at any worker count.
pub fn build_bank(moduli: &[u64], index: &IdentityIndex, basis: &Basis) -> Vec<Filter> {
    moduli
        .par_iter()
        .map(|&m| {
            let mut engine = CoverageEngine::new(index, basis);
            build_filter(m, &mut engine)
        })
        .collect()
}

/// Digest of the system and bank contents. Checkpoints carry it so a
/// resume against different filters is refused.
pub fn bank_fingerprint(system: &ResidueSystem, bank: &[Filter]) -> String {
    let mut h = Sha256::new();
    h.update(system.grand_modulus().to_le_bytes());
    for &r in system.residues() {
        h.update(r.to_le_bytes());
    }
    for f in bank {
        h.update(f.modulus().to_le_bytes());
        for (r, _) in f.members() {
            h.update(r.to_le_bytes());
        }
    }
    use std::fmt::Write as _;
    let digest = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Moduli of the residue system; must be pairwise coprime.
    pub moduli: Vec<u64>,
    /// Total filters in the probe bank, system filters included.
    pub bank_size: usize,
    /// Identity database bound for the bank filters.
    pub bound: u64,
    /// Refinement depth for the bank filters.
    pub depth: usize,
    /// Verify 2..=limit (the final batch is processed whole).
    pub limit: u64,
    pub workers: usize,
    /// Batches per group; probes are reordered between groups.
    pub reorder_interval: u64,
    pub checkpoint: Option<PathBuf>,
    pub escapees: Option<PathBuf>,
    /// Stop after this many batches in this invocation.
    pub max_batches: Option<u64>,
    /// Build everything and report the plan without verifying.
    pub dry_run: bool,
}

impl VerifyOptions {
    pub fn new(moduli: Vec<u64>, limit: u64) -> Self {
        Self {
            moduli,
            bank_size: 500,
            bound: 8000,
            depth: 5,
            limit,
            workers: 4,
            reorder_interval: 100,
            checkpoint: None,
            escapees: None,
            max_batches: None,
            dry_run: false,
        }
    }
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub system: ResidueSystem,
    pub bank_len: usize,
    pub fingerprint: String,
    pub planned_batches: u64,
    pub totals: VerifyTotals,
    pub counterexample: Option<u64>,
    pub dry_run: bool,
}

pub fn run_verification(
    opts: &VerifyOptions,
    out: &mut dyn Write,
) -> Result<VerifyOutcome, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()?;
    let index = IdentityIndex::new(enumerate_db(opts.bound));
    let basis = Basis::new(opts.bound, opts.depth);
    let moduli = bank_moduli(&opts.moduli, opts.bank_size.max(opts.moduli.len()));
    let bank = pool.install(|| build_bank(&moduli, &index, &basis));
    let system =
        build_system(&bank[..opts.moduli.len()], &index).map_err(PipelineError::System)?;
    let fingerprint = bank_fingerprint(&system, &bank);
    writeln!(
        out,
        "bank: {} filters, identity bound {}, depth {}",
        bank.len(),
        opts.bound,
        opts.depth
    )?;
    let moduli_list: Vec<String> = system.moduli().iter().map(u64::to_string).collect();
    writeln!(
        out,
        "system: moduli {} G={} classes={} efficiency={}",
        moduli_list.join(","),
        system.grand_modulus(),
        system.residues().len(),
        system.efficiency_display()
    )?;
    let planned = system.batch_count(opts.limit);
    writeln!(
        out,
        "plan: limit={} batches={} candidates={}",
        opts.limit,
        planned,
        planned as u128 * system.residues().len() as u128
    )?;

    let mut totals = VerifyTotals::new(bank.len());
    let mut order: Vec<usize> = (0..bank.len()).collect();
    let mut next_k = 0u64;

    if opts.dry_run {
        writeln!(out, "dry run: stopping before verification")?;
        return Ok(VerifyOutcome {
            system,
            bank_len: bank.len(),
            fingerprint,
            planned_batches: planned,
            totals,
            counterexample: None,
            dry_run: true,
        });
    }

    if let Some(path) = &opts.checkpoint {
        if path.exists() {
            let cp = formats::read_checkpoint(path)?;
            if cp.fingerprint != fingerprint {
                return Err(PipelineError::CheckpointMismatch);
            }
            if cp.totals.hits.len() != bank.len() {
                return Err(PipelineError::CheckpointShape);
            }
            next_k = cp.next_k;
            order = cp.order;
            totals = cp.totals;
            writeln!(out, "resume: batch {} of {}", next_k, planned)?;
        }
    }

    let mut escapee_file = match &opts.escapees {
        Some(path) => {
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            let mut w = BufWriter::new(file);
            if w.get_ref().metadata()?.len() == 0 {
                writeln!(w, "{}", formats::ESCAPEE_HEADER)?;
            }
            Some(w)
        }
        None => None,
    };

    let stop = match opts.max_batches {
        Some(m) => planned.min(next_k.saturating_add(m)),
        None => planned,
    };
    let mut counterexample = None;
    while next_k < stop && counterexample.is_none() {
        let group_end = (next_k + opts.reorder_interval).min(stop);
        let ks: Vec<u64> = (next_k..group_end).collect();
        let reports: Vec<BatchReport> = pool.install(|| {
            ks.par_iter()
                .map(|&k| verify_batch(&system.batch(k), k, &bank, &order))
                .collect()
        });
        let before = (totals.checked, totals.escapees());
        for report in &reports {
            if !report.conserved() {
                return Err(PipelineError::Conservation(report.batch));
            }
            totals.absorb(report);
            if let Some(w) = &mut escapee_file {
                for e in &report.escapees {
                    writeln!(
                        w,
                        "{}",
                        formats::escapee_row(e.n, e.batch, e.prime, e.triple.as_ref())
                    )?;
                }
            }
            if let Some(e) = report.escapees.iter().find(|e| e.is_counterexample()) {
                counterexample = Some(e.n);
            }
        }
        if let Some(w) = &mut escapee_file {
            w.flush()?;
        }
        next_k = group_end;
        order = reorder_by_hits(&totals.hits);
        if let Some(path) = &opts.checkpoint {
            formats::write_checkpoint(
                path,
                &Checkpoint {
                    fingerprint: fingerprint.clone(),
                    next_k,
                    order: order.clone(),
                    totals: totals.clone(),
                },
            )?;
        }
        writeln!(
            out,
            "batches {}..{}: checked={} escapees={}",
            ks[0],
            group_end - 1,
            totals.checked - before.0,
            totals.escapees() - before.1
        )?;
    }

    writeln!(
        out,
        "totals: batches={} checked={} filtered={} composite_escapees={} prime_escapees_solved={} counterexamples={}",
        totals.batches,
        totals.checked,
        totals.hits.iter().sum::<u64>(),
        totals.composite_escapees,
        totals.prime_escapees_solved,
        totals.counterexamples.len()
    )?;
    writeln!(out, "mean probes per candidate: {:.2}", totals.mean_probes())?;
    if let Some(n) = counterexample {
        writeln!(out, "COUNTEREXAMPLE: n={n} escaped every filter and direct search found no decomposition")?;
    }
    Ok(VerifyOutcome {
        system,
        bank_len: bank.len(),
        fingerprint,
        planned_batches: planned,
        totals,
        counterexample,
        dry_run: false,
    })
}

#[derive(Clone, Debug)]
pub struct AuditOutcome {
    pub seed: u64,
    pub max_n: u64,
    /// (n, accepting modulus, replay produced a checked solution).
    pub rows: Vec<(u64, u64, bool)>,
    /// Sampled integers no bank filter accepted (not counted as rows).
    pub skipped: u64,
}

impl AuditOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|&&(_, _, ok)| !ok).count()
    }
}

/// Samples integers in 2..=max_n, replays the certificate of the first
/// accepting filter for each, and checks the resulting triple exactly.
pub fn audit_bank(
    bank: &[Filter],
    index: &IdentityIndex,
    samples: usize,
    max_n: u64,
    seed: u64,
) -> AuditOutcome {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(samples);
    let mut skipped = 0;
    while rows.len() < samples {
        let n = 2 + rng.next_below(max_n - 1);
        let hit = bank.iter().find_map(|f| {
            f.certificate(n % f.modulus())
                .map(|cert| (f.modulus(), cert))
        });
        match hit {
            None => skipped += 1,
            Some((m, cert)) => {
                let big = BigUint::from(n);
                let ok = construct_from_cert(&big, m, cert, index)
                    .map(|t| check_solution(&big, &t))
                    .unwrap_or(false);
                rows.push((n, m, ok));
            }
        }
    }
    AuditOutcome {
        seed,
        max_n,
        rows,
        skipped,
    }
}

#[derive(Clone, Debug)]
pub struct ProfileOutcome {
    pub batches: u64,
    pub checked: u64,
    pub static_probes: u64,
    pub adaptive_probes: u64,
}

impl ProfileOutcome {
    pub fn static_mean(&self) -> f64 {
        self.static_probes as f64 / self.checked as f64
    }

    pub fn adaptive_mean(&self) -> f64 {
        self.adaptive_probes as f64 / self.checked as f64
    }
}

/// Runs the same batches twice: once probing in bank order throughout,
/// once reordering by cumulative hits every `interval` batches.
pub fn profile_reordering(
    system: &ResidueSystem,
    bank: &[Filter],
    batches: u64,
    interval: u64,
) -> ProfileOutcome {
    let static_order: Vec<usize> = (0..bank.len()).collect();
    let mut static_totals = VerifyTotals::new(bank.len());
    let mut adaptive_totals = VerifyTotals::new(bank.len());
    let mut order = static_order.clone();
    let mut k = 0;
    while k < batches {
        let end = (k + interval).min(batches);
        let ks: Vec<u64> = (k..end).collect();
        let run = |ord: &[usize]| -> Vec<BatchReport> {
            ks.par_iter()
                .map(|&k| verify_batch(&system.batch(k), k, bank, ord))
                .collect()
        };
        for report in run(&static_order) {
            static_totals.absorb(&report);
        }
        for report in run(&order) {
            adaptive_totals.absorb(&report);
        }
        order = reorder_by_hits(&adaptive_totals.hits);
        k = end;
    }
    ProfileOutcome {
        batches,
        checked: static_totals.checked,
        static_probes: static_totals.probes,
        adaptive_probes: adaptive_totals.probes,
    }
}

#[derive(Clone, Debug)]
pub struct TrendRow {
    pub index: u64,
    pub p: u64,
    pub f: u64,
    pub f1: u64,
    pub f2: u64,
    pub both: u64,
    pub de: u64,
}

/// Solution counts for each prime, in order; index is 1-based.
pub fn trend_rows(primes: &[u64]) -> Vec<TrendRow> {
    primes
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let c = count_solutions(p);
            TrendRow {
                index: i as u64 + 1,
                p,
                f: c.f,
                f1: c.f1,
                f2: c.f2,
                both: c.both,
                de: c.de,
            }
        })
        .collect()
}

/// One qualifying (x, d, type) candidate with its constructed triple.
#[derive(Clone, Debug)]
pub struct CandidateRow {
    pub x: u64,
    pub d: u128,
    /// 1 or 2.
    pub kind: u8,
    pub triple: SolutionTriple,
}

/// Every qualifying candidate for one prime, ascending by (x, d, type).
pub fn candidate_rows(p: u64) -> Vec<CandidateRow> {
    let (lo, hi) = brange(p);
    let mut rows = Vec::new();
    for x in lo..=hi {
        for d in divisors_of_square(x) {
            if type1_holds(p, x, d) {
                rows.push(CandidateRow {
                    x,
                    d,
                    kind: 1,
                    triple: construct_type1(p, x, d),
                });
            }
            if type2_holds(p, x, d) {
                rows.push(CandidateRow {
                    x,
                    d,
                    kind: 2,
                    triple: construct_type2(p, x, d),
                });
            }
        }
    }
    rows
}

/// The primes in the six difficult classes mod 840, up to and including
/// `limit`.
pub fn census(limit: u64) -> Vec<u64> {
    difficult_primes(limit)
}
