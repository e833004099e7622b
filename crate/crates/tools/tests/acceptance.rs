//! End-to-end acceptance checks, one test per claim: classical filter
//! anchors, the 840 residue system, certificate soundness under replay,
//! oracle agreement of the counting sweep, a full desk verification run,
//! byte-identical artifacts across worker counts, the difficult-prime
//! census, type-1 dominance over the first 300 difficult primes, adaptive
//! probe reordering, and campaign-scale parameters. Each test prints one
//! labeled line with the measured numbers.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use straus_core::arith::primes_up_to;
use straus_core::bradford::count_solutions;
use straus_core::filter::{
    audit_filter, build_filter, Basis, CoverageEngine, Filter, IdentityIndex,
};
use straus_core::identity::enumerate_db;
use straus_core::oracle::count_ordered;
use straus_core::residue::build_system;
use straus_tools::formats;
use straus_tools::pipeline::{
    audit_bank, bank_moduli, build_bank, census, profile_reordering, run_verification, trend_rows,
    VerifyOptions, VerifyOutcome,
};

const DESK_MODULI: [u64; 6] = [8, 3, 5, 7, 11, 13];
const DESK_BOUND: u64 = 8000;
const DESK_DEPTH: usize = 5;
const DESK_LIMIT: u64 = 10_000_000;

struct Desk {
    index: IdentityIndex,
    basis: Basis,
    bank: Vec<Filter>,
}

/// The 500-filter desk bank: filters for the six system moduli, then for
/// ascending primes coprime to all of them.
fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let index = IdentityIndex::new(enumerate_db(DESK_BOUND));
        let basis = Basis::new(DESK_BOUND, DESK_DEPTH);
        let moduli = bank_moduli(&DESK_MODULI, 500);
        let bank = build_bank(&moduli, &index, &basis);
        Desk { index, basis, bank }
    })
}

struct SweepArtifacts {
    report: Vec<u8>,
    checkpoint: Vec<u8>,
    escapees: Vec<u8>,
    outcome: VerifyOutcome,
}

/// Runs the full desk sweep once per worker count, keeping every byte it
/// produces.
fn sweep(workers: usize) -> &'static SweepArtifacts {
    static W1: OnceLock<SweepArtifacts> = OnceLock::new();
    static W4: OnceLock<SweepArtifacts> = OnceLock::new();
    static W16: OnceLock<SweepArtifacts> = OnceLock::new();
    let cell = match workers {
        1 => &W1,
        4 => &W4,
        16 => &W16,
        _ => panic!("unexpected worker count {workers}"),
    };
    cell.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let checkpoint = dir.path().join("sweep.checkpoint");
        let escapees = dir.path().join("escapees.csv");
        let mut opts = VerifyOptions::new(DESK_MODULI.to_vec(), DESK_LIMIT);
        opts.workers = workers;
        opts.checkpoint = Some(checkpoint.clone());
        opts.escapees = Some(escapees.clone());
        let mut report = Vec::new();
        let outcome = run_verification(&opts, &mut report).unwrap();
        SweepArtifacts {
            report,
            checkpoint: fs::read(&checkpoint).unwrap(),
            escapees: fs::read(&escapees).unwrap(),
            outcome,
        }
    })
}

#[test]
fn c01_filter_anchors() {
    let default = Basis::default();
    assert!(default.bound >= 4);
    assert!(default.depth() >= 3);
    assert_eq!(&default.primes[..3], &[2, 2, 3]);
    let index = IdentityIndex::new(enumerate_db(default.bound));
    let mut engine = CoverageEngine::new(&index, &default);
    assert_eq!(build_filter(5, &mut engine).member_residues(), vec![0, 2, 3]);
    assert_eq!(
        build_filter(7, &mut engine).member_residues(),
        vec![0, 3, 5, 6]
    );
    let minimal_index = IdentityIndex::new(enumerate_db(4));
    let minimal = Basis::new(4, 3);
    let mut engine = CoverageEngine::new(&minimal_index, &minimal);
    assert_eq!(build_filter(5, &mut engine).member_residues(), vec![0, 2, 3]);
    assert_eq!(
        build_filter(7, &mut engine).member_residues(),
        vec![0, 3, 5, 6]
    );
    println!(
        "PASS filter anchors: m=5 -> {{0,2,3}}, m=7 -> {{0,3,5,6}} at default ({}, {}) and minimal (4, 3) basis",
        default.bound,
        default.depth()
    );
}

#[test]
fn c02_mordell_residue_system() {
    let desk = desk();
    let system = build_system(&desk.bank[..4], &desk.index).unwrap();
    assert_eq!(system.grand_modulus(), 840);
    assert_eq!(system.residues(), &[1, 121, 169, 289, 361, 529]);
    println!(
        "PASS residue system: moduli 8,3,5,7 -> G=840, R={:?}",
        system.residues()
    );
}

#[test]
fn c03_certificate_replay_audit() {
    let desk = desk();
    for filter in &desk.bank[..4] {
        let per_class = audit_filter(filter, &desk.index, 100, 1);
        assert!(
            per_class.all_pass(),
            "m={} failures: {:?}",
            filter.modulus(),
            per_class.failures
        );
    }
    let audit = audit_bank(&desk.bank, &desk.index, 1000, 1_000_000_000, 1);
    assert_eq!(audit.rows.len(), 1000);
    assert_eq!(audit.failures(), 0);
    println!(
        "PASS certificate audit: 1000 sampled integers <= 10^9 replay to checked triples, 0 failures ({} unfiltered samples skipped)",
        audit.skipped
    );
}

#[test]
fn c04_counting_matches_the_oracle() {
    let primes: Vec<u64> = primes_up_to(1999).into_iter().filter(|&p| p >= 5).collect();
    for &p in &primes {
        let c = count_solutions(p);
        assert_eq!((c.f, c.f1, c.f2), count_ordered(p), "disagreement at p={p}");
    }
    let five = count_solutions(5);
    let seven = count_solutions(7);
    assert_eq!((five.f, five.f1, five.f2), (3, 1, 2));
    assert_eq!((seven.f, seven.f1, seven.f2), (8, 5, 3));
    println!(
        "PASS oracle agreement: count_solutions equals the ordered-triple oracle for all {} primes in 5..2000; f(5)=3, f(7)=8",
        primes.len()
    );
}

#[test]
fn c05_desk_verification_sweep() {
    let sweep = sweep(4);
    let outcome = &sweep.outcome;
    assert!(!outcome.dry_run);
    assert_eq!(outcome.system.grand_modulus(), 120_120);
    assert_eq!(outcome.system.residues().len(), 207);
    assert_eq!(outcome.planned_batches, 84);
    assert_eq!(outcome.bank_len, 500);
    let totals = &outcome.totals;
    assert_eq!(totals.batches, 84);
    assert_eq!(totals.checked, 84 * 207 - 1);
    assert!(totals.counterexamples.is_empty());
    assert!(outcome.counterexample.is_none());
    let hits: u64 = totals.hits.iter().sum();
    assert_eq!(hits + totals.escapees(), totals.checked);
    println!(
        "PASS desk sweep: limit 10^7 over G=120120 ({} classes, 84 batches), {} checked, {} composite escapees, {} prime escapees solved, 0 counterexamples, mean probes {:.2}",
        outcome.system.residues().len(),
        totals.checked,
        totals.composite_escapees,
        totals.prime_escapees_solved,
        totals.mean_probes()
    );
}

fn artifact_digest(workers: usize) -> String {
    let sweep = sweep(workers);
    let dir = tempfile::tempdir().unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap();
    let db_path = dir.path().join("identities.txt");
    let filter_paths = [
        dir.path().join("filter5.txt"),
        dir.path().join("filter7.txt"),
    ];
    let cert_paths = [dir.path().join("certs5.txt"), dir.path().join("certs7.txt")];
    let system_path = dir.path().join("system.txt");
    pool.install(|| {
        let index = IdentityIndex::new(enumerate_db(DESK_BOUND));
        let basis = Basis::new(DESK_BOUND, DESK_DEPTH);
        formats::write_identities(&db_path, index.identities()).unwrap();
        let anchors = build_bank(&[5, 7], &index, &basis);
        for (filter, (f_path, c_path)) in anchors.iter().zip(filter_paths.iter().zip(&cert_paths)) {
            formats::write_filter(f_path, filter, &basis).unwrap();
            formats::write_certs(c_path, filter, &basis).unwrap();
        }
        let system = build_system(&build_bank(&[8, 3, 5, 7], &index, &basis), &index).unwrap();
        formats::write_system(&system_path, &system).unwrap();
    });
    let mut hasher = Sha256::new();
    for bytes in [&sweep.report, &sweep.checkpoint, &sweep.escapees] {
        hasher.update(bytes);
    }
    let paths: Vec<&Path> = [&db_path]
        .into_iter()
        .chain(&filter_paths)
        .chain(&cert_paths)
        .chain([&system_path])
        .map(|p| p.as_path())
        .collect();
    for path in paths {
        hasher.update(fs::read(path).unwrap());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn c06_artifacts_identical_across_worker_counts() {
    let one = artifact_digest(1);
    let four = artifact_digest(4);
    let sixteen = artifact_digest(16);
    assert_eq!(one, four);
    assert_eq!(four, sixteen);
    println!(
        "PASS determinism: report, checkpoint, escapee log, identity db, filters, certificates, and system bytes hash to {} for 1, 4, and 16 workers",
        &one[..16]
    );
}

#[test]
fn c07_difficult_prime_census() {
    let primes = census(35_000_000);
    assert_eq!(primes.len(), 66_737);
    assert_eq!(primes[0], 1009);
    println!("PASS census: 66737 difficult primes <= 3.5e7, first 1009");
}

#[test]
fn c08_type1_dominance_over_first_300() {
    let primes: Vec<u64> = census(120_000).into_iter().take(300).collect();
    assert_eq!(primes.len(), 300);
    assert_eq!(primes[299], 110_569);
    let rows = trend_rows(&primes);
    assert!(rows.iter().all(|r| r.f >= 1));
    let f1: u64 = rows.iter().map(|r| r.f1).sum();
    let f2: u64 = rows.iter().map(|r| r.f2).sum();
    let both: u64 = rows.iter().map(|r| r.both).sum();
    let f: u64 = rows.iter().map(|r| r.f).sum();
    assert_eq!((f1, f2, both, f), (12_715, 13_234, 1_162, 25_949));
    assert!(f1 > f2 - both);
    println!(
        "PASS type-1 trend: first 300 difficult primes all have f >= 1; type-1 sum {} exceeds exclusive type-2 sum {} (inclusive tallies {} and {}, overlap {}, total {})",
        f1,
        f2 - both,
        f1,
        f2,
        both,
        f
    );
}

#[test]
fn c09_reordering_lowers_mean_probes() {
    let desk = desk();
    let system = build_system(&desk.bank[..4], &desk.index).unwrap();
    let profile = profile_reordering(&system, &desk.bank, 1001, 100);
    assert_eq!(profile.batches, 1001);
    assert!(profile.adaptive_mean() <= profile.static_mean());
    println!(
        "PASS reordering: {} batches, mean probes per candidate {:.2} static vs {:.2} adaptive",
        profile.batches,
        profile.static_mean(),
        profile.adaptive_mean()
    );
}

#[test]
fn c10_campaign_parameters() {
    let moduli = vec![8, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    let mut opts = VerifyOptions::new(moduli, 1_000_000_000_000_000_000);
    opts.dry_run = true;
    let mut report = Vec::new();
    let outcome = run_verification(&opts, &mut report).unwrap();
    assert!(outcome.dry_run);
    assert_eq!(outcome.system.grand_modulus(), 25_878_772_920);
    assert_eq!(outcome.planned_batches, 38_641_709);
    assert_eq!(outcome.system.residues().len(), 3_651_649);
    println!(
        "PASS campaign parameters: moduli through 29 at limit 10^18 -> G=25878772920, 38641709 batches, {} surviving classes here (efficiency {}) vs 2101514 (12314.3) in the published campaign",
        outcome.system.residues().len(),
        outcome.system.efficiency_display()
    );
}
