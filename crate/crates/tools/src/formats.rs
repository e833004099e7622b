//! On-disk formats: identity databases, filters with certificate
//! sidecars, residue systems, verification checkpoints, and the CSV
//! exports. All formats are line-oriented text; writers are
//! deterministic so artifacts can be compared byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use straus_core::filter::{Basis, Cert, Filter};
use straus_core::identity::Identity;
use straus_core::residue::ResidueSystem;
use straus_core::triple::SolutionTriple;
use straus_core::verify::VerifyTotals;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

fn field<T: core::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected {what}")))
}

/// Splits `key=value` with a fixed expected key.
fn keyed<'a>(tok: Option<&'a str>, key: &str, line: usize) -> Result<&'a str, FormatError> {
    match tok.and_then(|t| t.split_once('=')) {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(parse_err(line, format!("expected {key}=..."))),
    }
}

/// Writes via a temporary file in the same directory plus a rename, so an
/// interrupted write never leaves a partial artifact behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), FormatError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

// --- identity database ---

pub fn write_identities(path: &Path, db: &[Identity]) -> Result<(), FormatError> {
    let mut out = String::new();
    let _ = writeln!(out, "# {} identities, one class (modulus, residue) each", db.len());
    for ident in db {
        match ident {
            Identity::T1 { u, v, w } => {
                let _ = writeln!(out, "T1 {u} {v} {w}");
            }
            Identity::T2 { u, v, a } => {
                let _ = writeln!(out, "T2 {u} {v} {a}");
            }
            Identity::Gcd { g, base } => {
                let _ = writeln!(out, "GCD {g} {} {} {}", base.0, base.1, base.2);
            }
        }
    }
    write_atomic(path, &out)
}

pub fn read_identities(path: &Path) -> Result<Vec<Identity>, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut db = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let ident = match toks.next() {
            Some("T1") => Identity::T1 {
                u: field(toks.next(), line, "u")?,
                v: field(toks.next(), line, "v")?,
                w: field(toks.next(), line, "w")?,
            },
            Some("T2") => Identity::T2 {
                u: field(toks.next(), line, "u")?,
                v: field(toks.next(), line, "v")?,
                a: field(toks.next(), line, "a")?,
            },
            Some("GCD") => Identity::Gcd {
                g: field(toks.next(), line, "g")?,
                base: (
                    field(toks.next(), line, "x")?,
                    field(toks.next(), line, "y")?,
                    field(toks.next(), line, "z")?,
                ),
            },
            other => return Err(parse_err(line, format!("unknown identity tag {other:?}"))),
        };
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        db.push(ident);
    }
    Ok(db)
}

// --- filters and certificate sidecars ---

fn basis_tag(basis: &Basis) -> String {
    format!("{},{}", basis.bound, basis.depth())
}

pub fn write_filter(path: &Path, filter: &Filter, basis: &Basis) -> Result<(), FormatError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "FILTER m={} count={} basis={}",
        filter.modulus(),
        filter.len(),
        basis_tag(basis)
    );
    for (r, _) in filter.members() {
        let _ = writeln!(out, "{r}");
    }
    write_atomic(path, &out)
}

pub struct FilterFile {
    pub modulus: u64,
    pub bound: u64,
    pub depth: usize,
    pub members: Vec<u64>,
}

pub fn read_filter(path: &Path) -> Result<FilterFile, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("FILTER") {
        return Err(parse_err(1, "expected FILTER header"));
    }
    let modulus: u64 = keyed(toks.next(), "m", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad modulus"))?;
    let count: usize = keyed(toks.next(), "count", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad count"))?;
    let basis = keyed(toks.next(), "basis", 1)?;
    let (bound, depth) = basis
        .split_once(',')
        .and_then(|(b, d)| Some((b.parse().ok()?, d.parse().ok()?)))
        .ok_or_else(|| parse_err(1, "bad basis"))?;
    let mut members = Vec::with_capacity(count);
    for (i, raw) in lines {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        members.push(
            trimmed
                .parse()
                .map_err(|_| parse_err(line, "bad residue"))?,
        );
    }
    if members.len() != count {
        return Err(parse_err(
            1,
            format!("count={} but {} members", count, members.len()),
        ));
    }
    Ok(FilterFile {
        modulus,
        bound,
        depth,
        members,
    })
}

fn push_cert(out: &mut String, cert: &Cert) {
    match cert {
        Cert::Identity(Identity::T1 { u, v, w }) => {
            let _ = write!(out, "(t1 {u} {v} {w})");
        }
        Cert::Identity(Identity::T2 { u, v, a }) => {
            let _ = write!(out, "(t2 {u} {v} {a})");
        }
        Cert::Identity(Identity::Gcd { g, base }) => {
            let _ = write!(out, "(base {g} {} {} {})", base.0, base.1, base.2);
        }
        Cert::Gcd { g } => {
            let _ = write!(out, "(gcd {g})");
        }
        Cert::Refine { q, children } => {
            let _ = write!(out, "(refine {q}");
            for child in children {
                out.push(' ');
                push_cert(out, child);
            }
            out.push(')');
        }
    }
}

pub fn write_certs(path: &Path, filter: &Filter, basis: &Basis) -> Result<(), FormatError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "CERTS m={} count={} basis={}",
        filter.modulus(),
        filter.len(),
        basis_tag(basis)
    );
    for (r, cert) in filter.members() {
        let _ = write!(out, "{r} ");
        push_cert(&mut out, cert);
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub struct CertFile {
    pub modulus: u64,
    pub members: Vec<(u64, Arc<Cert>)>,
}

enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut toks = Vec::new();
    let mut rest = s;
    while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
        rest = &rest[start..];
        match rest.as_bytes()[0] {
            b'(' => {
                toks.push(Token::Open);
                rest = &rest[1..];
            }
            b')' => {
                toks.push(Token::Close);
                rest = &rest[1..];
            }
            _ => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                toks.push(Token::Atom(&rest[..end]));
                rest = &rest[end..];
            }
        }
    }
    toks
}

fn parse_cert(toks: &[Token<'_>], pos: &mut usize, line: usize) -> Result<Arc<Cert>, FormatError> {
    match toks.get(*pos) {
        Some(Token::Open) => {}
        _ => return Err(parse_err(line, "expected (")),
    }
    *pos += 1;
    let tag = match toks.get(*pos) {
        Some(Token::Atom(a)) => *a,
        _ => return Err(parse_err(line, "expected certificate tag")),
    };
    *pos += 1;
    let num = |what: &str, pos: &mut usize| -> Result<u64, FormatError> {
        match toks.get(*pos) {
            Some(Token::Atom(a)) => {
                *pos += 1;
                a.parse().map_err(|_| parse_err(line, format!("bad {what}")))
            }
            _ => Err(parse_err(line, format!("expected {what}"))),
        }
    };
    let cert = match tag {
        "t1" => Cert::Identity(Identity::T1 {
            u: num("u", pos)?,
            v: num("v", pos)?,
            w: num("w", pos)?,
        }),
        "t2" => Cert::Identity(Identity::T2 {
            u: num("u", pos)?,
            v: num("v", pos)?,
            a: num("a", pos)?,
        }),
        "base" => Cert::Identity(Identity::Gcd {
            g: num("g", pos)?,
            base: (num("x", pos)?, num("y", pos)?, num("z", pos)?),
        }),
        "gcd" => Cert::Gcd { g: num("g", pos)? },
        "refine" => {
            let q = num("q", pos)?;
            let mut children = Vec::with_capacity(q as usize);
            for _ in 0..q {
                children.push(parse_cert(toks, pos, line)?);
            }
            Cert::Refine { q, children }
        }
        other => return Err(parse_err(line, format!("unknown certificate tag {other}"))),
    };
    match toks.get(*pos) {
        Some(Token::Close) => {
            *pos += 1;
            Ok(Arc::new(cert))
        }
        _ => Err(parse_err(line, "expected )")),
    }
}

pub fn read_certs(path: &Path) -> Result<CertFile, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("CERTS") {
        return Err(parse_err(1, "expected CERTS header"));
    }
    let modulus: u64 = keyed(toks.next(), "m", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad modulus"))?;
    let mut members = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (res, rest) = trimmed
            .split_once(' ')
            .ok_or_else(|| parse_err(line, "expected residue and certificate"))?;
        let r: u64 = res.parse().map_err(|_| parse_err(line, "bad residue"))?;
        let tokens = tokenize(rest);
        let mut pos = 0;
        let cert = parse_cert(&tokens, &mut pos, line)?;
        if pos != tokens.len() {
            return Err(parse_err(line, "trailing tokens after certificate"));
        }
        members.push((r, cert));
    }
    Ok(CertFile { modulus, members })
}

// --- residue systems ---

pub fn write_system(path: &Path, system: &ResidueSystem) -> Result<(), FormatError> {
    let mut out = String::new();
    let moduli: Vec<String> = system.moduli().iter().map(u64::to_string).collect();
    let _ = writeln!(
        out,
        "SYSTEM G={} moduli={} count={}",
        system.grand_modulus(),
        moduli.join(","),
        system.residues().len()
    );
    for &r in system.residues() {
        let _ = writeln!(out, "{r}");
    }
    write_atomic(path, &out)
}

pub fn read_system(path: &Path) -> Result<ResidueSystem, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("SYSTEM") {
        return Err(parse_err(1, "expected SYSTEM header"));
    }
    let grand: u64 = keyed(toks.next(), "G", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad grand modulus"))?;
    let moduli: Vec<u64> = keyed(toks.next(), "moduli", 1)?
        .split(',')
        .map(|t| t.parse().map_err(|_| parse_err(1, "bad modulus")))
        .collect::<Result<_, _>>()?;
    let count: usize = keyed(toks.next(), "count", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad count"))?;
    let mut residues = Vec::with_capacity(count);
    for (i, raw) in lines {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        residues.push(
            trimmed
                .parse::<u64>()
                .map_err(|_| parse_err(line, "bad residue"))?,
        );
    }
    if residues.len() != count {
        return Err(parse_err(
            1,
            format!("count={} but {} residues", count, residues.len()),
        ));
    }
    let system = ResidueSystem::from_parts(moduli, residues)
        .map_err(|e| parse_err(1, format!("{e}")))?;
    if system.grand_modulus() != grand {
        return Err(parse_err(1, "grand modulus does not match moduli"));
    }
    Ok(system)
}

// --- verification checkpoints ---

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub fingerprint: String,
    pub next_k: u64,
    pub order: Vec<usize>,
    pub totals: VerifyTotals,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn split_list<T: core::str::FromStr>(v: &str, line: usize, what: &str) -> Result<Vec<T>, FormatError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad {what}"))))
        .collect()
}

/// Writes the checkpoint atomically: a temporary file in the same
/// directory is renamed over the target, so a crash mid-write leaves the
/// previous checkpoint intact.
pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), FormatError> {
    let mut out = String::new();
    let _ = writeln!(out, "CHECKPOINT");
    let _ = writeln!(out, "fingerprint={}", cp.fingerprint);
    let _ = writeln!(out, "next_k={}", cp.next_k);
    let _ = writeln!(out, "batches={}", cp.totals.batches);
    let _ = writeln!(out, "checked={}", cp.totals.checked);
    let _ = writeln!(out, "probes={}", cp.totals.probes);
    let _ = writeln!(out, "hits={}", join(&cp.totals.hits));
    let _ = writeln!(out, "order={}", join(&cp.order));
    let _ = writeln!(out, "composite_escapees={}", cp.totals.composite_escapees);
    let _ = writeln!(out, "prime_escapees_solved={}", cp.totals.prime_escapees_solved);
    let _ = writeln!(out, "counterexamples={}", join(&cp.totals.counterexamples));
    write_atomic(path, &out)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "CHECKPOINT")) => {}
        _ => return Err(parse_err(1, "expected CHECKPOINT header")),
    }
    let mut fingerprint = None;
    let mut next_k = None;
    let mut order = None;
    let mut totals = VerifyTotals::new(0);
    let mut batches = None;
    let mut checked = None;
    let mut probes = None;
    let mut hits = None;
    let mut composite = None;
    let mut solved = None;
    let mut counterexamples = None;
    for (i, raw) in lines {
        let line = i + 1;
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected key=value"))?;
        match k {
            "fingerprint" => fingerprint = Some(v.to_string()),
            "next_k" => next_k = Some(field(Some(v), line, "next_k")?),
            "batches" => batches = Some(field(Some(v), line, "batches")?),
            "checked" => checked = Some(field(Some(v), line, "checked")?),
            "probes" => probes = Some(field(Some(v), line, "probes")?),
            "hits" => hits = Some(split_list(v, line, "hit count")?),
            "order" => order = Some(split_list(v, line, "order index")?),
            "composite_escapees" => composite = Some(field(Some(v), line, "count")?),
            "prime_escapees_solved" => solved = Some(field(Some(v), line, "count")?),
            "counterexamples" => counterexamples = Some(split_list(v, line, "n")?),
            other => return Err(parse_err(line, format!("unknown key {other}"))),
        }
    }
    let missing = |what: &str| parse_err(0, format!("missing {what}"));
    totals.batches = batches.ok_or_else(|| missing("batches"))?;
    totals.checked = checked.ok_or_else(|| missing("checked"))?;
    totals.probes = probes.ok_or_else(|| missing("probes"))?;
    totals.hits = hits.ok_or_else(|| missing("hits"))?;
    totals.composite_escapees = composite.ok_or_else(|| missing("composite_escapees"))?;
    totals.prime_escapees_solved = solved.ok_or_else(|| missing("prime_escapees_solved"))?;
    totals.counterexamples = counterexamples.ok_or_else(|| missing("counterexamples"))?;
    let order: Vec<usize> = order.ok_or_else(|| missing("order"))?;
    if order.len() != totals.hits.len() {
        return Err(parse_err(0, "order and hits lengths differ"));
    }
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &v)| i != v) {
        return Err(parse_err(0, "order is not a permutation"));
    }
    Ok(Checkpoint {
        fingerprint: fingerprint.ok_or_else(|| missing("fingerprint"))?,
        next_k: next_k.ok_or_else(|| missing("next_k"))?,
        order,
        totals,
    })
}

// --- CSV exports ---

pub const ESCAPEE_HEADER: &str = "n,k,is_prime,x,y,z";

pub fn escapee_row(n: u64, k: u64, prime: bool, triple: Option<&SolutionTriple>) -> String {
    match triple {
        Some(t) => format!("{n},{k},{prime},{},{},{}", t.x, t.y, t.z),
        None => format!("{n},{k},{prime},,,"),
    }
}

/// One CSV row per qualifying (x, d, type) candidate of a single prime.
pub fn write_candidates(
    path: &Path,
    p: u64,
    rows: &[crate::pipeline::CandidateRow],
) -> Result<(), FormatError> {
    let mut out = String::from("p,x,d,type,y,z\n");
    for r in rows {
        let _ = writeln!(out, "{p},{},{},{},{},{}", r.x, r.d, r.kind, r.triple.y, r.triple.z);
    }
    write_atomic(path, &out)
}

/// Rows are (index, p, f1, f2, f).
pub fn write_plot(path: &Path, rows: &[(u64, u64, u64, u64, u64)]) -> Result<(), FormatError> {
    let mut out = String::from("i,p,f1,f2,f\n");
    for &(i, p, f1, f2, f) in rows {
        let _ = writeln!(out, "{i},{p},{f1},{f2},{f}");
    }
    write_atomic(path, &out)
}

/// Rows are (n, accepting modulus, replay ok).
pub fn write_audit(
    path: &Path,
    seed: u64,
    max_n: u64,
    rows: &[(u64, u64, bool)],
) -> Result<(), FormatError> {
    let mut out = String::new();
    let _ = writeln!(out, "# replay audit, seed={seed} max_n={max_n}");
    let _ = writeln!(out, "n,modulus,ok");
    for &(n, m, ok) in rows {
        let _ = writeln!(out, "{n},{m},{ok}");
    }
    write_atomic(path, &out)
}
