//! Key=value run configuration. Values from the command line take
//! precedence over the config file, which takes precedence over built-in
//! defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::formats::FormatError;

pub type Config = BTreeMap<String, String>;

pub fn parse(text: &str) -> Result<Config, FormatError> {
    let mut cfg = Config::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(FormatError::Parse {
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        cfg.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<Config, FormatError> {
    parse(&std::fs::read_to_string(path)?)
}

/// Parses a count that may use underscores or scientific notation with a
/// non-negative integral value: "10000000", "10_000_000", "1e7", "3.5e7".
pub fn parse_magnitude(s: &str) -> Option<u64> {
    let s: String = s.chars().filter(|&c| c != '_').collect();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<u32>().ok()?),
        None => (s.as_str(), 0),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let value: u128 = digits.parse().ok()?;
    let shift = exp.checked_sub(frac.len() as u32)?;
    let scaled = value.checked_mul(10u128.checked_pow(shift)?)?;
    u64::try_from(scaled).ok()
}

/// Comma-separated modulus list, e.g. "8,3,5,7".
pub fn parse_moduli(s: &str) -> Option<Vec<u64>> {
    let parts: Option<Vec<u64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
    parts.filter(|v| !v.is_empty())
}

/// Flag > config > default, for counts parsed with [`parse_magnitude`].
pub fn resolve_magnitude(
    flag: Option<&str>,
    cfg: &Config,
    key: &str,
    default: Option<u64>,
) -> Result<Option<u64>, String> {
    let source = flag.map(str::to_string).or_else(|| cfg.get(key).cloned());
    match source {
        Some(s) => parse_magnitude(&s)
            .map(Some)
            .ok_or_else(|| format!("invalid {key}: {s}")),
        None => Ok(default),
    }
}

pub fn resolve_moduli(
    flag: Option<&str>,
    cfg: &Config,
    key: &str,
) -> Result<Option<Vec<u64>>, String> {
    let source = flag.map(str::to_string).or_else(|| cfg.get(key).cloned());
    match source {
        Some(s) => parse_moduli(&s)
            .map(Some)
            .ok_or_else(|| format!("invalid {key}: {s}")),
        None => Ok(None),
    }
}

pub fn resolve_path(
    flag: Option<std::path::PathBuf>,
    cfg: &Config,
    key: &str,
) -> Option<std::path::PathBuf> {
    flag.or_else(|| cfg.get(key).map(std::path::PathBuf::from))
}

pub fn resolve_switch(flag: bool, cfg: &Config, key: &str) -> Result<bool, String> {
    if flag {
        return Ok(true);
    }
    match cfg.get(key).map(String::as_str) {
        None => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some("false") | Some("0") => Ok(false),
        Some(other) => Err(format!("invalid {key}: {other}")),
    }
}
