//! Command-line toolkit and verification pipeline over `straus-core`:
//! filter bank construction, residue system assembly, batched range
//! verification with checkpoint/resume, sampling audits, and solution
//! counting sweeps, plus the on-disk formats for all of it.

pub mod cli;
pub mod config;
pub mod formats;
pub mod pipeline;
