//! Core routines for computational work on the Erdős-Straus conjecture:
//! every fraction 4/n with n >= 2 is a sum of three positive unit fractions.
//!
//! The crate provides the pieces a verification or counting campaign is
//! built from:
//!
//! * exact integer arithmetic ([`arith`]): gcd, CRT, deterministic
//!   primality, factorization, divisor enumeration;
//! * parametric decomposition identities and their enumeration ([`identity`]);
//! * modular filters with replayable coverage certificates ([`filter`]);
//! * residue systems that reduce a verification bound to a short list of
//!   surviving classes ([`residue`]);
//! * batch verification with escapee classification ([`verify`]);
//! * solution counting over the Bradford search space ([`bradford`]);
//! * direct per-integer decomposition search ([`search`]).
//!
//! Everything here is `no_std` (with `alloc`); IO, file formats, and the
//! command line live in the companion `straus-tools` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arith;
pub mod bradford;
pub mod filter;
pub mod identity;
pub mod residue;
pub mod rng;
pub mod search;
pub mod triple;
pub mod verify;

#[cfg(feature = "oracle")]
pub mod oracle;
