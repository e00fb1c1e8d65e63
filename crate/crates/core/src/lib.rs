//! Exact distance distributions of the `N x N` integer lattice and its subsets.
//!
//! Everything here is pure computation over immutable inputs and builds with
//! `no_std` + `alloc`. File formats, the command-line tool and the parallel
//! drivers live in the `lattice-dist` companion crate.
//!
//! Distances are always keyed by their square `d = a² + b²`; floating point
//! only shows up where a real-valued quantity is reported (thresholds,
//! export columns).

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod combin;
mod error;

pub mod epsilon;
pub mod lattice;
pub mod numtheory;
pub mod search;
pub mod subset;

pub use combin::{binomial, Combinations};
pub use error::Error;

/// Exact rational used for every error value.
pub type Rational = num_rational::BigRational;

pub type Result<T, E = Error> = core::result::Result<T, E>;
