//! Continuous piecewise-linear iterated function systems on the real line.
//!
//! A system is a finite family of continuous piecewise-linear contractions,
//! each with finitely many breakpoints and nonzero slopes of modulus < 1.
//! The maps need not be injective. This crate computes the geometry such a
//! system generates:
//!
//! - the smallest invariant interval and the cylinder intervals over it
//!   ([`pwl`]),
//! - the self-similar system read off the linearity pieces, and exact
//!   separation scans over its translations ([`generated`]),
//! - regularity: whether deep cylinders avoid every breakpoint, and bounded
//!   distortion constants when they do ([`regularity`]),
//! - graph-directed systems, their pressure matrices, Perron roots, and the
//!   Markov measures they carry ([`gdifs`]),
//! - dimension estimators: direct pressure roots, Moran covers, box-counting
//!   slopes, and attractor sampling ([`dimension`]),
//! - parameter-space scans for regularity failure and derivative bound
//!   checks ([`paramscan`]).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in companion crates.
//! Everything here is deterministic: the only randomness is the seeded
//! generator in [`rng`].

#![no_std]
#![deny(missing_docs)]

extern crate alloc;

pub mod dimension;
#[cfg(test)]
mod fixtures;
pub mod generated;
pub mod gdifs;
pub mod interval;
mod math;
mod matrix;
pub mod paramscan;
pub mod pwl;
pub mod rational;
pub mod regularity;
pub mod rng;

use alloc::string::String;
use core::fmt;

/// Errors shared across the crate's operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input vectors disagree in length or an index is out of range.
    DimensionMismatch(String),
    /// A map or system failed structural validation.
    Invalid(String),
    /// An iteration hit its cap before reaching the requested tolerance.
    NonConvergence(String),
    /// An enumeration would exceed the configured work budget.
    BudgetExceeded(String),
    /// A graph-directed system is not strongly connected.
    NotStronglyConnected,
    /// An edge ratio lies outside (0, 1) in modulus.
    BadRatio(String),
    /// A matrix whose nonzero pattern must be irreducible is reducible.
    Reducible,
    /// The system is not regular at the requested order.
    NotRegular(String),
    /// No root exists for the requested equation.
    NoRoot(String),
    /// A parameter axis does not exist for the given system.
    BadAxis(String),
    /// Exact rational arithmetic overflowed its fixed-width representation.
    Overflow(String),
    /// The system is degenerate for the requested operation.
    Degenerate(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(s) => write!(f, "dimension mismatch: {s}"),
            Error::Invalid(s) => write!(f, "invalid input: {s}"),
            Error::NonConvergence(s) => write!(f, "iteration did not converge: {s}"),
            Error::BudgetExceeded(s) => write!(f, "work budget exceeded: {s}"),
            Error::NotStronglyConnected => write!(f, "graph is not strongly connected"),
            Error::BadRatio(s) => write!(f, "edge ratio out of range: {s}"),
            Error::Reducible => write!(f, "matrix is reducible"),
            Error::NotRegular(s) => write!(f, "system is not regular: {s}"),
            Error::NoRoot(s) => write!(f, "no root: {s}"),
            Error::BadAxis(s) => write!(f, "no such parameter axis: {s}"),
            Error::Overflow(s) => write!(f, "rational overflow: {s}"),
            Error::Degenerate(s) => write!(f, "degenerate system: {s}"),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// A word over the map alphabet, letters `0..m` (0-based).
///
/// The word `[i1, i2, ..., in]` denotes the composition applied leftmost
/// first: `f_{i1} ∘ f_{i2} ∘ ... ∘ f_{in}`.
pub type Word = alloc::vec::Vec<usize>;

/// Default cap on enumerated words for pressure sums, separation scans, and
/// cylinder refinement. Callers may override it; the command-line layer maps
/// an environment budget onto these arguments.
pub const DEFAULT_BUDGET: usize = 2_000_000;
