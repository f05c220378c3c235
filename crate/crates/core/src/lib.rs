//! Quartic residue symbols, fundamental units of real quadratic fields,
//! exact multiquadratic arithmetic and F2 graphs on primes `p ≢ 3 (mod 4)`.
//!
//! Everything here is pure computation over `alloc`; file formats, the
//! persistent unit cache and the command-line driver live in the `scholz`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod apps;
pub mod arith;
pub mod error;
pub mod f2graph;
pub mod invariants;
pub mod mquad;
pub mod pell;

pub use arith::{Sign, VPrime};
pub use error::{Error, Result};
pub use f2graph::{Edge, EdgeVector, Graph, PrimeGraph};
pub use invariants::{Clause, InvariantReport};
pub use mquad::{Interval, MQElement, MQField, SquareConfig, SquareVerdict};
pub use pell::{Direct, QuadUnit, UnitSource};
