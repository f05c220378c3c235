//! Invariant sums over edge sets of `Γ_R ⊕ Γ_N`, evaluated by quartic
//! residue symbols, and the Scholz-type predictions for unit symbols.
//!
//! Individual `c_{p,q}` are never exposed: only sums over members of
//! `G(Γ_R) ⊕ C(Γ_N)` have a meaning.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use crate::arith::{big, quartic, Sign, VPrime};
use crate::error::{Error, Result};
use crate::f2graph::{is_residue_edge, EdgeVector, PrimeGraph};

/// Which formula produced an invariant value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    /// A single residue edge `{p, q}`.
    Edge,
    /// A non-residue triangle.
    Triangle,
    /// Any other member.
    General,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Edge => "edge",
            Clause::Triangle => "triangle",
            Clause::General => "general",
        })
    }
}

/// An evaluated invariant sum together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub query: EdgeVector,
    pub member: bool,
    /// `Some(0 | 1)` exactly when `member`.
    pub value: Option<u8>,
    pub clause: Clause,
    /// The primes touched by the query.
    pub support: Vec<u64>,
    /// Number of non-residue edges in the query.
    pub k: usize,
    /// Odd-degree vertices of the non-residue part; empty for members.
    pub odd_vertices: Vec<u64>,
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Some(v) => {
                write!(f, "member, value {v}\nclause: {}\nP: {{", self.clause)?;
                for (i, p) in self.support.iter().enumerate() {
                    write!(f, "{}{p}", if i > 0 { ", " } else { "" })?;
                }
                write!(f, "}}\nk: {}", self.k)
            }
            None => {
                f.write_str("non-member: odd degree at ")?;
                for (i, p) in self.odd_vertices.iter().enumerate() {
                    write!(f, "{}{p}", if i > 0 { ", " } else { "" })?;
                }
                Ok(())
            }
        }
    }
}

fn vprime(p: u64) -> Result<VPrime> {
    VPrime::new(p)
}

fn q4(m: u64, p: VPrime) -> Result<Sign> {
    quartic(&big(m), p)
}

fn bit(zero_when: bool) -> u8 {
    if zero_when {
        0
    } else {
        1
    }
}

/// Invariant of a residue edge: 0 iff `(p/q)₄(q/p)₄ = 1`.
pub fn edge_invariant(p: u64, q: u64) -> Result<u8> {
    Ok(bit(scholz_predict(p, q)? == Sign::Plus))
}

/// `(pq/r)₄(qr/p)₄(rp/q)₄` for a pairwise non-residue triple.
pub fn triangle_product(p: u64, q: u64, r: u64) -> Result<Sign> {
    let (vp, vq, vr) = (vprime(p)?, vprime(q)?, vprime(r)?);
    if p == q || q == r || r == p {
        return Err(Error::domain("triangle: primes must be distinct"));
    }
    for (a, b) in [(vp, vq), (vq, vr), (vr, vp)] {
        if is_residue_edge(a, b) {
            return Err(Error::domain(format!("triangle: ({a}/{b}) = +1, expected -1")));
        }
    }
    Ok(q4(p * q, vr)? * q4(q * r, vp)? * q4(r * p, vq)?)
}

/// Invariant of a non-residue triangle: 0 iff the triangle product is −1.
pub fn triangle_invariant(p: u64, q: u64, r: u64) -> Result<u8> {
    Ok(bit(triangle_product(p, q, r)? == Sign::Minus))
}

/// Builds the report for `i`, evaluating the value through the clause that
/// matches its shape. Non-members get a report without a value.
pub fn report(i: &EdgeVector) -> Result<InvariantReport> {
    let support = i.vertices();
    let graph = PrimeGraph::build(&support)?;
    let odd_vertices = graph.membership_obstruction(i);
    let k = i.iter().filter(|&e| graph.is_nonresidue(e)).count();
    let member = odd_vertices.is_empty();
    let edges: Vec<_> = i.iter().collect();
    let clause = if edges.len() == 1 && k == 0 {
        Clause::Edge
    } else if edges.len() == 3 && k == 3 && support.len() == 3 {
        Clause::Triangle
    } else {
        Clause::General
    };
    let value = if !member {
        None
    } else {
        Some(match clause {
            Clause::Edge => {
                let (p, q) = edges[0].ends();
                edge_invariant(p, q)?
            }
            Clause::Triangle => triangle_invariant(support[0], support[1], support[2])?,
            Clause::General => general_value(i, &support, k)?,
        })
    };
    Ok(InvariantReport { query: i.clone(), member, value, clause, support, k, odd_vertices })
}

/// The invariant sum of a member of `G(Γ_R) ⊕ C(Γ_N)`.
pub fn general_invariant(i: &EdgeVector) -> Result<InvariantReport> {
    let r = report(i)?;
    if !r.member {
        return Err(Error::domain(format!("{i} is not in G(Γ_R) ⊕ C(Γ_N)")));
    }
    Ok(r)
}

/// The general formula, regardless of the query's shape:
/// 0 iff `∏_{p∈P} (∏_{{p,q}∈I} q / p)₄ = (−1)^k`.
pub fn general_formula(i: &EdgeVector) -> Result<u8> {
    let r = general_invariant(i)?;
    general_value(i, &r.support, r.k)
}

fn general_value(i: &EdgeVector, support: &[u64], k: usize) -> Result<u8> {
    let mut neighbours: BTreeMap<u64, BigInt> = BTreeMap::new();
    for e in i.iter() {
        let (a, b) = e.ends();
        *neighbours.entry(a).or_insert_with(|| BigInt::from(1)) *= b;
        *neighbours.entry(b).or_insert_with(|| BigInt::from(1)) *= a;
    }
    let mut product = Sign::Plus;
    for &p in support {
        product *= quartic(&neighbours[&p], vprime(p)?)?;
    }
    Ok(bit(product == Sign::parity(k)))
}

/// Predicted `(ε_p/q)` for a residue pair: `(p/q)₄(q/p)₄`.
pub fn scholz_predict(p: u64, q: u64) -> Result<Sign> {
    let (vp, vq) = (vprime(p)?, vprime(q)?);
    if p == q || !is_residue_edge(vp, vq) {
        return Err(Error::domain(format!("scholz: ({p}/{q}) must be +1")));
    }
    Ok(q4(p, vq)? * q4(q, vp)?)
}

/// Predicted `(ε_{pq}/r)` for a pairwise non-residue triple:
/// `−(pq/r)₄(qr/p)₄(rp/q)₄`.
pub fn scholz2_predict(p: u64, q: u64, r: u64) -> Result<Sign> {
    Ok(-triangle_product(p, q, r)?)
}
