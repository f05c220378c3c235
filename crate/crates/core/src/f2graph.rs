//! Residue and non-residue graphs on primes of `V`, and their F2 edge spaces.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{BitXor, BitXorAssign};

use crate::arith::{self, big, VPrime};
use crate::error::{Error, Result};

/// An unordered pair of distinct vertices, stored with the smaller end first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(u64, u64);

impl Edge {
    pub fn new(a: u64, b: u64) -> Edge {
        assert_ne!(a, b, "edge endpoints must differ");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn ends(self) -> (u64, u64) {
        (self.0, self.1)
    }

    pub fn touches(self, v: u64) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// A finite set of edges; addition is symmetric difference.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeVector(BTreeSet<Edge>);

impl EdgeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn triangle(a: u64, b: u64, c: u64) -> Self {
        [Edge::new(a, b), Edge::new(b, c), Edge::new(c, a)].into_iter().collect()
    }

    /// Adds `e` over F2: inserts it if absent, removes it if present.
    pub fn toggle(&mut self, e: Edge) {
        if !self.0.remove(&e) {
            self.0.insert(e);
        }
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().copied()
    }

    /// Endpoints of the support, ascending.
    pub fn vertices(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.0.iter().flat_map(|e| [e.0, e.1]).collect();
        set.into_iter().collect()
    }

    pub fn degrees(&self) -> BTreeMap<u64, usize> {
        let mut deg = BTreeMap::new();
        for e in &self.0 {
            *deg.entry(e.0).or_insert(0) += 1;
            *deg.entry(e.1).or_insert(0) += 1;
        }
        deg
    }

    /// Vertices of odd degree, ascending.
    pub fn odd_vertices(&self) -> Vec<u64> {
        self.degrees().into_iter().filter(|(_, d)| d % 2 == 1).map(|(v, _)| v).collect()
    }

    /// F2 pairing: parity of the common support.
    pub fn dot(&self, other: &EdgeVector) -> bool {
        self.0.intersection(&other.0).count() % 2 == 1
    }

    pub fn filter(&self, mut keep: impl FnMut(Edge) -> bool) -> EdgeVector {
        self.iter().filter(|&e| keep(e)).collect()
    }
}

impl FromIterator<Edge> for EdgeVector {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        let mut v = EdgeVector::new();
        for e in iter {
            v.toggle(e);
        }
        v
    }
}

impl BitXorAssign<&EdgeVector> for EdgeVector {
    fn bitxor_assign(&mut self, rhs: &EdgeVector) {
        for &e in &rhs.0 {
            self.toggle(e);
        }
    }
}

impl BitXor<&EdgeVector> for &EdgeVector {
    type Output = EdgeVector;

    fn bitxor(self, rhs: &EdgeVector) -> EdgeVector {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl fmt::Display for EdgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// A finite simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<u64>,
    edges: Vec<Edge>,
}

impl Graph {
    /// Vertices and edges are sorted and deduplicated; every edge endpoint
    /// must be a vertex.
    pub fn new(vertices: impl IntoIterator<Item = u64>, edges: impl IntoIterator<Item = Edge>) -> Result<Graph> {
        let mut vertices: Vec<u64> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        if let Some(e) = edges.iter().find(|e| vertices.binary_search(&e.0).is_err() || vertices.binary_search(&e.1).is_err()) {
            return Err(Error::domain(format!("edge {e} leaves the vertex set")));
        }
        Ok(Graph { vertices, edges })
    }

    pub fn vertices(&self) -> &[u64] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn star(&self, v: u64) -> EdgeVector {
        self.edges.iter().copied().filter(|e| e.touches(v)).collect()
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        let mut count = self.vertices.len();
        for e in &self.edges {
            if uf.union(self.index(e.0), self.index(e.1)) {
                count -= 1;
            }
        }
        count
    }

    fn index(&self, v: u64) -> usize {
        self.vertices.binary_search(&v).expect("vertex of this graph")
    }

    fn to_bits(&self, v: &EdgeVector) -> Vec<u64> {
        let mut row = vec![0u64; self.edges.len().div_ceil(64)];
        for e in v.iter() {
            let j = self.edges.binary_search(&e).expect("edge of this graph");
            row[j / 64] |= 1 << (j % 64);
        }
        row
    }

    fn edges_of_bits(&self, row: &[u64]) -> EdgeVector {
        (0..self.edges.len()).filter(|j| row[j / 64] >> (j % 64) & 1 == 1).map(|j| self.edges[j]).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Rank over F2 of bit-packed rows.
pub fn f2_rank(rows: Vec<Vec<u64>>) -> usize {
    reduce_rows(rows).len()
}

// Gaussian elimination; returns an independent set spanning the same space.
fn reduce_rows(mut rows: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    let words = rows.first().map_or(0, Vec::len);
    let mut basis = Vec::new();
    for col in 0..words * 64 {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = rows.iter().position(|r| r[w] & b != 0) else { continue };
        let pivot = rows.swap_remove(pivot);
        for r in rows.iter_mut() {
            if r[w] & b != 0 {
                for (x, y) in r.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        basis.push(pivot);
    }
    basis
}

/// A basis of the span of the vertex stars.
pub fn boundary_space(g: &Graph) -> Vec<EdgeVector> {
    let rows = g.vertices.iter().map(|&v| g.to_bits(&g.star(v))).collect();
    let basis: Vec<EdgeVector> = reduce_rows(rows).iter().map(|r| g.edges_of_bits(r)).collect();
    assert_eq!(basis.len() + g.edges.len() + g.components() - g.vertices.len(), g.edges.len());
    basis
}

/// Fundamental cycles of the spanning forest grown from edges in ascending order.
pub fn cycle_space(g: &Graph) -> Vec<EdgeVector> {
    let mut uf = UnionFind::new(g.vertices.len());
    let mut tree: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut chords = Vec::new();
    for &e in &g.edges {
        if uf.union(g.index(e.0), g.index(e.1)) {
            tree.entry(e.0).or_default().push(e.1);
            tree.entry(e.1).or_default().push(e.0);
        } else {
            chords.push(e);
        }
    }
    chords
        .into_iter()
        .map(|e| {
            let mut cycle = tree_path(&tree, e.0, e.1);
            cycle.toggle(e);
            cycle
        })
        .collect()
}

fn tree_path(tree: &BTreeMap<u64, Vec<u64>>, from: u64, to: u64) -> EdgeVector {
    let mut parent: BTreeMap<u64, u64> = BTreeMap::new();
    let mut stack = vec![from];
    parent.insert(from, from);
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &w in tree.get(&v).into_iter().flatten() {
            if let alloc::collections::btree_map::Entry::Vacant(slot) = parent.entry(w) {
                slot.insert(v);
                stack.push(w);
            }
        }
    }
    let mut path = EdgeVector::new();
    let mut v = to;
    while v != from {
        let p = parent[&v];
        path.toggle(Edge::new(p, v));
        v = p;
    }
    path
}

/// Checks that boundaries and cycles annihilate each other and that their
/// ranks add up to the number of edges.
pub fn verify_duality(g: &Graph) -> bool {
    let b = boundary_space(g);
    let c = cycle_space(g);
    let orthogonal = b.iter().all(|x| c.iter().all(|y| !x.dot(y)));
    let c_rank = f2_rank(c.iter().map(|v| g.to_bits(v)).collect());
    let even = c.iter().all(|v| v.odd_vertices().is_empty());
    orthogonal && even && c_rank == c.len() && b.len() + c.len() == g.edges.len()
}

/// Whether `{p, q}` is a residue edge.
pub fn is_residue_edge(p: VPrime, q: VPrime) -> bool {
    arith::legendre(&big(p.get()), q.get()) == Ok(1)
}

/// The complete graph on a set of primes of `V`, split into residue and
/// non-residue edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeGraph {
    vertices: Vec<VPrime>,
    residue: BTreeSet<Edge>,
    nonresidue: BTreeSet<Edge>,
}

impl PrimeGraph {
    pub fn build(primes: &[u64]) -> Result<PrimeGraph> {
        let mut vertices = Vec::with_capacity(primes.len());
        for &p in primes {
            vertices.push(VPrime::new(p)?);
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("build_graph: primes must be distinct"));
        }
        let (mut residue, mut nonresidue) = (BTreeSet::new(), BTreeSet::new());
        for (i, &p) in vertices.iter().enumerate() {
            for &q in &vertices[i + 1..] {
                let e = Edge::new(p.get(), q.get());
                if is_residue_edge(p, q) {
                    residue.insert(e);
                } else {
                    nonresidue.insert(e);
                }
            }
        }
        Ok(PrimeGraph { vertices, residue, nonresidue })
    }

    pub fn vertices(&self) -> &[VPrime] {
        &self.vertices
    }

    pub fn is_residue(&self, e: Edge) -> bool {
        self.residue.contains(&e)
    }

    pub fn is_nonresidue(&self, e: Edge) -> bool {
        self.nonresidue.contains(&e)
    }

    pub fn residue_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.residue.iter().copied()
    }

    pub fn nonresidue_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nonresidue.iter().copied()
    }

    pub fn residue_graph(&self) -> Graph {
        Graph::new(self.vertices.iter().map(|p| p.get()), self.residue.iter().copied()).expect("edges on vertices")
    }

    pub fn nonresidue_graph(&self) -> Graph {
        Graph::new(self.vertices.iter().map(|p| p.get()), self.nonresidue.iter().copied()).expect("edges on vertices")
    }

    /// Odd-degree vertices of the non-residue part of `i`; empty iff `i` is
    /// in `G(Γ_R) ⊕ C(Γ_N)`.
    pub fn membership_obstruction(&self, i: &EdgeVector) -> Vec<u64> {
        for e in i.iter() {
            assert!(self.residue.contains(&e) || self.nonresidue.contains(&e), "edge {e} is not on this graph");
        }
        i.filter(|e| self.nonresidue.contains(&e)).odd_vertices()
    }
}

/// Whether `i` lies in `G(Γ_R) ⊕ C(Γ_N)`.
pub fn invariant_membership(i: &EdgeVector, g: &PrimeGraph) -> bool {
    g.membership_obstruction(i).is_empty()
}

/// A cycle written as a symmetric difference of non-residue triangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// The auxiliary prime shared by all triangles; `None` when the input
    /// already was a triangle.
    pub aux: Option<u64>,
    pub triangles: Vec<EdgeVector>,
}

/// Vertices of a simple cycle in traversal order, starting at the smallest
/// vertex and stepping to its smaller neighbour.
pub fn cycle_order(cycle: &EdgeVector) -> Result<Vec<u64>> {
    let deg = cycle.degrees();
    if deg.len() < 3 || deg.values().any(|&d| d != 2) {
        return Err(Error::domain(format!("{cycle} is not a simple cycle")));
    }
    let start = *deg.keys().next().unwrap();
    let neighbours = |v: u64, prev: Option<u64>| {
        let mut ns: Vec<u64> = cycle.iter().filter(|e| e.touches(v)).map(|e| if e.0 == v { e.1 } else { e.0 }).collect();
        ns.sort_unstable();
        ns.into_iter().find(|&w| Some(w) != prev).unwrap()
    };
    let mut order = vec![start];
    let mut prev = None;
    let mut v = start;
    loop {
        let w = neighbours(v, prev);
        if w == start {
            break;
        }
        order.push(w);
        prev = Some(v);
        v = w;
    }
    if order.len() != deg.len() {
        return Err(Error::domain(format!("{cycle} is not connected")));
    }
    Ok(order)
}

/// Splits a simple non-residue cycle into non-residue triangles through the
/// least suitable auxiliary prime `l ≤ bound`.
pub fn triangle_decompose(cycle: &EdgeVector, bound: u64) -> Result<Decomposition> {
    decompose(cycle, bound, &[], false)
}

/// As [`triangle_decompose`], skipping the auxiliary primes in `avoid` and
/// splitting triangles too, so every call goes through an auxiliary prime.
pub fn triangle_decompose_avoiding(cycle: &EdgeVector, bound: u64, avoid: &[u64]) -> Result<Decomposition> {
    decompose(cycle, bound, avoid, true)
}

fn decompose(cycle: &EdgeVector, bound: u64, avoid: &[u64], split_triangles: bool) -> Result<Decomposition> {
    let order = cycle_order(cycle)?;
    let primes = order.iter().map(|&p| VPrime::new(p)).collect::<Result<Vec<_>>>()?;
    for e in cycle.iter() {
        let (a, b) = e.ends();
        if is_residue_edge(VPrime::new(a)?, VPrime::new(b)?) {
            return Err(Error::domain(format!("edge {e} is a residue edge")));
        }
    }
    if order.len() == 3 && !split_triangles {
        return Ok(Decomposition { aux: None, triangles: vec![cycle.clone()] });
    }
    let aux = arith::primes_in_v(bound)
        .into_iter()
        .find(|l| !order.contains(&l.get()) && !avoid.contains(&l.get()) && primes.iter().all(|&p| !is_residue_edge(p, *l)))
        .ok_or(Error::SearchBoundExceeded { bound })?
        .get();
    let k = order.len();
    let triangles: Vec<EdgeVector> = (0..k).map(|i| EdgeVector::triangle(order[i], order[(i + 1) % k], aux)).collect();
    let total = triangles.iter().fold(EdgeVector::new(), |acc, t| &acc ^ t);
    assert_eq!(&total, cycle, "triangles must sum to the cycle");
    Ok(Decomposition { aux: Some(aux), triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edges(pairs: &[(u64, u64)]) -> EdgeVector {
        pairs.iter().map(|&(a, b)| Edge::new(a, b)).collect()
    }

    fn graph(n: u64, pairs: &[(u64, u64)]) -> Graph {
        Graph::new(0..n, pairs.iter().map(|&(a, b)| Edge::new(a, b))).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = PrimeGraph::build(&[2, 5, 13]).unwrap();
        assert_eq!(g.nonresidue_edges().count(), 3);
        assert!(PrimeGraph::build(&[5, 29]).unwrap().is_residue(Edge::new(5, 29)));
        assert!(PrimeGraph::build(&[2, 17]).unwrap().is_residue(Edge::new(2, 17)));
        assert!(PrimeGraph::build(&[5, 7]).is_err());
        assert!(PrimeGraph::build(&[5, 5]).is_err());
    }

    #[test]
    fn space_ranks() {
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(boundary_space(&tri).len(), 2);
        assert_eq!(cycle_space(&tri), vec![edges(&[(0, 1), (1, 2), (0, 2)])]);
        assert_eq!(boundary_space(&graph(2, &[(0, 1)])).len(), 1);
        assert_eq!(boundary_space(&graph(4, &[])).len(), 0);
        assert!(cycle_space(&graph(4, &[(0, 1), (1, 2), (1, 3)])).is_empty());
        assert_eq!(cycle_space(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])).len(), 1);
        let disjoint = graph(6, &[(0, 1), (2, 3), (4, 5)]);
        assert!(verify_duality(&disjoint));
        assert_eq!(boundary_space(&disjoint).len(), 3);
        assert!(verify_duality(&tri));
    }

    #[test]
    fn membership_examples() {
        let g = PrimeGraph::build(&[2, 5, 13, 29]).unwrap();
        assert!(invariant_membership(&edges(&[(5, 29)]), &g));
        assert!(!invariant_membership(&edges(&[(2, 5)]), &g));
        assert_eq!(g.membership_obstruction(&edges(&[(2, 5)])), vec![2, 5]);
        assert!(invariant_membership(&EdgeVector::triangle(2, 5, 13), &g));
    }

    #[test]
    fn decompose_examples() {
        let tri = EdgeVector::triangle(2, 5, 13);
        assert_eq!(triangle_decompose(&tri, 100).unwrap().triangles, vec![tri.clone()]);
        let split = triangle_decompose_avoiding(&tri, 100, &[]).unwrap();
        assert!(split.aux.is_some());
        assert_eq!(split.triangles.len(), 3);
        assert_eq!(split.triangles.iter().fold(EdgeVector::new(), |acc, t| &acc ^ t), tri);

        let g = PrimeGraph::build(&arith::primes_in_v(200).iter().map(|p| p.get()).collect::<Vec<_>>()).unwrap();
        let cycle = find_nonresidue_cycle(&g, 4).expect("a 4-cycle exists below 200");
        let a = triangle_decompose(&cycle, 1000).unwrap();
        let b = triangle_decompose_avoiding(&cycle, 1000, &[a.aux.unwrap()]).unwrap();
        assert_ne!(a.aux, b.aux);
        for d in [&a, &b] {
            assert_eq!(d.triangles.len(), 4);
            for t in &d.triangles {
                assert!(t.iter().all(|e| !is_residue_edge(VPrime::new(e.0).unwrap(), VPrime::new(e.1).unwrap())));
            }
        }
        assert!(matches!(triangle_decompose(&cycle, 5), Err(Error::SearchBoundExceeded { bound: 5 })));
        assert!(triangle_decompose(&edges(&[(5, 29), (29, 41), (5, 41)]), 100).is_err());
    }

    fn find_nonresidue_cycle(g: &PrimeGraph, k: usize) -> Option<EdgeVector> {
        let vs: Vec<u64> = g.vertices().iter().map(|p| p.get()).collect();
        let n = |a: u64, b: u64| g.is_nonresidue(Edge::new(a, b));
        for &a in &vs {
            for &b in &vs {
                for &c in &vs {
                    for &d in &vs {
                        let distinct = BTreeSet::from([a, b, c, d]).len() == 4;
                        if k == 4 && distinct && n(a, b) && n(b, c) && n(c, d) && n(d, a) {
                            return Some(edges(&[(a, b), (b, c), (c, d), (d, a)]));
                        }
                    }
                }
            }
        }
        None
    }

    #[test]
    fn cycle_order_rejects_non_cycles() {
        assert!(cycle_order(&edges(&[(1, 2), (2, 3)])).is_err());
        assert!(cycle_order(&(&EdgeVector::triangle(1, 2, 3) ^ &EdgeVector::triangle(4, 5, 6))).is_err());
        assert_eq!(cycle_order(&edges(&[(1, 3), (3, 2), (2, 4), (4, 1)])).unwrap(), vec![1, 3, 2, 4]);
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (1u64..=10).prop_flat_map(|n| {
            let pairs: Vec<(u64, u64)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let len = pairs.len();
            proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
                let chosen = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&(a, b), _)| Edge::new(a, b));
                Graph::new(0..n, chosen).unwrap()
            })
        })
    }

    fn member_strategy() -> impl Strategy<Value = EdgeVector> {
        let primes: Vec<u64> = arith::primes_in_v(60).iter().map(|p| p.get()).collect();
        let g = PrimeGraph::build(&primes).unwrap();
        let all: Vec<Edge> = g.residue_edges().chain(g.nonresidue_edges()).collect();
        proptest::collection::vec(any::<bool>(), all.len()).prop_map(move |keep| {
            let raw: EdgeVector = all.iter().zip(keep).filter(|(_, k)| *k).map(|(&e, _)| e).collect();
            // Keep residue edges and the even part of the non-residue edges.
            let n_part = raw.filter(|e| g.is_nonresidue(e));
            let cycles = cycle_space(&Graph::new(n_part.vertices(), n_part.iter()).unwrap());
            let mut out = raw.filter(|e| g.is_residue(e));
            for c in cycles.iter().step_by(2) {
                out ^= c;
            }
            out
        })
    }

    proptest! {
        #[test]
        fn duality_holds(g in random_graph()) {
            prop_assert!(verify_duality(&g));
            prop_assert_eq!(cycle_space(&g).len(), g.edges().len() + g.components() - g.vertices().len());
        }

        #[test]
        fn membership_is_a_subgroup(i in member_strategy(), j in member_strategy()) {
            let primes: Vec<u64> = arith::primes_in_v(60).iter().map(|p| p.get()).collect();
            let g = PrimeGraph::build(&primes).unwrap();
            prop_assert!(invariant_membership(&i, &g));
            prop_assert!(invariant_membership(&j, &g));
            prop_assert!(invariant_membership(&(&i ^ &j), &g));
        }
    }
}
