//! Line format for prime graphs: one edge per line, `p q R` or `p q N`.
//!
//! Blank lines and lines starting with `#` are ignored. Isolated vertices
//! are written as a single prime on its own line.

use scholz_core::f2graph::{Edge, PrimeGraph};

use crate::Error;

pub fn write_graph(g: &PrimeGraph) -> String {
    let mut edges: Vec<(Edge, char)> =
        g.residue_edges().map(|e| (e, 'R')).chain(g.nonresidue_edges().map(|e| (e, 'N'))).collect();
    edges.sort_unstable();
    let mut out = String::new();
    if edges.is_empty() {
        for p in g.vertices() {
            out.push_str(&format!("{p}\n"));
        }
    }
    for (e, kind) in edges {
        let (p, q) = e.ends();
        out.push_str(&format!("{p} {q} {kind}\n"));
    }
    out
}

/// Parses the line format and checks every label against the Legendre symbol.
pub fn parse_graph(text: &str) -> Result<PrimeGraph, Error> {
    let mut vertices = Vec::new();
    let mut labelled = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| err(format!("not a prime: {s:?}")));
        match fields[..] {
            [p] => vertices.push(num(p)?),
            [p, q, kind] => {
                let (p, q) = (num(p)?, num(q)?);
                if p == q {
                    return Err(err(format!("loop at {p}")));
                }
                let residue = match kind {
                    "R" => true,
                    "N" => false,
                    _ => return Err(err(format!("edge kind must be R or N, found {kind:?}"))),
                };
                vertices.extend([p, q]);
                labelled.push((i + 1, Edge::new(p, q), residue));
            }
            _ => return Err(err(format!("expected `p q R|N`, found {line:?}"))),
        }
    }
    vertices.sort_unstable();
    vertices.dedup();
    let g = PrimeGraph::build(&vertices)?;
    for (line, e, residue) in labelled {
        if g.is_residue(e) != residue {
            let actual = if g.is_residue(e) { 'R' } else { 'N' };
            return Err(Error::Parse { line, msg: format!("edge {e} is {actual}") });
        }
    }
    Ok(g)
}
