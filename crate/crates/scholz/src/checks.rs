//! Verification sweeps. Each check enumerates the instances meeting its
//! hypotheses up to a bound and compares a prediction with an independent
//! computation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use scholz_core::apps::{self, UnitFamily};
use scholz_core::arith::{is_squarefree, prime_divisors, primes_in_v, Sign, VPrime};
use scholz_core::f2graph::{
    boundary_space, cycle_space, is_residue_edge, triangle_decompose, triangle_decompose_avoiding, verify_duality, Edge,
    EdgeVector, Graph,
};
use scholz_core::invariants::{general_formula, scholz2_predict, scholz_predict, triangle_invariant};
use scholz_core::mquad::{SquareConfig, SquareVerdict};
use scholz_core::pell::{check_unit_congruences_with, Root, UnitSource};

use crate::records::{Record, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Scholz,
    Scholz2,
    Duality,
    Triangles,
    ThmSq,
    PosNorm,
    Candm,
    Candp,
    NormSign,
    Kuroda,
    LemmaE,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Scholz,
        Check::Scholz2,
        Check::Duality,
        Check::Triangles,
        Check::ThmSq,
        Check::PosNorm,
        Check::Candm,
        Check::Candp,
        Check::NormSign,
        Check::Kuroda,
        Check::LemmaE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Scholz => "scholz",
            Check::Scholz2 => "scholz2",
            Check::Duality => "duality",
            Check::Triangles => "triangles",
            Check::ThmSq => "thm-sq",
            Check::PosNorm => "pos-norm",
            Check::Candm => "candm",
            Check::Candp => "candp",
            Check::NormSign => "norm-sign",
            Check::Kuroda => "kuroda",
            Check::LemmaE => "lemma-e",
        }
    }

    /// The bound used when none is given. For `duality` it is the largest
    /// vertex count, for `triangles` the number of primes of `V`.
    pub fn default_bound(self) -> u64 {
        match self {
            Check::Scholz => 300,
            Check::Scholz2 => 100,
            Check::Duality => 10,
            Check::Triangles => 10,
            Check::ThmSq => 100,
            Check::PosNorm => 500,
            Check::Candm => 60,
            Check::Candp => 600,
            Check::NormSign => 5000,
            Check::Kuroda => 60,
            Check::LemmaE => 1000,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
            format!("unknown check {s:?} (known: {})", names.join(", "))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    /// Overrides every check's [`Check::default_bound`].
    pub bound: Option<u64>,
    /// Random graphs drawn by `duality`.
    pub samples: usize,
    pub square: SquareConfig,
    pub jobs: usize,
    pub seed: u64,
    /// Auxiliary primes for triangle decompositions are searched up to this.
    pub aux_bound: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { bound: None, samples: 200, square: SquareConfig::default(), jobs: 1, seed: 0, aux_bound: 100_000 }
    }
}

impl SweepConfig {
    pub fn bound_for(&self, check: Check) -> u64 {
        self.bound.unwrap_or(check.default_bound())
    }
}

type Outcome = scholz_core::Result<(String, bool)>;

fn record(check: Check, instance: String, predicted: String, outcome: Outcome) -> Record {
    let (oracle, verdict) = match outcome {
        Ok((oracle, true)) => (oracle, Verdict::Pass),
        Ok((oracle, false)) => (oracle, Verdict::Fail),
        Err(scholz_core::Error::Undecided { precision }) => (format!("undecided at {precision} bits"), Verdict::Undecided),
        Err(e) => (format!("error: {e}"), Verdict::Fail),
    };
    Record { check: check.name().to_string(), instance, predicted, oracle, verdict }
}

fn parallel<I: Sync, F: Fn(&I) -> Record + Sync + Send>(jobs: usize, items: &[I], f: F) -> Vec<Record> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

fn v_primes(bound: u64) -> Vec<u64> {
    primes_in_v(bound).into_iter().map(VPrime::get).collect()
}

fn vp(p: u64) -> VPrime {
    VPrime::new(p).expect("enumerated from V")
}

fn residue(p: u64, q: u64) -> bool {
    is_residue_edge(vp(p), vp(q))
}

fn set(xs: &[u64]) -> String {
    let parts: Vec<String> = xs.iter().map(u64::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Runs one check with the configured bound.
pub fn run<U: UnitSource + Sync>(check: Check, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let bound = cfg.bound_for(check);
    match check {
        Check::Scholz => scholz(bound, cfg, units),
        Check::Scholz2 => scholz2(bound, cfg, units),
        Check::Duality => duality(bound, cfg),
        Check::Triangles => triangles(bound, cfg),
        Check::ThmSq => thm_sq(bound, cfg, units),
        Check::PosNorm => pos_norm(bound, cfg, units),
        Check::Candm => candm(bound, cfg, units),
        Check::Candp => candp(bound, cfg, units),
        Check::NormSign => norm_sign(bound, cfg, units),
        Check::Kuroda => kuroda(bound, cfg, units),
        Check::LemmaE => lemma_e(bound, cfg, units),
    }
}

// Both square roots of m mod p must give the same unit symbol.
fn unit_symbol_both_roots<U: UnitSource>(units: &U, m: u64, p: u64) -> scholz_core::Result<(Sign, Sign)> {
    let u = units.unit(m)?;
    Ok((u.residue_symbol(vp(p), Root::Canonical)?, u.residue_symbol(vp(p), Root::Other)?))
}

fn root_outcome(predicted: scholz_core::Result<Sign>, oracle: scholz_core::Result<(Sign, Sign)>) -> Outcome {
    let predicted = predicted?;
    let (a, b) = oracle?;
    if a == b {
        Ok((a.to_string(), a == predicted))
    } else {
        Ok((format!("{a} (other root {b})"), false))
    }
}

/// Pairs `(ε_p/q)` for residue pairs `p, q ≤ bound` in both orientations.
pub fn scholz<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let ps = v_primes(bound);
    let mut items = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        for &q in &ps[i + 1..] {
            if residue(p, q) {
                items.push((p, q));
                items.push((q, p));
            }
        }
    }
    parallel(cfg.jobs, &items, |&(p, q)| {
        let predicted = scholz_predict(p, q);
        let shown = predicted.as_ref().map(Sign::to_string).unwrap_or_default();
        record(Check::Scholz, format!("ε_{p} mod {q}"), shown, root_outcome(predicted, unit_symbol_both_roots(units, p, q)))
    })
}

fn nonresidue_triples(ps: &[u64]) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        for (j, &q) in ps.iter().enumerate().skip(i + 1) {
            if residue(p, q) {
                continue;
            }
            for &r in &ps[j + 1..] {
                if !residue(q, r) && !residue(r, p) {
                    out.push((p, q, r));
                }
            }
        }
    }
    out
}

/// `(ε_{pq}/r)` for pairwise non-residue triples, each prime taking the role of `r`.
pub fn scholz2<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let items: Vec<(u64, u64, u64)> = nonresidue_triples(&v_primes(bound))
        .into_iter()
        .flat_map(|(a, b, c)| [(a, b, c), (a, c, b), (b, c, a)])
        .collect();
    parallel(cfg.jobs, &items, |&(p, q, r)| {
        let predicted = scholz2_predict(p, q, r);
        let shown = predicted.as_ref().map(Sign::to_string).unwrap_or_default();
        let oracle = unit_symbol_both_roots(units, p * q, r);
        record(Check::Scholz2, format!("ε_{} mod {r}", p * q), shown, root_outcome(predicted, oracle))
    })
}

/// Random graphs with at most `bound` vertices and arbitrary edge subsets.
pub fn random_graphs(bound: u64, samples: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let n = rng.gen_range(1..=bound.max(1));
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push(Edge::new(a, b));
                    }
                }
            }
            Graph::new(0..n, edges).expect("edges on vertices")
        })
        .collect()
}

pub fn duality(bound: u64, cfg: &SweepConfig) -> Vec<Record> {
    let graphs: Vec<(usize, Graph)> = random_graphs(bound, cfg.samples, cfg.seed).into_iter().enumerate().collect();
    parallel(cfg.jobs, &graphs, |(i, g)| {
        let edges: Vec<String> = g.edges().iter().map(Edge::to_string).collect();
        let instance = format!("#{i} n={} edges={}", g.vertices().len(), edges.join(","));
        let (b, c) = (boundary_space(g).len(), cycle_space(g).len());
        let oracle = format!("{b}+{c}={}", g.edges().len());
        record(Check::Duality, instance, "annihilators".into(), Ok((oracle, verify_duality(g) && b + c == g.edges().len())))
    })
}

/// Simple cycles of length `3..=max_len` in the non-residue graph on `ps`,
/// each listed once, starting at its smallest vertex.
pub fn nonresidue_cycles(ps: &[u64], max_len: usize) -> Vec<Vec<u64>> {
    fn extend(ps: &[u64], path: &mut Vec<usize>, max_len: usize, out: &mut Vec<Vec<u64>>) {
        let start = path[0];
        let last = *path.last().unwrap();
        for w in start + 1..ps.len() {
            if path.contains(&w) || residue(ps[last], ps[w]) {
                continue;
            }
            path.push(w);
            let closes = path.len() >= 3 && !residue(ps[w], ps[start]) && path[1] < w;
            if closes {
                out.push(path.iter().map(|&i| ps[i]).collect());
            }
            if path.len() < max_len {
                extend(ps, path, max_len, out);
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    for s in 0..ps.len() {
        extend(ps, &mut vec![s], max_len, &mut out);
    }
    out
}

fn cycle_edges(order: &[u64]) -> EdgeVector {
    (0..order.len()).map(|i| Edge::new(order[i], order[(i + 1) % order.len()])).collect()
}

fn triangle_sum(triangles: &[EdgeVector]) -> scholz_core::Result<u8> {
    let mut sum = 0;
    for t in triangles {
        let v = t.vertices();
        sum ^= triangle_invariant(v[0], v[1], v[2])?;
    }
    Ok(sum)
}

/// Decomposes every short non-residue cycle on the first `count` primes of `V`
/// through two different auxiliary primes.
pub fn triangles(count: u64, cfg: &SweepConfig) -> Vec<Record> {
    let mut ps = Vec::new();
    let mut limit = 16;
    while (ps.len() as u64) < count {
        ps = v_primes(limit);
        limit *= 2;
    }
    ps.truncate(count as usize);
    let cycles = nonresidue_cycles(&ps, 6);
    parallel(cfg.jobs, &cycles, |order| {
        let cycle = cycle_edges(order);
        let instance = order.iter().map(u64::to_string).collect::<Vec<_>>().join("-");
        let direct = general_formula(&cycle);
        let shown = direct.as_ref().map(u8::to_string).unwrap_or_default();
        let outcome = (|| {
            let direct = direct?;
            let first = triangle_decompose(&cycle, cfg.aux_bound)?;
            let avoid: Vec<u64> = first.aux.into_iter().collect();
            let second = triangle_decompose_avoiding(&cycle, cfg.aux_bound, &avoid)?;
            let mut ok = true;
            let mut parts = Vec::new();
            for d in [&first, &second] {
                let in_gamma_n = d.triangles.iter().all(|t| t.iter().all(|e| {
                    let (a, b) = e.ends();
                    !residue(a, b)
                }));
                let total = d.triangles.iter().fold(EdgeVector::new(), |acc, t| &acc ^ t);
                let sum = triangle_sum(&d.triangles)?;
                ok &= in_gamma_n && total == cycle && sum == direct;
                let aux = d.aux.map_or("none".to_string(), |l| l.to_string());
                parts.push(format!("aux {aux}: {} triangles, sum {sum}", d.triangles.len()));
            }
            Ok((parts.join("; "), ok))
        })();
        record(Check::Triangles, instance, shown, outcome)
    })
}

fn squarefree_range(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&m| is_squarefree(m))
}

fn norm_of<U: UnitSource>(units: &U, m: u64) -> Option<Sign> {
    units.unit(m).ok().map(|u| u.norm)
}

fn square_outcome(v: scholz_core::Result<SquareVerdict>) -> Outcome {
    Ok(match v? {
        SquareVerdict::Square(y) => (format!("square, root {y}"), true),
        SquareVerdict::NotSquare(o) => (format!("not square ({o:?})"), false),
    })
}

/// Families `{m₁, m₂, m₁m₂}` with coprime `m₁ < m₂ ≤ bound`, all of norm −1.
pub fn thm_sq<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let negative: Vec<u64> = squarefree_range(2, bound).filter(|&m| norm_of(units, m) == Some(Sign::Minus)).collect();
    let mut items = Vec::new();
    for (i, &a) in negative.iter().enumerate() {
        for &b in &negative[i + 1..] {
            if num_integer::gcd(a, b) == 1 && norm_of(units, a * b) == Some(Sign::Minus) {
                items.push([a, b, a * b]);
            }
        }
    }
    parallel(cfg.jobs, &items, |ms| {
        let outcome = UnitFamily::new(ms, units).and_then(|f| apps::theorem_sq_check(&f, units, &cfg.square));
        record(Check::ThmSq, format!("ε_{}·ε_{}·ε_{}", ms[0], ms[1], ms[2]), "square".into(), square_outcome(outcome))
    })
}

pub fn pos_norm<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let items: Vec<u64> = squarefree_range(3, bound).filter(|&m| norm_of(units, m) == Some(Sign::Plus)).collect();
    parallel(cfg.jobs, &items, |&m| {
        let field = apps::positive_norm_field(m).iter().map(|d| format!("√{d}")).collect::<Vec<_>>().join(",");
        let outcome = apps::positive_norm_square_check(m, units, &cfg.square);
        record(Check::PosNorm, format!("ε_{m} in Q({field})"), "square".into(), square_outcome(outcome))
    })
}

pub fn lemma_e<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let items: Vec<u64> =
        squarefree_range(3, bound).filter(|m| m % 2 == 1).filter(|&m| norm_of(units, m) == Some(Sign::Minus)).collect();
    parallel(cfg.jobs, &items, |&m| {
        let outcome = check_unit_congruences_with(units, m).map(|c| {
            let flags = format!(
                "x even {}, x≡0 (4) iff m≡1 (8) {}, y≡1 (4) {}, divisors ≡1 (4) {}",
                c.x_even, c.x_mod4_matches, c.y_one_mod4, c.divisors_one_mod4
            );
            (flags, c.all_pass())
        });
        record(Check::LemmaE, format!("ε_{m}³"), "all hold".into(), outcome)
    })
}

/// For pairwise non-residue `p < q < r ≤ bound`: `ε_{pq}ε_{qr}ε_{rp}` is a
/// square in `Q(√pq, √pr)` iff the triangle product is −1, and the parity
/// statement with `P = {p, q, r}` holds for every valid `d`.
pub fn candm<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let items = nonresidue_triples(&v_primes(bound));
    parallel(cfg.jobs, &items, |&(p, q, r)| {
        let example = apps::candm_example_check(p, q, r, units, &cfg.square);
        let shown = match &example {
            Ok(a) if a.predicted => "square",
            Ok(_) => "not square",
            Err(_) => "",
        };
        let outcome = example.and_then(|a| {
            let cand = apps::candm_check(&[(p, q), (q, r), (r, p)], &[p, q, r], units, &cfg.square)?;
            let observed = if a.observed { "square" } else { "not square" };
            let oracle = format!("{observed}, d ∈ {}", set(&cand.classes));
            Ok((oracle, a.agrees() && cand.consistent))
        });
        record(Check::Candm, format!("ε_{}·ε_{}·ε_{}", p * q, q * r, r * p), shown.into(), outcome)
    })
}

/// Coprime `(m, n)` with `mn ≤ bound`, primes of `m` all `≡ 1 (mod 4)` and
/// `Nε_{mn} = +1`.
pub fn candp_instances<U: UnitSource>(bound: u64, units: &U) -> Vec<(u64, u64)> {
    let mut items = Vec::new();
    for mn in squarefree_range(2, bound) {
        if norm_of(units, mn) != Some(Sign::Plus) {
            continue;
        }
        let primes = prime_divisors(mn);
        for mask in 0..1u32 << primes.len() {
            let m: u64 = primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).product();
            if prime_divisors(m).iter().all(|p| p % 4 == 1) {
                items.push((m, mn / m));
            }
        }
    }
    items
}

pub fn candp<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let items = candp_instances(bound, units);
    parallel(cfg.jobs, &items, |&(m, n)| {
        let outcome = apps::candp_check(m, n, units, &cfg.square)
            .map(|c| (format!("d ∈ {}, P = {}", set(&c.classes), set(&c.p_set)), c.consistent));
        record(Check::Candp, format!("m={m} n={n}"), "|D∩P| even".into(), outcome)
    })
}

/// Coprime splits `mn ≤ bound` over primes of `V` where the quartic
/// criterion predicts `Nε_{mn} = +1`.
pub fn norm_sign<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let mut items = Vec::new();
    for mn in squarefree_range(2, bound) {
        let primes = prime_divisors(mn);
        if primes.iter().any(|p| p % 4 == 3) {
            continue;
        }
        // Splits with the smallest prime in m, so each unordered pair appears once.
        for mask in (1..1u32 << primes.len()).filter(|mask| mask & 1 == 1) {
            let m: u64 = primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).product();
            if m == mn {
                continue;
            }
            if let Ok(Some(_)) = apps::norm_sign_predict(m, mn / m) {
                items.push((m, mn / m));
            }
        }
    }
    parallel(cfg.jobs, &items, |&(m, n)| {
        let outcome = units.unit(m * n).map(|u| (u.norm.to_string(), u.norm == Sign::Plus));
        record(Check::NormSign, format!("m={m} n={n}"), "+1".into(), outcome)
    })
}

/// Ordered triples `(p, q, r)` of `V` with `(p/q) = 1`, `(q/r) = −1`.
pub fn kuroda<U: UnitSource + Sync>(bound: u64, cfg: &SweepConfig, units: &U) -> Vec<Record> {
    let ps = v_primes(bound);
    let mut items = Vec::new();
    for &p in &ps {
        for &q in &ps {
            for &r in &ps {
                if p != q && q != r && r != p && residue(p, q) && !residue(q, r) {
                    items.push((p, q, r));
                }
            }
        }
    }
    parallel(cfg.jobs, &items, |&(p, q, r)| {
        let outcome = apps::kuroda_example_check(p, q, r, units, &cfg.square).and_then(|a| {
            let q_index = apps::kuroda_q([p, q * r, p * q * r], units, &cfg.square)?;
            let w: Vec<String> = q_index.witnesses.iter().map(|e| format!("{e:03b}")).collect();
            let oracle = format!("Q = {}, witnesses {{{}}}", a.observed, w.join(","));
            Ok((a, oracle, q_index.subgroup))
        });
        let shown = outcome.as_ref().map(|(a, _, _)| a.predicted.to_string()).unwrap_or_default();
        let outcome = outcome.map(|(a, oracle, subgroup)| (oracle, a.agrees() && subgroup));
        record(Check::Kuroda, format!("F = Q(√{p}, √{})", q * r), shown, outcome)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use scholz_core::pell::Direct;

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>(), Ok(c));
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn cycles_are_listed_once() {
        let cycles = nonresidue_cycles(&[2, 5, 13], 6);
        assert_eq!(cycles, vec![vec![2, 5, 13]]);
        let ps = v_primes(60);
        let cycles = nonresidue_cycles(&ps, 4);
        let mut keys: Vec<EdgeVector> = cycles.iter().map(|c| cycle_edges(c)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), cycles.len());
        assert!(cycles.iter().any(|c| c.len() == 4));
    }

    #[test]
    fn small_sweeps_pass() {
        let cfg = SweepConfig::default();
        for (check, bound) in [(Check::Scholz, 60), (Check::Scholz2, 30), (Check::Candp, 60), (Check::Kuroda, 20)] {
            let records = run(check, &SweepConfig { bound: Some(bound), ..cfg.clone() }, &Direct);
            assert!(!records.is_empty(), "{check}");
            assert!(records.iter().all(|r| r.verdict == Verdict::Pass), "{check}: {records:?}");
        }
    }
}
