//! Exact arithmetic in multiquadratic fields `Q(√d₁,…,√d_t)`.
//!
//! Elements are stored on the basis `√r_S`, where `S` ranges over subsets of
//! the generators (bit masks) and `r_S` is the squarefree kernel of
//! `∏_{i∈S} dᵢ`. The embedding indexed by a mask `s` sends `√dᵢ ↦ -√dᵢ` for
//! every bit `i` set in `s`, so it acts on `√r_S` by `(-1)^{|s∩S|}`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, big, bigu, Sign};
use crate::error::{Error, Result};
use crate::pell::QuadUnit;

/// Largest number of generators a field may have.
pub const MAX_GENS: usize = 8;
/// Largest number of generators the square-root search accepts.
pub const MAX_SQUARE_GENS: usize = 4;

/// A multiquadratic field given by multiplicatively independent squarefree generators.
#[derive(Debug, PartialEq, Eq)]
pub struct MQField {
    gens: Vec<u64>,
    radicands: Vec<BigUint>,
    // ∏_{i∈S} dᵢ = cofactors[S]² · radicands[S]
    cofactors: Vec<BigUint>,
}

impl MQField {
    pub fn new(gens: &[u64]) -> Result<Arc<MQField>> {
        if gens.len() > MAX_GENS {
            return Err(Error::domain(format!("field with {} generators exceeds {MAX_GENS}", gens.len())));
        }
        for &d in gens {
            if d <= 1 || !arith::is_squarefree(d) {
                return Err(Error::domain(format!("generator {d} is not a squarefree integer > 1")));
            }
        }
        if f2_rank_of_radicands(gens) != gens.len() {
            return Err(Error::domain(format!("generators {gens:?} are dependent modulo squares")));
        }
        let n = 1usize << gens.len();
        let mut radicands = vec![BigUint::one(); n];
        let mut cofactors = vec![BigUint::one(); n];
        for s in 1..n {
            let i = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            let d = BigUint::from(gens[i]);
            let g = radicands[rest].gcd(&d);
            radicands[s] = &radicands[rest] * &d / (&g * &g);
            cofactors[s] = &cofactors[rest] * g;
        }
        Ok(Arc::new(MQField { gens: gens.to_vec(), radicands, cofactors }))
    }

    pub fn gens(&self) -> &[u64] {
        &self.gens
    }

    /// Number of generators `t`; the degree is `2^t`.
    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn degree(&self) -> usize {
        1 << self.gens.len()
    }

    pub fn radicand(&self, s: u32) -> &BigUint {
        &self.radicands[s as usize]
    }

    /// Mask `S` with `r_S = n`, if `√n` is a basis element.
    pub fn basis_index(&self, n: &BigUint) -> Option<u32> {
        self.radicands.iter().position(|r| r == n).map(|s| s as u32)
    }

    fn basis_mul(&self, s: u32, t: u32) -> (u32, BigUint) {
        let g = self.radicands[s as usize].gcd(&self.radicands[t as usize]);
        (s ^ t, g)
    }
}

impl fmt::Display for MQField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Q(")?;
        for (i, d) in self.gens.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "√{d}")?;
        }
        f.write_str(")")
    }
}

fn f2_rank_of_radicands(gens: &[u64]) -> usize {
    let mut primes: Vec<u64> = gens.iter().flat_map(|&d| arith::prime_divisors(d)).collect();
    primes.sort_unstable();
    primes.dedup();
    let rows: Vec<Vec<u64>> = gens
        .iter()
        .map(|&d| {
            let mut row = vec![0u64; primes.len().div_ceil(64)];
            for p in arith::prime_divisors(d) {
                let j = primes.binary_search(&p).unwrap();
                row[j / 64] |= 1 << (j % 64);
            }
            row
        })
        .collect();
    crate::f2graph::f2_rank(rows)
}

/// An exact element of a multiquadratic field, in canonical form (no zero coefficients).
#[derive(Clone, Debug)]
pub struct MQElement {
    field: Arc<MQField>,
    coeffs: BTreeMap<u32, BigRational>,
}

impl PartialEq for MQElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl Eq for MQElement {}

impl MQElement {
    pub fn zero(field: &Arc<MQField>) -> Self {
        MQElement { field: field.clone(), coeffs: BTreeMap::new() }
    }

    pub fn from_rational(field: &Arc<MQField>, q: BigRational) -> Self {
        Self::from_coeffs(field, [(0, q)])
    }

    pub fn from_integer(field: &Arc<MQField>, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(n.into()))
    }

    /// Builds an element from `(mask, coefficient)` pairs; repeated masks add up.
    pub fn from_coeffs(field: &Arc<MQField>, coeffs: impl IntoIterator<Item = (u32, BigRational)>) -> Self {
        let mut out = Self::zero(field);
        for (s, c) in coeffs {
            assert!((s as usize) < field.degree(), "basis mask {s} out of range");
            out.add_term(s, c);
        }
        out
    }

    /// `√n` for a positive integer `n` whose squarefree kernel is a basis radicand.
    pub fn sqrt_of(field: &Arc<MQField>, n: u64) -> Result<Self> {
        if n == 0 {
            return Ok(Self::zero(field));
        }
        let n = BigUint::from(n);
        let kernel = arith::squarefree_kernel(&n);
        let s = field
            .basis_index(&kernel)
            .ok_or_else(|| Error::domain(format!("√{n} does not lie in {field}")))?;
        let c = (&n / &kernel).sqrt();
        Ok(Self::from_coeffs(field, [(s, BigRational::from_integer(bigu(&c)))]))
    }

    /// Embeds a quadratic unit `(x + y√m)/den` of a subfield `Q(√m)`.
    pub fn from_unit(field: &Arc<MQField>, unit: &QuadUnit) -> Result<Self> {
        let root = Self::sqrt_of(field, unit.m)?;
        let den = BigInt::from(unit.den);
        let x = Self::from_rational(field, BigRational::new(bigu(&unit.x), den.clone()));
        let y = root.scale(&BigRational::new(bigu(&unit.y), den));
        x.checked_add(&y)
    }

    pub fn field(&self) -> &Arc<MQField> {
        &self.field
    }

    pub fn coeff(&self, s: u32) -> BigRational {
        self.coeffs.get(&s).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().map(|(s, c)| (*s, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.keys().all(|&s| s == 0)
    }

    fn add_term(&mut self, s: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(s).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let mut out = self.clone();
        for (&s, c) in &other.coeffs {
            out.add_term(s, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    /// Product, resolving `√r_S·√r_T = gcd(r_S, r_T)·√r_{S△T}`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let mut out = Self::zero(&self.field);
        for (&s, a) in &self.coeffs {
            for (&t, b) in &other.coeffs {
                let (u, g) = self.field.basis_mul(s, t);
                out.add_term(u, a * b * BigRational::from_integer(bigu(&g)));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Self::zero(&self.field);
        for (&s, c) in &self.coeffs {
            out.add_term(s, c * q);
        }
        out
    }

    pub fn square(&self) -> Self {
        self.checked_mul(self).expect("same field")
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::from_integer(&self.field, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base).expect("same field");
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// Image under the automorphism flipping the generators in `mask`.
    pub fn conjugate(&self, mask: u32) -> Self {
        let mut out = self.clone();
        for (s, c) in out.coeffs.iter_mut() {
            if (s & mask).count_ones() % 2 == 1 {
                *c = -c.clone();
            }
        }
        out
    }

    /// Absolute norm: the product of all conjugates.
    pub fn norm(&self) -> BigRational {
        let mut acc = Self::from_integer(&self.field, 1);
        for mask in 0..self.field.degree() as u32 {
            acc = acc.checked_mul(&self.conjugate(mask)).expect("same field");
        }
        assert!(acc.is_rational(), "norm must be rational");
        acc.coeff(0)
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Dense integer coordinates of `k·self`; `k` must clear all denominators.
    fn integer_coords(&self, k: &BigInt) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.field.degree()];
        for (&s, c) in &self.coeffs {
            let v = c * BigRational::from_integer(k.clone());
            assert!(v.is_integer());
            out[s as usize] = v.to_integer();
        }
        out
    }

    /// Certified enclosure of the real embedding `√dᵢ ↦ signsᵢ·√dᵢ`.
    ///
    /// The interval has `precision` fractional bits and width at most
    /// `(Σ|coeff| + 2)·2^-precision`.
    pub fn embed(&self, signs: &[Sign], precision: u32) -> Interval {
        assert_eq!(signs.len(), self.field.rank(), "one sign per generator");
        assert!(precision >= 64, "embedding precision must be at least 64 bits");
        let mask = signs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Sign::Minus)
            .fold(0u32, |m, (i, _)| m | (1 << i));
        self.embed_mask(mask, precision)
    }

    pub fn embed_mask(&self, mask: u32, precision: u32) -> Interval {
        let den = self.denominator();
        let coords = self.integer_coords(&den);
        let roots = RadicandRoots::new(&self.field, precision);
        let scaled = roots.embed(&coords, mask);
        Interval {
            lo: scaled.lo.div_floor(&den),
            hi: div_ceil(&scaled.hi, &den),
            bits: precision,
        }
    }

    /// Decides whether `self` is a square in its field.
    pub fn is_square(&self, cfg: &SquareConfig) -> Result<Option<MQElement>> {
        Ok(match self.square_root(cfg)? {
            SquareVerdict::Square(y) => Some(y),
            SquareVerdict::NotSquare(_) => None,
        })
    }

    /// Square root with a certificate for the negative case.
    ///
    /// 1. A certifiably negative real embedding rules out a square.
    /// 2. At completely split primes `l` where `self` is an `l`-unit, a
    ///    non-residue image rules out a square.
    /// 3. Otherwise every sign pattern of `±√σ(x)` over the embeddings (with
    ///    the identity embedding fixed positive) is inverted to coordinates,
    ///    rounded to denominator `2^B` and checked exactly. The precision
    ///    doubles until every pattern is either verified or excluded.
    ///
    /// A returned root always satisfies `y² = x` exactly and is positive
    /// under the identity embedding.
    pub fn square_root(&self, cfg: &SquareConfig) -> Result<SquareVerdict> {
        if self.is_zero() {
            return Err(Error::domain("is_square: x must be nonzero"));
        }
        let t = self.field.rank();
        if t > MAX_SQUARE_GENS {
            return Err(Error::domain(format!("is_square: {t} generators exceeds {MAX_SQUARE_GENS}")));
        }
        if cfg.precision_start < 64 || cfg.precision_max < cfg.precision_start {
            return Err(Error::domain("is_square: precision must start at 64 bits or more"));
        }
        let bits = cfg.denominator_bits.unwrap_or(t as u32).max(t as u32);

        // z = den²·x has integer coordinates, so its square roots are algebraic integers.
        let den = self.denominator();
        let z = self.integer_coords(&(&den * &den));
        let n = self.field.degree();

        let roots = RadicandRoots::new(&self.field, cfg.precision_start);
        for s in 0..n as u32 {
            if roots.embed(&z, s).hi.is_negative() {
                return Ok(SquareVerdict::NotSquare(Obstruction::Negative { embedding: s }));
            }
        }
        if let Some(l) = residue_obstruction(&self.field, &z, cfg.prefilter_primes) {
            return Ok(SquareVerdict::NotSquare(Obstruction::Residue { prime: l }));
        }

        let z_elem = MQElement::from_coeffs(&self.field, z.iter().enumerate().map(|(s, c)| (s as u32, BigRational::from_integer(c.clone()))));
        let mut precision = cfg.precision_start;
        loop {
            let roots = RadicandRoots::new(&self.field, precision);
            let mut sqrt_embeddings = Vec::with_capacity(n);
            for s in 0..n as u32 {
                let sigma = roots.embed(&z, s);
                if sigma.hi.is_negative() {
                    return Ok(SquareVerdict::NotSquare(Obstruction::Negative { embedding: s }));
                }
                sqrt_embeddings.push(sigma.sqrt(precision));
            }
            let total_width: BigInt = sqrt_embeddings.iter().map(|v| &v.hi - &v.lo).sum();
            let narrow = (total_width << (bits - t as u32 + 1)) < (BigInt::one() << precision);
            if narrow {
                match search_patterns(&z_elem, &roots, &sqrt_embeddings, bits) {
                    Search::Found(w) => {
                        let root = w.scale(&BigRational::new(BigInt::one(), den));
                        return Ok(SquareVerdict::Square(root));
                    }
                    Search::Excluded => {
                        return Ok(SquareVerdict::NotSquare(Obstruction::NoRoot { precision }));
                    }
                    Search::Ambiguous => {}
                }
            }
            if precision >= cfg.precision_max {
                return Err(Error::Undecided { precision: cfg.precision_max });
            }
            precision = (precision * 2).min(cfg.precision_max);
        }
    }
}

impl fmt::Display for MQElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, (&s, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if s == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})√{}", self.field.radicands[s as usize])?;
            }
        }
        Ok(())
    }
}

/// Closed real interval `[lo, hi]·2^-bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

impl Interval {
    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// True when the dyadic rational `num·2^-bits` lies inside.
    pub fn contains_scaled(&self, num: &BigInt, bits: u32) -> bool {
        let (a, b, c) = if bits >= self.bits {
            let sh = bits - self.bits;
            (&self.lo << sh, &self.hi << sh, num.clone())
        } else {
            (self.lo.clone(), self.hi.clone(), num << (self.bits - bits))
        };
        a <= c && c <= b
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64_scaled(&self.lo, self.bits)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64_scaled(&self.hi, self.bits)
    }

    // Enclosure of √v for v in self, clamping the negative part to zero.
    fn sqrt(&self, bits: u32) -> Interval {
        debug_assert_eq!(bits, self.bits);
        let lo = if self.lo.is_positive() { (&self.lo << bits).sqrt() } else { BigInt::zero() };
        let hi = (&self.hi << bits).sqrt() + 1u32;
        Interval { lo, hi, bits }
    }
}

fn to_f64_scaled(v: &BigInt, bits: u32) -> f64 {
    let shift = bits.saturating_sub(60);
    let head = (v >> shift).to_f64().unwrap_or(f64::NAN);
    head / ((1u64 << (bits - shift)) as f64)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `⌊√r_S·2^p⌋` for every basis radicand.
struct RadicandRoots {
    floors: Vec<BigInt>,
    exact: Vec<bool>,
    bits: u32,
}

impl RadicandRoots {
    fn new(field: &MQField, bits: u32) -> Self {
        let mut floors = Vec::with_capacity(field.degree());
        let mut exact = Vec::with_capacity(field.degree());
        for r in &field.radicands {
            let v = bigu(r) << (2 * bits);
            let f = v.sqrt();
            exact.push(&f * &f == v);
            floors.push(f);
        }
        RadicandRoots { floors, exact, bits }
    }

    fn bounds(&self, s: usize) -> (BigInt, BigInt) {
        let f = &self.floors[s];
        let up = if self.exact[s] { f.clone() } else { f + 1u32 };
        (f.clone(), up)
    }

    fn embed(&self, coords: &[BigInt], mask: u32) -> Interval {
        let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
        for (s, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = if (s as u32 & mask).count_ones() % 2 == 1 { -c } else { c.clone() };
            let (r_lo, r_hi) = self.bounds(s);
            if c.is_positive() {
                lo += &c * r_lo;
                hi += &c * r_hi;
            } else {
                lo += &c * r_hi;
                hi += &c * r_lo;
            }
        }
        Interval { lo, hi, bits: self.bits }
    }
}

enum Search {
    Found(MQElement),
    Excluded,
    Ambiguous,
}

enum Coord {
    None,
    One(BigInt),
    Many,
}

fn integers_between(lo: BigInt, hi: BigInt) -> Coord {
    match lo.cmp(&hi) {
        core::cmp::Ordering::Greater => Coord::None,
        core::cmp::Ordering::Equal => Coord::One(lo),
        core::cmp::Ordering::Less => Coord::Many,
    }
}

// Walks the sign patterns in Gray-code order, keeping the S = ∅ coordinate
// as a running sum so most patterns are excluded in O(1) big-integer steps.
fn search_patterns(z: &MQElement, roots: &RadicandRoots, v: &[Interval], bits: u32) -> Search {
    let field = z.field();
    let t = field.rank() as u32;
    let n = field.degree();
    let p = roots.bits;
    let lift = bits - t;
    let unit = BigInt::one() << p;
    let mut negative = vec![false; n];
    let mut lo0: BigInt = v.iter().map(|x| &x.lo).sum();
    let mut hi0: BigInt = v.iter().map(|x| &x.hi).sum();
    let mut ambiguous = false;
    let patterns = 1u64 << (n - 1);
    for g in 0..patterns {
        if g > 0 {
            let s = g.trailing_zeros() as usize + 1;
            let delta = &v[s].lo + &v[s].hi;
            if negative[s] {
                lo0 += &delta;
                hi0 += &delta;
            } else {
                lo0 -= &delta;
                hi0 -= &delta;
            }
            negative[s] = !negative[s];
        }
        let first = integers_between(div_ceil(&(&lo0 << lift), &unit), (&hi0 << lift).div_floor(&unit));
        let mut coords = vec![BigInt::zero(); n];
        let mut pattern_ambiguous = false;
        match first {
            Coord::None => continue,
            Coord::One(k) => coords[0] = k,
            Coord::Many => pattern_ambiguous = true,
        }
        let mut excluded = false;
        for s in 1..n {
            let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
            for (e, iv) in v.iter().enumerate() {
                let flip = ((s & e).count_ones() % 2 == 1) ^ negative[e];
                if flip {
                    a -= &iv.hi;
                    b -= &iv.lo;
                } else {
                    a += &iv.lo;
                    b += &iv.hi;
                }
            }
            let (a, b) = (a << lift, b << lift);
            let (r_lo, r_hi) = roots.bounds(s);
            let lo = if a.is_negative() { div_ceil(&a, &r_lo) } else { div_ceil(&a, &r_hi) };
            let hi = if b.is_negative() { b.div_floor(&r_hi) } else { b.div_floor(&r_lo) };
            match integers_between(lo, hi) {
                Coord::None => {
                    excluded = true;
                    break;
                }
                Coord::One(k) => coords[s] = k,
                Coord::Many => pattern_ambiguous = true,
            }
        }
        if excluded {
            continue;
        }
        if pattern_ambiguous {
            ambiguous = true;
            continue;
        }
        let scale = BigInt::one() << bits;
        let w = MQElement::from_coeffs(
            field,
            coords.into_iter().enumerate().map(|(s, k)| (s as u32, BigRational::new(k, scale.clone()))),
        );
        if &w.square() == z {
            return Search::Found(w);
        }
    }
    if ambiguous {
        Search::Ambiguous
    } else {
        Search::Excluded
    }
}

// First prime l at which the image of x is a non-residue, scanning completely
// split primes until `wanted` of them have a nonzero image.
fn residue_obstruction(field: &MQField, z: &[BigInt], wanted: usize) -> Option<u64> {
    const SCAN_LIMIT: u64 = 1_000_000;
    let mut used = 0usize;
    let mut l = 3u64;
    while used < wanted && l < SCAN_LIMIT {
        l += 2;
        let cand = l - 2;
        if !arith::is_prime(cand) || field.gens.iter().any(|d| d % cand == 0) {
            continue;
        }
        if field.gens.iter().any(|&d| arith::legendre(&big(d), cand) != Ok(1)) {
            continue;
        }
        let roots: Vec<u64> = field.gens.iter().map(|&d| arith::sqrt_mod(&big(d), cand).unwrap()).collect();
        let mut image = 0u64;
        for (s, c) in z.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut b = (0..field.rank()).filter(|i| s >> i & 1 == 1).fold(1u64, |acc, i| arith::mul_mod(acc, roots[i], cand));
            let g = arith::reduce(&bigu(&field.cofactors[s]), cand);
            b = arith::mul_mod(b, arith::inv_mod(g, cand).expect("l does not divide the generators"), cand);
            image = (image + arith::mul_mod(arith::reduce(c, cand), b, cand)) % cand;
        }
        if image == 0 {
            continue;
        }
        used += 1;
        if arith::legendre(&big(image), cand) == Ok(-1) {
            return Some(cand);
        }
    }
    None
}

/// Knobs for [`MQElement::square_root`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareConfig {
    /// First precision tried, in fractional bits (at least 64).
    pub precision_start: u32,
    /// Ceiling after which the answer is `Undecided`.
    pub precision_max: u32,
    /// Coordinates of the root are assumed to have denominator dividing
    /// `2^bits`; `None` means `2^t`.
    pub denominator_bits: Option<u32>,
    /// Completely split primes tried by the residue prefilter.
    pub prefilter_primes: usize,
}

impl Default for SquareConfig {
    fn default() -> Self {
        SquareConfig { precision_start: 64, precision_max: 4096, denominator_bits: None, prefilter_primes: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SquareVerdict {
    Square(MQElement),
    NotSquare(Obstruction),
}

/// Why an element is not a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// Negative under the embedding with this mask.
    Negative { embedding: u32 },
    /// Non-residue image at this completely split prime.
    Residue { prime: u64 },
    /// Every sign pattern excluded at this precision.
    NoRoot { precision: u32 },
}

/// Every squarefree `d` built from `allowed_primes` with `d·x` a square in
/// the field of `x`, ascending.
pub fn square_classes(x: &MQElement, allowed_primes: &[u64], cfg: &SquareConfig) -> Result<Vec<u64>> {
    let mut primes = allowed_primes.to_vec();
    primes.sort_unstable();
    primes.dedup();
    if primes.iter().any(|&p| !arith::is_prime(p)) {
        return Err(Error::domain("find_d: allowed set must contain primes"));
    }
    if primes.len() > 16 {
        return Err(Error::domain("find_d: too many allowed primes"));
    }
    let mut valid = Vec::new();
    for mask in 0..1usize << primes.len() {
        let d = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .try_fold(1u64, |acc, (_, &p)| acc.checked_mul(p))
            .ok_or_else(|| Error::domain("find_d: candidate overflows u64"))?;
        if x.scale(&BigRational::from_integer(big(d))).is_square(cfg)?.is_some() {
            valid.push(d);
        }
    }
    valid.sort_unstable();
    Ok(valid)
}

/// The squarefree `d` built from `allowed_primes` with `d·x` a square in
/// the field of `x`.
///
/// Valid `d` form one class modulo the field's own radicands; the smallest
/// member is returned. More than one class is reported as an error.
pub fn find_d(x: &MQElement, allowed_primes: &[u64], cfg: &SquareConfig) -> Result<u64> {
    let valid = square_classes(x, allowed_primes, cfg)?;
    let Some(&d0) = valid.first() else {
        return Err(Error::NoQuadraticGenerator);
    };
    let in_span = |r: &BigUint| {
        r.to_u64().filter(|&r| arith::prime_divisors(r).iter().all(|p| allowed_primes.contains(p)))
    };
    let inner: Vec<u64> = x.field().radicands.iter().filter_map(in_span).collect();
    let coset_ok = valid.len() == inner.len()
        && valid.iter().all(|&d| {
            let k = arith::squarefree_kernel(&(BigUint::from(d) * BigUint::from(d0)));
            k.to_u64().is_some_and(|k| inner.contains(&k))
        });
    if !coset_ok {
        return Err(Error::domain(format!("find_d: square classes {valid:?} do not form a single class")));
    }
    Ok(d0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pell::fundamental_unit;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qr(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn field(gens: &[u64]) -> Arc<MQField> {
        MQField::new(gens).unwrap()
    }

    fn sqrt(f: &Arc<MQField>, n: u64) -> MQElement {
        MQElement::sqrt_of(f, n).unwrap()
    }

    fn cfg() -> SquareConfig {
        SquareConfig::default()
    }

    #[test]
    fn field_validation() {
        assert!(MQField::new(&[2, 8]).is_err());
        assert!(MQField::new(&[6, 10, 15]).is_err());
        assert!(MQField::new(&[1]).is_err());
        let f = field(&[6, 10]);
        assert_eq!(f.radicand(3), &BigUint::from(15u32));
        assert_eq!(f.degree(), 4);
    }

    #[test]
    fn arithmetic_examples() {
        let f = field(&[2]);
        assert_eq!(sqrt(&f, 2).square(), MQElement::from_integer(&f, 2));

        let f = field(&[5]);
        let half = qr(1, 2);
        let a = MQElement::from_rational(&f, half.clone()).checked_add(&sqrt(&f, 5).scale(&half)).unwrap();
        let b = MQElement::from_rational(&f, half.clone()).checked_sub(&sqrt(&f, 5).scale(&half)).unwrap();
        assert_eq!(a.checked_mul(&b).unwrap(), MQElement::from_integer(&f, -1));

        let f = field(&[3, 5]);
        let s = sqrt(&f, 3).checked_add(&sqrt(&f, 5)).unwrap();
        let expect = MQElement::from_integer(&f, 8).checked_add(&sqrt(&f, 15).scale(&q(2))).unwrap();
        assert_eq!(s.square(), expect);
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = sqrt(&field(&[2]), 2);
        let b = sqrt(&field(&[3]), 3);
        assert_eq!(a.checked_add(&b), Err(Error::FieldMismatch));
        assert_eq!(a.checked_mul(&b), Err(Error::FieldMismatch));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let f = field(&[2, 3]);
        let x = sqrt(&f, 2).checked_sub(&sqrt(&f, 2)).unwrap();
        assert!(x.is_zero());
        assert_eq!(x, MQElement::zero(&f));
    }

    #[test]
    fn embed_examples() {
        let f = field(&[2]);
        let iv = sqrt(&f, 2).embed(&[Sign::Plus], 64);
        assert!(iv.lo_f64() <= core::f64::consts::SQRT_2 && core::f64::consts::SQRT_2 <= iv.hi_f64());
        assert!(iv.is_positive());

        let f = field(&[5]);
        let e5 = MQElement::from_unit(&f, &fundamental_unit(5).unwrap()).unwrap();
        let iv = e5.embed(&[Sign::Minus], 64);
        assert!(iv.is_negative());
        assert!(iv.lo_f64() <= -0.6180339887498948 && -0.618033988749895 <= iv.hi_f64());

        let x = MQElement::from_rational(&f, qr(7, 3)).checked_add(&sqrt(&f, 5).scale(&qr(-5, 11))).unwrap();
        for p in [64u32, 128, 256, 512] {
            // Σ|coeff| < 3, so the width stays within 5 units of 2^-p.
            assert!(x.embed_mask(1, p).width() <= BigInt::from(5), "p = {p}");
        }
    }

    #[test]
    fn is_square_examples() {
        let f = field(&[]);
        let r = MQElement::from_integer(&f, 4).is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r, MQElement::from_integer(&f, 2));

        let f5 = field(&[5]);
        assert_eq!(sqrt(&f5, 5).is_square(&cfg()).unwrap(), None);
        assert_eq!(
            sqrt(&f5, 5).square_root(&cfg()).unwrap(),
            SquareVerdict::NotSquare(Obstruction::Negative { embedding: 1 })
        );

        let f = field(&[3, 5]);
        let x = MQElement::from_integer(&f, 8).checked_add(&sqrt(&f, 15).scale(&q(2))).unwrap();
        let r = x.is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r, sqrt(&f, 3).checked_add(&sqrt(&f, 5)).unwrap());

        let f = field(&[15]);
        let x = MQElement::from_integer(&f, 24).checked_add(&sqrt(&f, 15).scale(&q(6))).unwrap();
        let r = x.is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r, MQElement::from_integer(&f, 3).checked_add(&sqrt(&f, 15)).unwrap());

        assert!(MQElement::zero(&f).is_square(&cfg()).is_err());
    }

    #[test]
    fn rational_squares_in_larger_fields() {
        let f = field(&[2, 3]);
        let r = MQElement::from_integer(&f, 6).is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r, sqrt(&f, 6));
        let r = MQElement::from_rational(&f, qr(3, 8)).is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r.square(), MQElement::from_rational(&f, qr(3, 8)));
        assert_eq!(MQElement::from_integer(&f, 5).is_square(&cfg()).unwrap(), None);
        assert_eq!(MQElement::from_integer(&f, -1).is_square(&cfg()).unwrap(), None);
    }

    #[test]
    fn small_denominator_bound_never_lies() {
        // (1+√5)/2 squared has coordinates over 2; with B = t it is found,
        // and the 4 ε-products below exercise the 1/4 denominators.
        let f = field(&[5, 13]);
        let e5 = MQElement::from_unit(&f, &fundamental_unit(5).unwrap()).unwrap();
        let e13 = MQElement::from_unit(&f, &fundamental_unit(13).unwrap()).unwrap();
        let y = e5.checked_mul(&e13).unwrap();
        let r = y.square().is_square(&cfg()).unwrap().unwrap();
        assert_eq!(r, y);
    }

    #[test]
    fn undecided_below_ceiling() {
        let f = field(&[5, 13]);
        let e = MQElement::from_unit(&f, &fundamental_unit(5).unwrap()).unwrap().pow(200);
        let tight = SquareConfig { precision_start: 64, precision_max: 64, ..cfg() };
        assert_eq!(e.square_root(&tight), Err(Error::Undecided { precision: 64 }));
        assert!(e.is_square(&cfg()).unwrap().is_some());
    }

    #[test]
    fn norm_matches_embedding_product() {
        let f = field(&[2, 5]);
        let x = MQElement::from_coeffs(&f, [(0, q(3)), (1, qr(1, 2)), (2, q(-2)), (3, qr(5, 3))]);
        let n = x.norm();
        let p = 256;
        let ivs: Vec<Interval> = (0..4).map(|s| x.embed_mask(s, p)).collect();
        let approx: f64 = ivs.iter().map(|iv| (iv.lo_f64() + iv.hi_f64()) / 2.0).product();
        let exact = n.numer().to_f64().unwrap() / n.denom().to_f64().unwrap();
        assert!((approx - exact).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn find_d_examples() {
        let f = field(&[15]);
        let e15 = MQElement::from_unit(&f, &fundamental_unit(15).unwrap()).unwrap();
        assert_eq!(find_d(&e15, &[2, 3, 5], &cfg()).unwrap(), 6);

        assert_eq!(find_d(&MQElement::from_integer(&f, 4), &[2, 7], &cfg()).unwrap(), 1);

        let f = field(&[5, 13]);
        let prod = [5u64, 13, 65].iter().fold(MQElement::from_integer(&f, 1), |acc, &m| {
            acc.checked_mul(&MQElement::from_unit(&f, &fundamental_unit(m).unwrap()).unwrap()).unwrap()
        });
        assert_eq!(find_d(&prod, &[5, 13], &cfg()).unwrap(), 1);

        let f = field(&[2]);
        let e2 = MQElement::from_unit(&f, &fundamental_unit(2).unwrap()).unwrap();
        assert_eq!(find_d(&e2, &[3, 5], &cfg()), Err(Error::NoQuadraticGenerator));
    }
}
