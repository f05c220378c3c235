//! Squareness of unit products, candidate fields `F(√d)`, norm signs and
//! Kuroda's unit index, each checked against exact arithmetic.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::arith::{self, big, legendre, prime_divisors, quartic, Sign, VPrime};
use crate::error::{Error, Result};
use crate::f2graph::{Edge, EdgeVector};
use crate::invariants::{general_invariant, scholz_predict, triangle_product};
use crate::mquad::{square_classes, MQElement, MQField, SquareConfig, SquareVerdict};
use crate::pell::UnitSource;

/// A predicted value next to the one computed independently.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Agreement<T> {
    pub predicted: T,
    pub observed: T,
}

impl<T: PartialEq> Agreement<T> {
    pub fn agrees(&self) -> bool {
        self.predicted == self.observed
    }
}

/// Moduli `m₁…m_k` with the norms of their fundamental units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitFamily {
    pub moduli: Vec<u64>,
    pub norms: Vec<Sign>,
    pub product_square: bool,
}

impl UnitFamily {
    pub fn new<U: UnitSource + ?Sized>(moduli: &[u64], units: &U) -> Result<UnitFamily> {
        let norms = moduli.iter().map(|&m| units.unit(m).map(|u| u.norm)).collect::<Result<Vec<_>>>()?;
        Ok(UnitFamily { moduli: moduli.to_vec(), norms, product_square: odd_primes_of_product(moduli).is_empty() })
    }
}

// Primes dividing ∏ mᵢ to an odd power.
fn odd_primes_of_product(ms: &[u64]) -> Vec<u64> {
    let mut parity: BTreeMap<u64, bool> = BTreeMap::new();
    for &m in ms {
        for p in arith::factor(m) {
            let e = parity.entry(p).or_insert(false);
            *e = !*e;
        }
    }
    parity.into_iter().filter(|(_, odd)| *odd).map(|(p, _)| p).collect()
}

fn primes_of_product(ms: &[u64]) -> Vec<u64> {
    let mut ps: Vec<u64> = ms.iter().flat_map(|&m| prime_divisors(m)).collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

fn check_squarefree(m: u64, what: &str) -> Result<()> {
    if m == 0 || !arith::is_squarefree(m) {
        return Err(Error::domain(format!("{what}: {m} is not a squarefree positive integer")));
    }
    Ok(())
}

fn unit_product<U: UnitSource + ?Sized>(field: &Arc<MQField>, ms: &[u64], units: &U) -> Result<MQElement> {
    let mut acc = MQElement::from_integer(field, 1);
    for &m in ms {
        acc = acc.checked_mul(&MQElement::from_unit(field, &units.unit(m)?)?)?;
    }
    Ok(acc)
}

/// Squareness of `ε_{m₁}⋯ε_{m_k}` in `Q(√p₁,…,√p_t)`, where the `pⱼ` are the
/// primes dividing `∏mᵢ`. Under the hypotheses the answer should always be
/// a square.
pub fn theorem_sq_check<U: UnitSource + ?Sized>(family: &UnitFamily, units: &U, cfg: &SquareConfig) -> Result<SquareVerdict> {
    let ms = &family.moduli;
    if ms.is_empty() || family.norms.len() != ms.len() {
        return Err(Error::domain("thm-sq: family must list one norm per modulus"));
    }
    for (i, &m) in ms.iter().enumerate() {
        check_squarefree(m, "thm-sq")?;
        if m == 1 || ms[..i].contains(&m) {
            return Err(Error::domain(format!("thm-sq: moduli must be distinct and > 1, got {ms:?}")));
        }
        let norm = units.unit(m)?.norm;
        if norm != family.norms[i] || norm != Sign::Minus {
            return Err(Error::domain(format!("thm-sq: N(ε_{m}) = {norm}, expected -1")));
        }
    }
    if !odd_primes_of_product(ms).is_empty() || !family.product_square {
        return Err(Error::domain(format!("thm-sq: product of {ms:?} is not a square")));
    }
    let primes = primes_of_product(ms);
    if let Some(p) = primes.iter().find(|&&p| p % 4 == 3) {
        return Err(Error::domain(format!("thm-sq: prime {p} ≡ 3 (mod 4)")));
    }
    let field = MQField::new(&primes)?;
    unit_product(&field, ms, units)?.square_root(cfg)
}

/// Generators of the field in which `ε_m` should be a square when `Nε_m = 1`.
pub fn positive_norm_field(m: u64) -> Vec<u64> {
    let mut gens = prime_divisors(m);
    if m % 4 == 3 {
        gens.insert(0, 2);
    }
    gens
}

/// Squareness of `ε_m` in [`positive_norm_field`] for `Nε_m = +1`.
pub fn positive_norm_square_check<U: UnitSource + ?Sized>(m: u64, units: &U, cfg: &SquareConfig) -> Result<SquareVerdict> {
    check_squarefree(m, "pos-norm")?;
    let unit = units.unit(m)?;
    if unit.norm != Sign::Plus {
        return Err(Error::domain(format!("pos-norm: N(ε_{m}) = -1")));
    }
    let field = MQField::new(&positive_norm_field(m))?;
    MQElement::from_unit(&field, &unit)?.square_root(cfg)
}

/// Result of checking a `|D ∩ P|` parity claim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandOutcome {
    pub p_set: Vec<u64>,
    /// All valid `d`, ascending; they form one class modulo the field's radicands.
    pub classes: Vec<u64>,
    pub predicted_even: bool,
    pub consistent: bool,
}

fn parity_consistent(classes: &[u64], p_set: &[u64], predicted_even: bool) -> bool {
    !classes.is_empty()
        && classes.iter().all(|&d| {
            let hits = prime_divisors(d).iter().filter(|p| p_set.contains(p)).count();
            (hits % 2 == 0) == predicted_even
        })
}

fn legendre_of(m: u64, p: u64) -> Result<i8> {
    legendre(&big(m), p)
}

/// Checks that `|D ∩ P|` is even exactly when the invariant sum over the
/// edges `{p, q}`, `p | mᵢ`, `q | nᵢ`, vanishes; `F(√d)` is computed from
/// the exact product `∏ ε_{mᵢnᵢ}` in `F = Q(√m₁n₁, …)`.
pub fn candm_check<U: UnitSource + ?Sized>(
    pairs: &[(u64, u64)],
    p_set: &[u64],
    units: &U,
    cfg: &SquareConfig,
) -> Result<CandOutcome> {
    let mut mn = Vec::with_capacity(pairs.len());
    let mut query = EdgeVector::new();
    for &(m, n) in pairs {
        check_squarefree(m, "candm")?;
        check_squarefree(n, "candm")?;
        if m.gcd(&n) != 1 || m * n == 1 {
            return Err(Error::domain(format!("candm: ({m}, {n}) must be coprime with mn > 1")));
        }
        if units.unit(m * n)?.norm != Sign::Minus {
            return Err(Error::domain(format!("candm: N(ε_{}) = +1", m * n)));
        }
        for p in prime_divisors(m) {
            if p_set.contains(&p) != (legendre_of(n, p)? == -1) {
                return Err(Error::domain(format!("candm: P disagrees with ({n}/{p}) at pair ({m}, {n})")));
            }
            for q in prime_divisors(n) {
                query.toggle(Edge::new(p, q));
            }
        }
        for q in prime_divisors(n) {
            if p_set.contains(&q) != (legendre_of(m, q)? == -1) {
                return Err(Error::domain(format!("candm: P disagrees with ({m}/{q}) at pair ({m}, {n})")));
            }
        }
        mn.push(m * n);
    }
    if !odd_primes_of_product(&mn).is_empty() {
        return Err(Error::domain("candm: ∏ mᵢnᵢ is not a square"));
    }
    let invariant = if query.is_empty() { 0 } else { general_invariant(&query)?.value.expect("member") };

    let mut gens: Vec<u64> = Vec::new();
    for &g in &mn {
        let mut trial = gens.clone();
        trial.push(g);
        if MQField::new(&trial).is_ok() {
            gens = trial;
        }
    }
    let field = MQField::new(&gens)?;
    let x = unit_product(&field, &mn, units)?;
    let classes = square_classes(&x, &primes_of_product(&mn), cfg)?;
    let predicted_even = invariant == 0;
    let mut p_set = p_set.to_vec();
    p_set.sort_unstable();
    Ok(CandOutcome { consistent: parity_consistent(&classes, &p_set, predicted_even), p_set, classes, predicted_even })
}

/// For a pairwise non-residue triple: is `ε_{pq}ε_{qr}ε_{rp}` a square in
/// `Q(√pq, √pr)`, against the prediction "square iff the triangle product is −1".
pub fn candm_example_check<U: UnitSource + ?Sized>(
    p: u64,
    q: u64,
    r: u64,
    units: &U,
    cfg: &SquareConfig,
) -> Result<Agreement<bool>> {
    let predicted = triangle_product(p, q, r)? == Sign::Minus;
    let field = MQField::new(&[p * q, p * r])?;
    let x = unit_product(&field, &[p * q, q * r, r * p], units)?;
    Ok(Agreement { predicted, observed: x.is_square(cfg)?.is_some() })
}

/// The prime set `P` attached to a coprime pair `(m, n)` with `Nε_{mn} = 1`.
pub fn candp_primes(m: u64, n: u64) -> Result<Vec<u64>> {
    let mut p_set = Vec::new();
    for p in prime_divisors(m) {
        if legendre_of(n, p)? == -1 {
            p_set.push(p);
        }
    }
    for q in prime_divisors(n) {
        if legendre_of(m, q)? == -1 {
            p_set.push(q);
        }
    }
    if m % 8 == 5 && n % 4 == 3 {
        p_set.push(2);
    }
    p_set.sort_unstable();
    p_set.dedup();
    Ok(p_set)
}

/// Checks that `|D ∩ P|` is even for `F(√ε_{mn}) = F(√d)`, `F = Q(√mn)`.
///
/// The hypothesis "mn is a square" is not imposed: with `gcd(m, n) = 1` it
/// would force `m = n = 1`.
pub fn candp_check<U: UnitSource + ?Sized>(m: u64, n: u64, units: &U, cfg: &SquareConfig) -> Result<CandOutcome> {
    check_squarefree(m, "candp")?;
    check_squarefree(n, "candp")?;
    if m.gcd(&n) != 1 || m * n == 1 {
        return Err(Error::domain(format!("candp: ({m}, {n}) must be coprime with mn > 1")));
    }
    if let Some(p) = prime_divisors(m).into_iter().find(|p| p % 4 != 1) {
        return Err(Error::domain(format!("candp: prime {p} | m is not ≡ 1 (mod 4)")));
    }
    let unit = units.unit(m * n)?;
    if unit.norm != Sign::Plus {
        return Err(Error::domain(format!("candp: N(ε_{}) = -1", m * n)));
    }
    let p_set = candp_primes(m, n)?;
    let mut allowed = prime_divisors(m * n);
    if n % 4 == 3 && !allowed.contains(&2) {
        allowed.push(2);
    }
    let field = MQField::new(&[m * n])?;
    let x = MQElement::from_unit(&field, &unit)?;
    let classes = square_classes(&x, &allowed, cfg)?;
    Ok(CandOutcome { consistent: parity_consistent(&classes, &p_set, true), p_set, classes, predicted_even: true })
}

/// Predicts `Nε_{mn} = +1` when `(n/p) = 1` for `p | m`, `(m/q) = 1` for
/// `q | n` and `∏(n/p)₄ ∏(m/q)₄ = −1`; otherwise no prediction.
pub fn norm_sign_predict(m: u64, n: u64) -> Result<Option<Sign>> {
    check_squarefree(m, "norm-sign")?;
    check_squarefree(n, "norm-sign")?;
    if m.gcd(&n) != 1 {
        return Err(Error::domain(format!("norm-sign: gcd({m}, {n}) ≠ 1")));
    }
    let (pm, pn) = (prime_divisors(m), prime_divisors(n));
    if let Some(p) = pm.iter().chain(&pn).find(|&&p| p % 4 == 3) {
        return Err(Error::domain(format!("norm-sign: prime {p} ≡ 3 (mod 4)")));
    }
    let mut product = Sign::Plus;
    for (other, ps) in [(n, &pm), (m, &pn)] {
        for &p in ps {
            if legendre_of(other, p)? != 1 {
                return Ok(None);
            }
            product *= quartic(&big(other), VPrime::new(p)?)?;
        }
    }
    Ok((product == Sign::Minus).then_some(Sign::Plus))
}

/// `Q(F) = [E_F : E_{K₁}E_{K₂}E_{K₃}]` with the exponent triples whose unit
/// product is a square in `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QIndex {
    pub value: u32,
    /// Nonzero exponent triples `e` (bit `i` ↔ `ε_{dᵢ}`) with `±ε^e` a square.
    pub witnesses: Vec<u8>,
    /// Whether the witnesses together with 0 are closed under addition.
    pub subgroup: bool,
}

/// Unit index of the real biquadratic field with quadratic subfields
/// `Q(√d₁), Q(√d₂), Q(√d₃)`.
pub fn kuroda_q<U: UnitSource + ?Sized>(d: [u64; 3], units: &U, cfg: &SquareConfig) -> Result<QIndex> {
    for &di in &d {
        check_squarefree(di, "kuroda")?;
    }
    let kernel = arith::squarefree_kernel(&(num_bigint::BigUint::from(d[0]) * d[1]));
    if d[0] == d[1] || d[0] <= 1 || d[1] <= 1 || kernel != d[2].into() {
        return Err(Error::domain(format!("kuroda: {d:?} are not the subfields of a biquadratic field")));
    }
    let field = MQField::new(&d[..2])?;
    let eps = d
        .iter()
        .map(|&di| MQElement::from_unit(&field, &units.unit(di)?))
        .collect::<Result<Vec<_>>>()?;
    let mut witnesses = Vec::new();
    for e in 1u8..8 {
        let x = (0..3).filter(|i| e >> i & 1 == 1).fold(MQElement::from_integer(&field, 1), |acc, i| {
            acc.checked_mul(&eps[i]).expect("same field")
        });
        let positive_first = if x.embed_mask(1, 64).is_negative() || x.embed_mask(2, 64).is_negative() {
            [x.neg(), x]
        } else {
            let n = x.neg();
            [x, n]
        };
        for cand in &positive_first {
            if cand.is_square(cfg)?.is_some() {
                witnesses.push(e);
                break;
            }
        }
    }
    let subgroup = witnesses.iter().all(|a| witnesses.iter().all(|b| a == b || witnesses.contains(&(a ^ b))));
    Ok(QIndex { value: witnesses.len() as u32 + 1, witnesses, subgroup })
}

/// `Q(F)` for `F = Q(√p, √qr)` by the closed formula (1 when `Nε_{pqr} = −1`
/// and `(p/q)₄(q/p)₄ = −1`, else 2), next to [`kuroda_q`].
pub fn kuroda_example_check<U: UnitSource + ?Sized>(
    p: u64,
    q: u64,
    r: u64,
    units: &U,
    cfg: &SquareConfig,
) -> Result<Agreement<u32>> {
    let (vp, vq, vr) = (VPrime::new(p)?, VPrime::new(q)?, VPrime::new(r)?);
    if p == q || q == r || r == p {
        return Err(Error::domain("kuroda: primes must be distinct"));
    }
    if legendre_of(vp.get(), vq.get())? != 1 || legendre_of(vq.get(), vr.get())? != -1 {
        return Err(Error::domain(format!("kuroda: need ({p}/{q}) = +1 and ({q}/{r}) = -1")));
    }
    let negative = units.unit(p * q * r)?.norm == Sign::Minus;
    let predicted = if negative && scholz_predict(p, q)? == Sign::Minus { 1 } else { 2 };
    let observed = kuroda_q([p, q * r, p * q * r], units, cfg)?.value;
    Ok(Agreement { predicted, observed })
}

/// Predicted parity of the class number of `Q(√p, √q, √r)` for a pairwise
/// non-residue triple: even iff `(pq/r)₄(qr/p)₄(rp/q)₄ = −1`.
pub fn triquad_parity_criterion(p: u64, q: u64, r: u64) -> Result<bool> {
    Ok(triangle_product(p, q, r)? == Sign::Minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mquad::find_d;
    use alloc::vec;
    use crate::pell::Direct;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn cfg() -> SquareConfig {
        SquareConfig::default()
    }

    fn scaled(x: &MQElement, num: i64, den: i64) -> MQElement {
        x.scale(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn root(v: SquareVerdict) -> MQElement {
        match v {
            SquareVerdict::Square(y) => y,
            SquareVerdict::NotSquare(o) => panic!("not a square: {o:?}"),
        }
    }

    #[test]
    fn theorem_sq_examples() {
        for ms in [[5u64, 13, 65], [2, 5, 10]] {
            let fam = UnitFamily::new(&ms, &Direct).unwrap();
            assert!(fam.product_square);
            let y = root(theorem_sq_check(&fam, &Direct, &cfg()).unwrap());
            assert_eq!(y.field().gens(), &primes_of_product(&ms)[..]);
        }
        let fam = UnitFamily::new(&[2, 5, 10], &Direct).unwrap();
        let f = MQField::new(&[2, 5]).unwrap();
        let prod = unit_product(&f, &[2, 5, 10], &Direct).unwrap();
        let expect = MQElement::from_coeffs(&f, [(0, 13), (1, 8), (2, 5), (3, 4)].map(|(s, c)| (s, BigRational::new(c.into(), 2.into()))));
        assert_eq!(prod, expect);
        assert!(theorem_sq_check(&fam, &Direct, &cfg()).is_ok());

        let dup = UnitFamily { moduli: vec![5, 5], norms: vec![Sign::Minus; 2], product_square: true };
        assert!(theorem_sq_check(&dup, &Direct, &cfg()).is_err());
    }

    #[test]
    fn positive_norm_examples() {
        let y = root(positive_norm_square_check(15, &Direct, &cfg()).unwrap());
        let f = y.field().clone();
        assert_eq!(f.gens(), &[2, 3, 5]);
        let expect = MQElement::sqrt_of(&f, 6).unwrap().checked_add(&MQElement::sqrt_of(&f, 10).unwrap()).unwrap();
        assert_eq!(y, scaled(&expect, 1, 2));

        let y = root(positive_norm_square_check(3, &Direct, &cfg()).unwrap());
        let f = y.field().clone();
        let expect = MQElement::sqrt_of(&f, 2).unwrap().checked_add(&MQElement::sqrt_of(&f, 6).unwrap()).unwrap();
        assert_eq!(y, scaled(&expect, 1, 2));

        assert!(positive_norm_square_check(5, &Direct, &cfg()).is_err());
    }

    #[test]
    fn candm_examples() {
        let out = candm_check(&[(2, 5), (5, 13), (13, 2)], &[2, 5, 13], &Direct, &cfg()).unwrap();
        assert!(out.predicted_even && out.consistent);
        assert!(out.classes.contains(&1));
        let ex = candm_example_check(2, 5, 13, &Direct, &cfg()).unwrap();
        assert_eq!(ex, Agreement { predicted: true, observed: true });

        assert!(candm_check(&[(2, 5), (5, 13), (13, 2)], &[2, 5], &Direct, &cfg()).is_err());
        // n = 1 forces p ∉ P for p | m.
        let out = candm_check(&[(5, 1), (2, 5), (2, 1)], &[2, 5], &Direct, &cfg());
        assert!(out.is_err());
    }

    #[test]
    fn candp_examples() {
        assert_eq!(candp_primes(5, 3).unwrap(), [2, 3, 5]);
        let f = MQField::new(&[15]).unwrap();
        let e15 = MQElement::from_unit(&f, &Direct.unit(15).unwrap()).unwrap();
        assert_eq!(find_d(&e15, &[2, 3, 5], &cfg()), Ok(6));
        let out = candp_check(5, 3, &Direct, &cfg()).unwrap();
        assert_eq!(out.classes, [6, 10]);
        assert!(out.consistent);
        assert!(candp_check(3, 5, &Direct, &cfg()).is_err());
        assert!(candp_check(5, 13, &Direct, &cfg()).is_err());
    }

    #[test]
    fn norm_sign_examples() {
        assert_eq!(norm_sign_predict(13, 17), Ok(Some(Sign::Plus)));
        assert_eq!(Direct.unit(221).unwrap().norm, Sign::Plus);
        assert_eq!(norm_sign_predict(5, 29), Ok(None));
        assert_eq!(norm_sign_predict(2, 5), Ok(None));
        assert!(norm_sign_predict(3, 5).is_err());
    }

    #[test]
    fn kuroda_examples() {
        let q = kuroda_q([2, 3, 6], &Direct, &cfg()).unwrap();
        assert!(q.subgroup && [1, 2, 4].contains(&q.value));
        for (p, q, r) in [(13, 17, 5), (5, 29, 2)] {
            let a = kuroda_example_check(p, q, r, &Direct, &cfg()).unwrap();
            assert!(a.agrees(), "{p} {q} {r}: {a:?}");
        }
        assert_eq!(kuroda_example_check(5, 29, 2, &Direct, &cfg()).unwrap().predicted, 2);
        assert!(kuroda_example_check(13, 17, 53, &Direct, &cfg()).is_err());
        assert!(kuroda_q([2, 3, 5], &Direct, &cfg()).is_err());
    }

    #[test]
    fn triquad_examples() {
        assert_eq!(triquad_parity_criterion(2, 5, 13), Ok(true));
        assert_eq!(triquad_parity_criterion(13, 2, 5), Ok(true));
        assert!(triquad_parity_criterion(5, 29, 2).is_err());
    }
}
