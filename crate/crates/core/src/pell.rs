//! Fundamental units of real quadratic fields and the unit residue symbol.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, big, bigu, legendre, prime_divisors, reduce, sqrt_2adic, sqrt_mod, Sign, VPrime};
use crate::error::{Error, Result};

/// The fundamental unit `(x + y√m)/den > 1` of the maximal order of `Q(√m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadUnit {
    pub m: u64,
    pub x: BigUint,
    pub y: BigUint,
    pub den: u8,
    pub norm: Sign,
}

/// Which of the two square roots of `m` a local reduction uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Root {
    /// The canonical root: the smaller residue for odd `p`, `≡ 1 (mod 4)` at `p = 2`.
    Canonical,
    /// Its negative.
    Other,
}

impl QuadUnit {
    /// `x² − m·y² = norm·den²`, checked exactly.
    pub fn norm_relation_holds(&self) -> bool {
        let lhs = bigu(&self.x) * bigu(&self.x) - big(self.m) * bigu(&self.y) * bigu(&self.y);
        let d = BigInt::from(self.den);
        lhs == BigInt::from(self.norm.to_i8()) * &d * &d
    }

    /// `ε³ = X + Y√m` with integer `X, Y`, or `None` if `ε³ ∉ Z[√m]`.
    pub fn cube(&self) -> Option<(BigInt, BigInt)> {
        let (x, y, m) = (bigu(&self.x), bigu(&self.y), big(self.m));
        let xc = &x * &x * &x + BigInt::from(3) * &x * &y * &y * &m;
        let yc = BigInt::from(3) * &x * &x * &y + &y * &y * &y * &m;
        let d3 = BigInt::from(self.den).pow(3);
        if (&xc % &d3).is_zero() && (&yc % &d3).is_zero() {
            Some((xc / &d3, yc / d3))
        } else {
            None
        }
    }

    /// The unit residue symbol `(ε_m/p)` for a prime `p ∈ V` splitting in `Q(√m)`,
    /// reducing `√m` at the chosen root.
    pub fn residue_symbol(&self, p: VPrime, root: Root) -> Result<Sign> {
        if p.get() == 2 {
            return self.residue_symbol_at_two(root);
        }
        let p = p.get();
        let m = big(self.m);
        if legendre(&m, p)? != 1 {
            return Err(Error::domain(format!("unit_symbol: {p} does not split in Q(√{})", self.m)));
        }
        let r = sqrt_mod(&m, p)?;
        let r = match root {
            Root::Canonical => r,
            Root::Other => p - r,
        };
        let den_inv = arith::inv_mod(self.den as u64, p).expect("p is odd");
        let x = reduce(&bigu(&self.x), p);
        let y = reduce(&bigu(&self.y), p);
        let u = arith::mul_mod((x + arith::mul_mod(y, r, p)) % p, den_inv, p);
        assert_ne!(u, 0, "a unit cannot reduce to zero");
        arith::legendre_sign(&big(u), p)
    }

    // Local symbol (u, 2)_2 of the 2-adic image u of ε: +1 iff u ≡ ±1 (mod 8).
    fn residue_symbol_at_two(&self, root: Root) -> Result<Sign> {
        let m = big(self.m);
        if reduce(&m, 8) != 1 {
            return Err(Error::domain(format!("unit_symbol: 2 does not split in Q(√{})", self.m)));
        }
        // sqrt_2adic(m, 6) fixes the 2-adic root modulo 32.
        let modulus = BigInt::from(32);
        let rho = bigu(&sqrt_2adic(&m, 6)?);
        let rho = match root {
            Root::Canonical => rho,
            Root::Other => (-rho).mod_floor(&modulus),
        };
        let num = (bigu(&self.x) + bigu(&self.y) * rho).mod_floor(&modulus);
        let u = if self.den == 2 {
            assert!(num.is_even(), "half-integer unit must have an even 2-adic numerator");
            num / 2
        } else {
            num
        };
        match reduce(&u, 8) {
            1 | 7 => Ok(Sign::Plus),
            3 | 5 => Ok(Sign::Minus),
            _ => unreachable!("a unit has odd 2-adic image"),
        }
    }
}

impl fmt::Display for QuadUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{} + {}√{}", self.x, self.y, self.m)
        } else {
            write!(f, "({} + {}√{})/{}", self.x, self.y, self.m, self.den)
        }
    }
}

/// Computes the fundamental unit of `Q(√m)` from the period of the continued
/// fraction of `√m` (or of `(1+√m)/2` when `m ≡ 1 (mod 4)`).
pub fn fundamental_unit(m: u64) -> Result<QuadUnit> {
    if m <= 1 || !arith::is_squarefree(m) {
        return Err(Error::domain(format!("fundamental_unit: {m} is not a squarefree integer > 1")));
    }
    let mi = m as i128;
    let s = m.sqrt() as i128;
    let (p0, q0) = if m % 4 == 1 { (1i128, 2i128) } else { (0, 1) };
    let partial = |p: i128, q: i128| -> i128 {
        if q > 0 {
            Integer::div_floor(&(p + s), &q)
        } else {
            Integer::div_floor(&(p + s + 1), &q)
        }
    };
    let step = |p: i128, q: i128, a: i128| -> (i128, i128) {
        let pn = a * q - p;
        let qn = (mi - pn * pn) / q;
        (pn, qn)
    };
    let a0 = partial(p0, q0);
    let (p1, q1) = step(p0, q0, a0);

    // Denominators of the convergents of ξ₁ = (p1 + √m)/q1 over one period.
    let (mut k_prev, mut k_cur) = (BigInt::zero(), BigInt::one());
    let (mut p, mut q) = (p1, q1);
    let mut period = 0usize;
    loop {
        let a = partial(p, q);
        let (pn, qn) = step(p, q, a);
        period += 1;
        if (pn, qn) == (p1, q1) {
            break;
        }
        let k_next = BigInt::from(partial(pn, qn)) * &k_cur + &k_prev;
        k_prev = core::mem::replace(&mut k_cur, k_next);
        p = pn;
        q = qn;
    }

    // ξ₁ is fixed by the period automorph; ε = k_cur·ξ₁ + k_prev.
    let x_num = &k_cur * BigInt::from(p1) + &k_prev * BigInt::from(q1);
    let y_num = k_cur;
    let q1b = BigInt::from(q1);
    let g = x_num.gcd(&y_num).gcd(&q1b);
    let (x, y, den) = (x_num / &g, y_num / &g, q1b / &g);
    let den = den.to_u8().filter(|d| *d == 1 || *d == 2).ok_or_else(|| {
        Error::domain(format!("fundamental_unit: unexpected denominator for m = {m}"))
    })?;
    let n = &x * &x - big(m) * &y * &y;
    let d2 = BigInt::from(den * den);
    let norm = if n == d2 {
        Sign::Plus
    } else if n == -d2 {
        Sign::Minus
    } else {
        unreachable!("continued-fraction automorph is not a unit for m = {m}")
    };
    debug_assert_eq!(norm, Sign::parity(period));
    Ok(QuadUnit {
        m,
        x: x.to_biguint().expect("unit > 1 has positive x"),
        y: y.to_biguint().expect("unit > 1 has positive y"),
        den,
        norm,
    })
}

/// `(ε_m/p)` at the canonical root.
pub fn unit_symbol(m: u64, p: VPrime) -> Result<Sign> {
    fundamental_unit(m)?.residue_symbol(p, Root::Canonical)
}

/// Where fundamental units come from; lets callers plug in a cache.
pub trait UnitSource {
    fn unit(&self, m: u64) -> Result<QuadUnit>;
}

/// Recomputes every unit.
#[derive(Clone, Copy, Debug, Default)]
pub struct Direct;

impl UnitSource for Direct {
    fn unit(&self, m: u64) -> Result<QuadUnit> {
        fundamental_unit(m)
    }
}

impl<U: UnitSource + ?Sized> UnitSource for &U {
    fn unit(&self, m: u64) -> Result<QuadUnit> {
        (**self).unit(m)
    }
}

/// Per-claim outcome of the congruences satisfied by `ε_m³ = x + y√m` when
/// `m` is odd and `Nε_m = -1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitCongruences {
    pub m: u64,
    pub x: BigInt,
    pub y: BigInt,
    /// `x` is even.
    pub x_even: bool,
    /// `x ≡ 0 (mod 4)` exactly when `m ≡ 1 (mod 8)`.
    pub x_mod4_matches: bool,
    /// `y ≡ 1 (mod 4)`.
    pub y_one_mod4: bool,
    /// Every prime divisor of `m·y` is `≡ 1 (mod 4)`.
    pub divisors_one_mod4: bool,
}

impl UnitCongruences {
    pub fn all_pass(&self) -> bool {
        self.x_even && self.x_mod4_matches && self.y_one_mod4 && self.divisors_one_mod4
    }
}

const TRIAL_LIMIT: u64 = 10_000;

/// Checks that every prime factor of `y` is `≡ 1 (mod 4)`.
///
/// Small factors are found by trial division and checked one by one. The
/// remaining cofactor `c` is certified by the witness `x² ≡ -1 (mod c)`, which
/// excludes 2 and every prime `≡ 3 (mod 4)`.
fn prime_factors_one_mod4(y: &BigInt, x: &BigInt) -> bool {
    let mut c = y.abs();
    if c.is_zero() {
        return false;
    }
    let mut d = 2u64;
    while d <= TRIAL_LIMIT {
        let db = big(d);
        if (&c % &db).is_zero() {
            if d % 4 != 1 {
                return false;
            }
            while (&c % &db).is_zero() {
                c /= &db;
            }
        }
        d += 1;
    }
    if c.is_one() {
        return true;
    }
    c.is_odd() && ((x * x + 1u32) % &c).is_zero()
}

pub fn check_unit_congruences(m: u64) -> Result<UnitCongruences> {
    check_unit_congruences_with(&Direct, m)
}

pub fn check_unit_congruences_with(units: &impl UnitSource, m: u64) -> Result<UnitCongruences> {
    if m <= 2 || m.is_multiple_of(2) || !arith::is_squarefree(m) {
        return Err(Error::domain(format!("check_unit_congruences: {m} is not an odd squarefree integer > 2")));
    }
    let unit = units.unit(m)?;
    if unit.norm != Sign::Minus {
        return Err(Error::domain(format!("check_unit_congruences: Nε_{m} = +1")));
    }
    let (x, y) = unit.cube().expect("ε³ lies in Z[√m] for odd m");
    let x4 = reduce(&x, 4);
    let m_primes: Vec<u64> = prime_divisors(m);
    Ok(UnitCongruences {
        m,
        x_even: x.is_even(),
        x_mod4_matches: (x4 == 0) == (m % 8 == 1),
        y_one_mod4: reduce(&y, 4) == 1,
        divisors_one_mod4: m_primes.iter().all(|p| p % 4 == 1) && prime_factors_one_mod4(&y, &x),
        x,
        y,
    })
}
