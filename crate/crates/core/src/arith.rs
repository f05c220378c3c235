//! Primes, modular arithmetic and residue symbols.
//!
//! The symbols at `p = 2` follow fixed tables: `(m/2)` reads `m mod 8` and is
//! only defined for odd `m`; `(m/2)_4` reads `m mod 16` and is only defined for
//! `m ≡ ±1 (mod 8)`. Calls outside those domains are errors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Mul, MulAssign, Neg};

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A value in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// `Plus` when `v` is true.
    pub fn from_bool(v: bool) -> Sign {
        if v {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `(-1)^k`.
    pub fn parity(k: usize) -> Sign {
        Sign::from_bool(k.is_multiple_of(2))
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool(self == rhs)
    }
}

impl MulAssign for Sign {
    fn mul_assign(&mut self, rhs: Sign) {
        *self = *self * rhs;
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A prime `p ≢ 3 (mod 4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VPrime(u64);

impl VPrime {
    pub fn new(p: u64) -> Result<VPrime> {
        if !is_prime(p) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        if p % 4 == 3 {
            return Err(Error::domain(format!("{p} ≡ 3 (mod 4) is not in V")));
        }
        Ok(VPrime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for VPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// `m mod n` in `[0, n)`.
pub fn reduce(m: &BigInt, n: u64) -> u64 {
    m.mod_floor(&BigInt::from(n)).to_u64().expect("residue fits in u64")
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factors of `n` in ascending order, with multiplicity.
pub fn factor(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    while n.is_multiple_of(2) {
        out.push(2);
        n /= 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        while n.is_multiple_of(d) {
            out.push(d);
            n /= d;
        }
        d += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Distinct prime divisors of `n`, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    let mut ps = factor(n);
    ps.dedup();
    ps
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let ps = factor(n);
    ps.windows(2).all(|w| w[0] != w[1])
}

/// Squarefree kernel: `n / s²` for the largest square `s²` dividing `n`.
pub fn squarefree_kernel(n: &BigUint) -> BigUint {
    let mut n = n.clone();
    let mut out = BigUint::one();
    let two = BigUint::from(2u32);
    let mut d = two.clone();
    while &d * &d <= n {
        let mut e = 0u32;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &d;
        }
        d += if d == two { 1u32 } else { 2u32 };
    }
    out * n
}

/// Legendre symbol `(m/p)` for a prime `p`.
///
/// Odd `p` uses Euler's criterion and returns 0 when `p | m`. For `p = 2`
/// the value is `+1` on `m ≡ ±1 (mod 8)` and `-1` on `m ≡ ±3 (mod 8)`;
/// even `m` is rejected.
pub fn legendre(m: &BigInt, p: u64) -> Result<i8> {
    if !is_prime(p) {
        return Err(Error::domain(format!("legendre: modulus {p} is not prime")));
    }
    if p == 2 {
        return match reduce(m, 8) {
            1 | 7 => Ok(1),
            3 | 5 => Ok(-1),
            _ => Err(Error::domain("legendre: (m/2) is defined only for odd m")),
        };
    }
    let r = reduce(m, p);
    if r == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Legendre symbol restricted to units, as a [`Sign`].
pub fn legendre_sign(m: &BigInt, p: u64) -> Result<Sign> {
    match legendre(m, p)? {
        0 => Err(Error::domain(format!("legendre: {p} divides {m}"))),
        v => Ok(Sign::from_i8(v).unwrap()),
    }
}

/// Jacobi symbol `(m/n)` for odd positive `n`, by binary quadratic reciprocity.
pub fn jacobi(m: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::domain(format!("jacobi: modulus {n} must be odd and positive")));
    }
    let mut a = m.mod_floor(n).magnitude().clone();
    let mut n = n.magnitude().clone();
    let mut sign = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap();
        a >>= tz;
        let n8 = (&n % 8u32).to_u32().unwrap();
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            sign = -sign;
        }
        if (&a % 4u32).to_u32() == Some(3) && n8 % 4 == 3 {
            sign = -sign;
        }
        core::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    Ok(if n.is_one() { sign } else { 0 })
}

/// Quartic residue symbol `(m/p)_4` for `p ∈ V`.
///
/// For odd `p` this is `m^((p-1)/4) mod p`, which is `±1` once `(m/p) = +1`.
/// For `p = 2` it reads `m mod 16`: `±1 ↦ +1`, `±9 ↦ -1`, defined for
/// `m ≡ ±1 (mod 8)`.
pub fn quartic(m: &BigInt, p: VPrime) -> Result<Sign> {
    let p = p.get();
    if p == 2 {
        return match reduce(m, 16) {
            1 | 15 => Ok(Sign::Plus),
            7 | 9 => Ok(Sign::Minus),
            r => Err(Error::domain(format!("quartic: (m/2)_4 needs m ≡ ±1 (mod 8), got m ≡ {r} (mod 16)"))),
        };
    }
    let r = reduce(m, p);
    if r == 0 {
        return Err(Error::domain(format!("quartic: {p} divides m")));
    }
    let v = pow_mod(r, (p - 1) / 4, p);
    if v == 1 {
        Ok(Sign::Plus)
    } else if v == p - 1 {
        Ok(Sign::Minus)
    } else {
        Err(Error::domain(format!("quartic: m is not a quadratic residue mod {p}")))
    }
}

/// Canonical square root of `m` modulo an odd prime `p`: the smaller of the
/// two roots, found by Tonelli–Shanks with the non-residue searched upward from 2.
pub fn sqrt_mod(m: &BigInt, p: u64) -> Result<u64> {
    if p == 2 {
        return Err(Error::domain("sqrt_mod: p must be odd"));
    }
    if legendre(m, p)? != 1 {
        return Err(Error::domain(format!("sqrt_mod: {m} is not a nonzero square mod {p}")));
    }
    let a = reduce(m, p);
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut c = pow_mod(z, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    let mut t = pow_mod(a, q, p);
    let mut e = s;
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (e - i - 1), p);
        r = mul_mod(r, b, p);
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        e = i;
    }
    debug_assert_eq!(mul_mod(r, r, p), a);
    Ok(r.min(p - r))
}

/// 2-adic square root of `m ≡ 1 (mod 8)` to precision `2^k`.
///
/// The result `r` satisfies `r² ≡ m (mod 2^k)`, `r ≡ 1 (mod 4)` and
/// `0 < r < 2^(k-1)`; it determines the 2-adic root `√m ≡ 1 (mod 4)` modulo
/// `2^(k-1)`.
pub fn sqrt_2adic(m: &BigInt, k: u32) -> Result<BigUint> {
    if k < 3 {
        return Err(Error::domain("sqrt_2adic: precision exponent must be at least 3"));
    }
    if reduce(m, 8) != 1 {
        return Err(Error::domain("sqrt_2adic: m must be ≡ 1 (mod 8)"));
    }
    let modulus = BigInt::one() << k;
    let m = m.mod_floor(&modulus);
    // Hensel step: r² ≡ m (mod 2^j) lifts to r or r + 2^(j-1) modulo 2^(j+1).
    let mut r = BigInt::one();
    for j in 3..k {
        let next = BigInt::one() << (j + 1);
        if (&r * &r - &m).mod_floor(&next) != BigInt::zero() {
            r += BigInt::one() << (j - 1);
        }
    }
    let half = BigInt::one() << (k - 1);
    let mut r = r.mod_floor(&half);
    if reduce(&r, 4) == 3 {
        r = &half - r;
    }
    debug_assert!((&r * &r - &m).mod_floor(&modulus).is_zero());
    Ok(r.to_biguint().unwrap())
}

/// Primes `p ≤ bound` with `p ≢ 3 (mod 4)`, ascending.
pub fn primes_in_v(bound: u64) -> Vec<VPrime> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        if i % 4 != 3 {
            out.push(VPrime(i as u64));
        }
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub(crate) fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

pub(crate) fn bigu(n: &BigUint) -> BigInt {
    BigInt::from_biguint(BigSign::Plus, n.clone())
}
