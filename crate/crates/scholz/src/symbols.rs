//! Symbol values with the evaluated definition, for `scholz symbol`.

use num_bigint::BigInt;
use scholz_core::arith::{self, jacobi, legendre, quartic, reduce, Sign, VPrime};
use scholz_core::pell::{Root, UnitSource};
use scholz_core::Result;

/// A symbol value with a one-line account of how it was evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluated {
    pub value: String,
    pub definition: String,
}

fn show(v: i8) -> String {
    match v {
        1 => "+1".into(),
        -1 => "-1".into(),
        _ => v.to_string(),
    }
}

fn sign_of_residue(r: u64, p: u64) -> &'static str {
    if r == 1 {
        "1"
    } else if r == p - 1 {
        "-1"
    } else {
        "?"
    }
}

pub fn legendre_symbol(m: &BigInt, p: u64) -> Result<Evaluated> {
    let v = legendre(m, p)?;
    let definition = if p == 2 {
        format!("({m}/2): {m} ≡ {} (mod 8)", reduce(m, 8))
    } else {
        let r = reduce(m, p);
        let e = arith::pow_mod(r, (p - 1) / 2, p);
        format!("({m}/{p}) ≡ {r}^{} ≡ {} (mod {p})", (p - 1) / 2, if r == 0 { "0" } else { sign_of_residue(e, p) })
    };
    Ok(Evaluated { value: show(v), definition })
}

pub fn jacobi_symbol(m: &BigInt, n: &BigInt) -> Result<Evaluated> {
    let v = jacobi(m, n)?;
    let parts: Vec<String> = match u64::try_from(n) {
        Ok(n) => arith::factor(n)
            .iter()
            .map(|&p| format!("({m}/{p}) = {}", show(legendre(m, p).unwrap_or(0))))
            .collect(),
        Err(_) => Vec::new(),
    };
    let definition = if parts.is_empty() {
        format!("({m}/{n}) by binary reciprocity")
    } else {
        format!("({m}/{n}) = ∏ over prime factors: {}", parts.join(", "))
    };
    Ok(Evaluated { value: show(v), definition })
}

pub fn quartic_symbol(m: &BigInt, p: u64) -> Result<Evaluated> {
    let vp = VPrime::new(p)?;
    let v = quartic(m, vp)?;
    let definition = if p == 2 {
        let r = reduce(m, 16);
        let branch = if matches!(r, 1 | 15) { "±1 ↦ +1" } else { "±9 ↦ -1" };
        format!("({m}/2)₄: {m} ≡ {r} (mod 16), branch {branch}")
    } else {
        let r = reduce(m, p);
        let e = arith::pow_mod(r, (p - 1) / 4, p);
        format!("({m}/{p})₄ ≡ {r}^{} ≡ {} (mod {p})", (p - 1) / 4, sign_of_residue(e, p))
    };
    Ok(Evaluated { value: v.to_string(), definition })
}

pub fn unit_symbol<U: UnitSource + ?Sized>(m: u64, p: u64, units: &U) -> Result<Evaluated> {
    let vp = VPrime::new(p)?;
    let unit = units.unit(m)?;
    let v = unit.residue_symbol(vp, Root::Canonical)?;
    let other = unit.residue_symbol(vp, Root::Other)?;
    let root = if p == 2 {
        format!("√{m} ≡ {} (mod 32)", arith::sqrt_2adic(&BigInt::from(m), 6)?)
    } else {
        format!("√{m} ≡ {} (mod {p})", arith::sqrt_mod(&BigInt::from(m), p)?)
    };
    let agree = if v == other { "agrees" } else { "DISAGREES" };
    let definition = format!("ε_{m} = {unit}, N = {}, {root}; other root {agree}", unit.norm);
    Ok(Evaluated { value: v.to_string(), definition })
}

impl Evaluated {
    pub fn sign(&self) -> Option<Sign> {
        match self.value.as_str() {
            "+1" => Some(Sign::Plus),
            "-1" => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scholz_core::pell::Direct;

    #[test]
    fn examples() {
        assert_eq!(quartic_symbol(&5.into(), 29).unwrap().value, "-1");
        let l = legendre_symbol(&7.into(), 2).unwrap();
        assert_eq!(l.value, "+1");
        assert_eq!(l.definition, "(7/2): 7 ≡ 7 (mod 8)");
        assert_eq!(unit_symbol(13, 17, &Direct).unwrap().value, "-1");
        let q = quartic_symbol(&17.into(), 2).unwrap();
        assert_eq!(q.definition, "(17/2)₄: 17 ≡ 1 (mod 16), branch ±1 ↦ +1");
        assert_eq!(legendre_symbol(&10.into(), 5).unwrap().value, "0");
        assert!(quartic_symbol(&2.into(), 5).is_err());
    }
}
