//! Square roots in multiquadratic fields, compared against an exact
//! relative-norm descent through the tower Q ⊂ Q(√d₁) ⊂ … ⊂ Q(√d₁,…,√d_t).

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use scholz_core::mquad::{MQElement, MQField, SquareConfig, SquareVerdict};
use scholz_core::pell::fundamental_unit;

// Tower element: coordinates on ∏_{i∈S} √dᵢ (unreduced products).
#[derive(Clone, Debug, PartialEq)]
struct Tower {
    gens: Vec<i64>,
    c: Vec<BigRational>,
}

impl Tower {
    fn zero(gens: &[i64]) -> Self {
        Tower { gens: gens.to_vec(), c: vec![BigRational::zero(); 1 << gens.len()] }
    }

    fn rational(gens: &[i64], q: BigRational) -> Self {
        let mut t = Self::zero(gens);
        t.c[0] = q;
        t
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    fn add(&self, o: &Tower) -> Tower {
        Tower { gens: self.gens.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    fn scale(&self, q: &BigRational) -> Tower {
        Tower { gens: self.gens.clone(), c: self.c.iter().map(|a| a * q).collect() }
    }

    fn mul(&self, o: &Tower) -> Tower {
        let mut out = Self::zero(&self.gens);
        for (s, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let common: i64 = (0..self.gens.len()).filter(|i| (s & t) >> i & 1 == 1).map(|i| self.gens[i]).product();
                out.c[s ^ t] += a * b * BigRational::from_integer(common.into());
            }
        }
        out
    }

    // Split over the top generator: self = a + b·√d_top.
    fn split(&self) -> (Tower, Tower) {
        let k = self.gens.len() - 1;
        let half = 1 << k;
        let lower = &self.gens[..k];
        (Tower { gens: lower.to_vec(), c: self.c[..half].to_vec() }, Tower { gens: lower.to_vec(), c: self.c[half..].to_vec() })
    }

    fn join(a: &Tower, b: &Tower, d: i64) -> Tower {
        let mut gens = a.gens.clone();
        gens.push(d);
        Tower { gens, c: a.c.iter().chain(&b.c).cloned().collect() }
    }

    fn inverse(&self) -> Tower {
        if self.gens.is_empty() {
            return Tower::rational(&[], self.c[0].recip());
        }
        let d = *self.gens.last().unwrap();
        let (a, b) = self.split();
        let norm = a.mul(&a).add(&b.mul(&b).scale(&BigRational::from_integer((-d).into())));
        let inv = norm.inverse();
        Tower::join(&a.mul(&inv), &b.mul(&inv).scale(&-BigRational::one()), d)
    }

    fn sqrt(&self) -> Option<Tower> {
        if self.gens.is_empty() {
            let q = &self.c[0];
            if q.is_negative() {
                return None;
            }
            let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
            return (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Tower::rational(&[], BigRational::new(n, d)));
        }
        let d = *self.gens.last().unwrap();
        let dq = BigRational::from_integer(d.into());
        let (a, b) = self.split();
        let zero = Tower::zero(&a.gens);
        if b.is_zero() {
            if let Some(r) = a.sqrt() {
                return Some(Tower::join(&r, &zero, d));
            }
            return a.scale(&dq.recip()).sqrt().map(|s| Tower::join(&zero, &s, d));
        }
        let norm = a.mul(&a).add(&b.mul(&b).scale(&-dq.clone()));
        let n = norm.sqrt()?;
        let half = BigRational::new(1.into(), 2.into());
        for sign in [1i64, -1] {
            let c2 = a.add(&n.scale(&BigRational::from_integer(sign.into()))).scale(&half);
            if c2.is_zero() {
                continue;
            }
            if let Some(c) = c2.sqrt() {
                let e = b.mul(&c.scale(&BigRational::from_integer(2.into())).inverse());
                let root = Tower::join(&c, &e, d);
                if root.mul(&root) == *self {
                    return Some(root);
                }
            }
        }
        None
    }

    fn to_mq(&self, field: &Arc<MQField>) -> MQElement {
        let mut out = MQElement::zero(field);
        for (s, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let prod: u64 = (0..self.gens.len()).filter(|i| s >> i & 1 == 1).map(|i| self.gens[i] as u64).product();
            out = out.checked_add(&MQElement::sqrt_of(field, prod).unwrap().scale(c)).unwrap();
        }
        out
    }
}

const FIELDS: &[&[i64]] = &[&[], &[2], &[5], &[13], &[2, 5], &[3, 5], &[6, 10], &[5, 13], &[2, 3, 5], &[2, 5, 13], &[3, 7, 11], &[2, 3, 5, 7]];

fn tower_strategy() -> impl Strategy<Value = Tower> {
    (0..FIELDS.len()).prop_flat_map(|i| {
        let gens = FIELDS[i].to_vec();
        let n = 1usize << gens.len();
        proptest::collection::vec((-6i64..=6, 1i64..=4), n).prop_map(move |cs| Tower {
            gens: gens.clone(),
            c: cs.into_iter().map(|(a, b)| BigRational::new(a.into(), b.into())).collect(),
        })
    })
}

fn field_of(t: &Tower) -> Arc<MQField> {
    MQField::new(&t.gens.iter().map(|&d| d as u64).collect::<Vec<_>>()).unwrap()
}

fn cfg() -> SquareConfig {
    SquareConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn squares_are_recognised(y in tower_strategy()) {
        prop_assume!(!y.is_zero());
        let field = field_of(&y);
        let x = y.mul(&y).to_mq(&field);
        let root = x.is_square(&cfg()).unwrap().expect("y² is a square");
        prop_assert_eq!(root.square(), x);
        let y = y.to_mq(&field);
        prop_assert!(root == y || root == y.neg());
        prop_assert!(root.embed_mask(0, 64).is_positive());
    }

    #[test]
    fn agrees_with_descent(x in tower_strategy(), q in 1i64..=12) {
        prop_assume!(!x.is_zero());
        // Mix in a rational factor so that some inputs are squares in a nontrivial way.
        let x = x.mul(&x).scale(&BigRational::from_integer(q.into()));
        let field = field_of(&x);
        let descent = x.sqrt();
        let verdict = x.to_mq(&field).is_square(&cfg()).unwrap();
        prop_assert_eq!(descent.is_some(), verdict.is_some(), "x = {:?}", x.c);
        if let (Some(a), Some(b)) = (descent, verdict) {
            let a = a.to_mq(&field);
            prop_assert!(b == a || b == a.neg());
        }
    }

    #[test]
    fn random_elements_agree_with_descent(x in tower_strategy()) {
        prop_assume!(!x.is_zero());
        let field = field_of(&x);
        prop_assert_eq!(x.sqrt().is_some(), x.to_mq(&field).is_square(&cfg()).unwrap().is_some());
    }
}

// √m as a tower element, for m whose square class is a product of generators.
fn tower_sqrt(gens: &[i64], m: u64) -> Tower {
    let mut t = Tower::zero(gens);
    for s in 0..1usize << gens.len() {
        let prod = (0..gens.len()).filter(|i| s >> i & 1 == 1).map(|i| gens[i] as u64).product::<u64>();
        if prod % m == 0 && (prod / m).sqrt().pow(2) == prod / m {
            t.c[s] = BigRational::new(1.into(), ((prod / m).sqrt() as i64).into());
            return t;
        }
    }
    panic!("√{m} is not in the tower {gens:?}");
}

#[test]
fn unit_products_against_descent() {
    let cases: &[(&[i64], &[u64])] = &[
        (&[5, 13], &[5, 13, 65]),
        (&[2, 5], &[2, 5, 10]),
        (&[2, 5], &[2, 5]),
        (&[2, 3, 5], &[15]),
        (&[2, 3], &[3]),
        (&[10, 26], &[10, 65, 26]),
        (&[2, 5, 13], &[10, 13, 130]),
        (&[2, 5, 13], &[2, 65, 130]),
    ];
    for &(gens, units) in cases {
        let mut x = Tower::rational(gens, BigRational::one());
        for &m in units {
            let u = fundamental_unit(m).unwrap();
            let den = BigInt::from(u.den);
            let eps = Tower::rational(gens, BigRational::new(BigInt::from(u.x.clone()), den.clone()))
                .add(&tower_sqrt(gens, m).scale(&BigRational::new(BigInt::from(u.y.clone()), den)));
            let field = field_of(&eps);
            assert_eq!(eps.to_mq(&field), MQElement::from_unit(&field, &u).unwrap());
            x = x.mul(&eps);
        }
        let field = field_of(&x);
        let verdict = x.to_mq(&field).square_root(&cfg()).unwrap();
        let descent = x.sqrt();
        match verdict {
            SquareVerdict::Square(r) => {
                let a = descent.expect("descent finds the root").to_mq(&field);
                assert!(r == a || r == a.neg(), "{gens:?} {units:?}");
            }
            SquareVerdict::NotSquare(o) => assert!(descent.is_none(), "{gens:?} {units:?}: {o:?}"),
        }
    }
}
