//! Exact rationals with an `i64` fast path.
//!
//! Values live in `Ratio<i64>` until an operation overflows, at which point
//! they move to `BigRational`. Results that fit back into `i64` are demoted,
//! so every value has exactly one representation and the derived-by-hand
//! `Eq`/`Hash` below stay consistent.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
pub enum Rat {
    Small(Ratio<i64>),
    Big(Box<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRatError(pub String);

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Rat {
        assert!(denom != 0, "zero denominator");
        Rat::Small(Ratio::new(numer, denom))
    }

    pub fn int(n: i64) -> Rat {
        Rat::Small(Ratio::from_integer(n))
    }

    pub fn zero() -> Rat {
        Rat::int(0)
    }

    pub fn one() -> Rat {
        Rat::int(1)
    }

    fn from_big(b: BigRational) -> Rat {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(Ratio::new_raw(n, d)),
            _ => Rat::Big(Box::new(b)),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Rat::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_zero(),
            Rat::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_negative(),
            Rat::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_integer(),
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Numerator and denominator when both fit in `i64`.
    pub fn as_small(&self) -> Option<(i64, i64)> {
        match self {
            Rat::Small(r) => Some((*r.numer(), *r.denom())),
            Rat::Big(_) => None,
        }
    }

    /// max(|numerator|, denominator), saturating; used as a "grid level".
    pub fn height(&self) -> u64 {
        match self {
            Rat::Small(r) => r.numer().unsigned_abs().max(r.denom().unsigned_abs()),
            Rat::Big(_) => u64::MAX,
        }
    }

    /// True when the reduced denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        match self {
            Rat::Small(r) => (*r.denom() as u64).is_power_of_two(),
            Rat::Big(b) => {
                let d = b.denom();
                d.trailing_zeros().map(|tz| (d >> tz) == BigInt::one()).unwrap_or(false)
            }
        }
    }

    pub fn half(&self) -> Rat {
        self.clone() / Rat::int(2)
    }

    pub fn floor(&self) -> Rat {
        match self {
            Rat::Small(r) => Rat::Small(r.floor()),
            Rat::Big(b) => Rat::from_big(b.floor()),
        }
    }
}

macro_rules! checked_op {
    ($trait:ident, $method:ident, $checked:ident, $op:tt) => {
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                if let (Rat::Small(a), Rat::Small(b)) = (self, rhs) {
                    if let Some(r) = a.$checked(b) {
                        return Rat::Small(r);
                    }
                }
                Rat::from_big(self.to_big() $op rhs.to_big())
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
    };
}

checked_op!(Add, add, checked_add, +);
checked_op!(Sub, sub, checked_sub, -);
checked_op!(Mul, mul, checked_mul, *);
checked_op!(Div, div, checked_div, /);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(r) if *r.numer() != i64::MIN => Rat::Small(-r),
            other => Rat::from_big(-other.to_big()),
        }
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (self, other) {
            (Rat::Small(a), Rat::Small(b)) => {
                // denominators are positive after reduction
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Rat::Big(b) => {
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(r) => write!(f, "{}", r),
            Rat::Big(b) => write!(f, "{}", b),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::int(n)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `p`, `p/q` and finite decimals such as `0.7`.
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Rat::from_big(BigRational::new(p, q)));
        }
        if let Some((whole, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let neg = whole.starts_with('-');
            let w: BigInt = if whole.is_empty() || whole == "-" {
                BigInt::zero()
            } else {
                whole.parse().map_err(|_| err())?
            };
            let f: BigInt = frac.parse().map_err(|_| err())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let mag = BigRational::new(w.abs() * &scale + f, scale);
            return Ok(Rat::from_big(if neg { -mag } else { mag }));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rat::from_big(BigRational::from_integer(n)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("3/6".parse::<Rat>().unwrap(), Rat::new(1, 2));
        assert_eq!("0.7".parse::<Rat>().unwrap(), Rat::new(7, 10));
        assert_eq!("-1.25".parse::<Rat>().unwrap(), Rat::new(-5, 4));
        assert_eq!("4".parse::<Rat>().unwrap(), Rat::int(4));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::int(i64::MAX);
        let s = &big + &Rat::one();
        assert!(matches!(s, Rat::Big(_)));
        let back = &s - &Rat::one();
        assert!(matches!(back, Rat::Small(_)));
        assert_eq!(back, big);
        assert!(s > big);
    }

    #[test]
    fn display_round_trip() {
        for r in [Rat::new(5, 3), Rat::int(2), Rat::new(-1, 7)] {
            assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
        }
    }

    #[test]
    fn dyadic() {
        assert!(Rat::new(3, 8).is_dyadic());
        assert!(Rat::int(5).is_dyadic());
        assert!(!Rat::new(1, 3).is_dyadic());
    }
}
