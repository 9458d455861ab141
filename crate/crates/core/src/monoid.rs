//! Countable distance monoids with exact arithmetic.
//!
//! Four kinds are shipped: non-negative rationals under addition, rationals in
//! `[0, top]` under truncated addition, pairs of rationals ordered
//! lexicographically under componentwise addition, and non-negative rationals
//! under `max`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MonoidKind {
    #[serde(rename = "q_nonneg")]
    RationalsNonneg,
    #[serde(rename = "q_unit_trunc")]
    TruncatedUnitRationals,
    #[serde(rename = "q_lex2")]
    LexPairRationals,
    #[serde(rename = "q_ultra")]
    UltrametricRationals,
}

impl MonoidKind {
    pub const ALL: [MonoidKind; 4] = [
        MonoidKind::RationalsNonneg,
        MonoidKind::TruncatedUnitRationals,
        MonoidKind::LexPairRationals,
        MonoidKind::UltrametricRationals,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MonoidKind::RationalsNonneg => "q_nonneg",
            MonoidKind::TruncatedUnitRationals => "q_unit_trunc",
            MonoidKind::LexPairRationals => "q_lex2",
            MonoidKind::UltrametricRationals => "q_ultra",
        }
    }
}

impl fmt::Display for MonoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MonoidKind {
    type Err = MonoidError;
    fn from_str(s: &str) -> Result<Self, MonoidError> {
        MonoidKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| MonoidError::UnknownKind(s.to_string()))
    }
}

/// A distance. Scalar for three kinds, a pair for the lex kind.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dist {
    Scalar(Rat),
    Pair(Rat, Rat),
}

impl Dist {
    pub fn int(n: i64) -> Dist {
        Dist::Scalar(Rat::int(n))
    }

    pub fn frac(p: i64, q: i64) -> Dist {
        Dist::Scalar(Rat::new(p, q))
    }

    pub fn pair(a: Rat, b: Rat) -> Dist {
        Dist::Pair(a, b)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Dist::Scalar(r) => r.is_zero(),
            Dist::Pair(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    pub fn scalar(&self) -> Option<&Rat> {
        match self {
            Dist::Scalar(r) => Some(r),
            Dist::Pair(..) => None,
        }
    }

    /// Grid level: the largest numerator/denominator magnitude involved.
    pub fn level(&self) -> u64 {
        match self {
            Dist::Scalar(r) => r.height(),
            Dist::Pair(a, b) => a.height().max(b.height()),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Scalar(r) => write!(f, "{}", r),
            Dist::Pair(a, b) => write!(f, "({}, {})", a, b),
        }
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Dist::Scalar(r) => r.serialize(s),
            Dist::Pair(a, b) => (a, b).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Dist, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(Rat),
            Two(Rat, Rat),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::One(r) => Dist::Scalar(r),
            Raw::Two(a, b) => Dist::Pair(a, b),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonoidError {
    #[error("unknown monoid kind {0:?}")]
    UnknownKind(String),
    #[error("invalid bound {0}")]
    InvalidBound(String),
    #[error("{0} is not in the carrier of {1}")]
    CarrierMismatch(Dist, MonoidKind),
    #[error("minus({r}, {s}) needs s <= r")]
    OrderViolation { r: Dist, s: Dist },
    #[error("no standard gap for r={r}, s={s}")]
    NotStandardInstance { r: Dist, s: Dist },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonoidSpec {
    pub kind: MonoidKind,
    pub top: Option<Dist>,
    pub metrically_complete: bool,
    pub standard: bool,
    pub ultrametric: bool,
}

/// Build a monoid. `bound` is only meaningful for the truncated kind and
/// defaults to 1 there.
pub fn make_monoid(kind: MonoidKind, bound: Option<Rat>) -> Result<MonoidSpec, MonoidError> {
    let top = match (kind, bound) {
        (MonoidKind::TruncatedUnitRationals, b) => {
            let b = b.unwrap_or_else(Rat::one);
            if b <= Rat::zero() {
                return Err(MonoidError::InvalidBound(b.to_string()));
            }
            Some(Dist::Scalar(b))
        }
        (_, Some(b)) => return Err(MonoidError::InvalidBound(format!("{b} (kind {kind} is unbounded)"))),
        (_, None) => None,
    };
    Ok(MonoidSpec {
        kind,
        top,
        metrically_complete: true,
        standard: true,
        ultrametric: kind == MonoidKind::UltrametricRationals,
    })
}

impl MonoidSpec {
    pub fn new(kind: MonoidKind) -> MonoidSpec {
        make_monoid(kind, None).expect("default parameters are valid")
    }

    pub fn zero(&self) -> Dist {
        match self.kind {
            MonoidKind::LexPairRationals => Dist::Pair(Rat::zero(), Rat::zero()),
            _ => Dist::Scalar(Rat::zero()),
        }
    }

    pub fn in_carrier(&self, r: &Dist) -> bool {
        match (self.kind, r) {
            (MonoidKind::LexPairRationals, Dist::Pair(a, b)) => {
                !a.is_negative() && (!a.is_zero() || !b.is_negative())
            }
            (MonoidKind::LexPairRationals, Dist::Scalar(_)) => false,
            (_, Dist::Pair(..)) => false,
            (_, Dist::Scalar(x)) => {
                !x.is_negative() && self.top.as_ref().is_none_or(|t| r <= t)
            }
        }
    }

    fn check(&self, r: &Dist) -> Result<(), MonoidError> {
        if self.in_carrier(r) {
            Ok(())
        } else {
            Err(MonoidError::CarrierMismatch(r.clone(), self.kind))
        }
    }

    pub fn plus(&self, r: &Dist, s: &Dist) -> Result<Dist, MonoidError> {
        self.check(r)?;
        self.check(s)?;
        Ok(self.sum(r, s))
    }

    /// `r ⊕ s` without carrier checks.
    pub fn sum(&self, r: &Dist, s: &Dist) -> Dist {
        match (r, s) {
            (Dist::Scalar(a), Dist::Scalar(b)) => match self.kind {
                MonoidKind::UltrametricRationals => Dist::Scalar(a.max(b).clone()),
                _ => {
                    let t = Dist::Scalar(a + b);
                    match &self.top {
                        Some(top) if &t > top => top.clone(),
                        _ => t,
                    }
                }
            },
            (Dist::Pair(a1, a2), Dist::Pair(b1, b2)) => Dist::Pair(a1 + b1, a2 + b2),
            _ => panic!("mixed distance shapes: {r} and {s}"),
        }
    }

    pub fn minus(&self, r: &Dist, s: &Dist) -> Result<Dist, MonoidError> {
        self.check(r)?;
        self.check(s)?;
        if s > r {
            return Err(MonoidError::OrderViolation { r: r.clone(), s: s.clone() });
        }
        Ok(self.residual(r, s))
    }

    /// `r ⊖ s`: the least `t` with `r ≤ s ⊕ t`, for `s ≤ r`. Outside that
    /// range the value is clamped to zero (every `t` works).
    pub fn residual(&self, r: &Dist, s: &Dist) -> Dist {
        if s >= r {
            return self.zero();
        }
        match (r, s) {
            (Dist::Scalar(a), Dist::Scalar(b)) => match self.kind {
                // max(s, t) ≥ r with s < r forces t ≥ r
                MonoidKind::UltrametricRationals => Dist::Scalar(a.clone()),
                _ => Dist::Scalar(a - b),
            },
            // the lex order on ℚ×ℚ is a group order, so the difference is exact
            (Dist::Pair(a1, a2), Dist::Pair(b1, b2)) => Dist::Pair(a1 - b1, a2 - b2),
            _ => panic!("mixed distance shapes: {r} and {s}"),
        }
    }

    /// A nonzero `t` with `s ⊕ t < r`, for `r ≠ 0` and `s < r`.
    pub fn standard_gap(&self, r: &Dist, s: &Dist) -> Result<Dist, MonoidError> {
        self.check(r)?;
        self.check(s)?;
        if r.is_zero() || s >= r {
            return Err(MonoidError::NotStandardInstance { r: r.clone(), s: s.clone() });
        }
        let t = match (r, s) {
            (Dist::Scalar(a), Dist::Scalar(b)) => match self.kind {
                MonoidKind::UltrametricRationals if !b.is_zero() => Dist::Scalar((a + b).half()),
                MonoidKind::UltrametricRationals => Dist::Scalar(a.half()),
                _ => Dist::Scalar((a - b).half()),
            },
            (Dist::Pair(a1, a2), Dist::Pair(b1, b2)) => Dist::Pair((a1 - b1).half(), (a2 - b2).half()),
            _ => panic!("mixed distance shapes: {r} and {s}"),
        };
        debug_assert!(!t.is_zero() && &self.sum(s, &t) < r);
        Ok(t)
    }

    pub fn max<'a>(&self, r: &'a Dist, s: &'a Dist) -> &'a Dist {
        if r >= s {
            r
        } else {
            s
        }
    }

    /// Parse a distance of the right shape for this monoid: `p/q` for scalar
    /// kinds, `p/q,p/q` for the lex kind.
    pub fn parse_dist(&self, s: &str) -> Result<Dist, MonoidError> {
        let bad = || MonoidError::CarrierMismatch(Dist::int(0), self.kind);
        let d = if self.kind == MonoidKind::LexPairRationals {
            let (a, b) = s.split_once(',').ok_or_else(bad)?;
            Dist::Pair(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
        } else {
            Dist::Scalar(s.parse().map_err(|_| bad())?)
        };
        self.check(&d)?;
        Ok(d)
    }

    /// Rationals `p/q` with `0 ≤ p ≤ level`, `1 ≤ q ≤ level`, inside the carrier,
    /// sorted. For the lex kind, pairs whose components come from that grid
    /// (second component with either sign) and that are lex-nonnegative.
    pub fn grid(&self, level: u64) -> Vec<Dist> {
        let mut base = scalar_grid(level);
        if self.kind == MonoidKind::LexPairRationals {
            let mut signed: Vec<Rat> = base.iter().filter(|x| !x.is_zero()).map(|x| -x.clone()).collect();
            signed.extend(base.iter().cloned());
            signed.sort();
            let mut out = Vec::new();
            for a in &base {
                for b in &signed {
                    let d = Dist::Pair(a.clone(), b.clone());
                    if self.in_carrier(&d) {
                        out.push(d);
                    }
                }
            }
            out.sort();
            return out;
        }
        base.retain(|x| self.in_carrier(&Dist::Scalar(x.clone())));
        base.into_iter().map(Dist::Scalar).collect()
    }

    pub fn cmp(&self, r: &Dist, s: &Dist) -> Ordering {
        r.cmp(s)
    }
}

/// Sorted, deduplicated `{p/q : 0 ≤ p ≤ level, 1 ≤ q ≤ level}`.
pub fn scalar_grid(level: u64) -> Vec<Rat> {
    let level = level.max(1) as i64;
    let mut v: Vec<Rat> = (1..=level).flat_map(|q| (0..=level).map(move |p| Rat::new(p, q))).collect();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(kind: MonoidKind) -> MonoidSpec {
        MonoidSpec::new(kind)
    }

    #[test]
    fn make_monoid_flags() {
        let t = make_monoid(MonoidKind::TruncatedUnitRationals, None).unwrap();
        assert_eq!(t.top, Some(Dist::int(1)));
        assert!(t.metrically_complete && t.standard && !t.ultrametric);
        let q = make_monoid(MonoidKind::RationalsNonneg, None).unwrap();
        assert_eq!(q.top, None);
        assert!(q.metrically_complete && q.standard);
        assert!(make_monoid(MonoidKind::UltrametricRationals, None).unwrap().ultrametric);
        assert!(matches!(
            make_monoid(MonoidKind::TruncatedUnitRationals, Some(Rat::zero())),
            Err(MonoidError::InvalidBound(_))
        ));
        assert!(matches!("q_real".parse::<MonoidKind>(), Err(MonoidError::UnknownKind(_))));
    }

    #[test]
    fn plus_examples() {
        assert_eq!(m(MonoidKind::RationalsNonneg).plus(&Dist::int(2), &Dist::int(3)).unwrap(), Dist::int(5));
        let t = m(MonoidKind::TruncatedUnitRationals);
        assert_eq!(t.plus(&Dist::frac(7, 10), &Dist::frac(6, 10)).unwrap(), Dist::int(1));
        assert_eq!(m(MonoidKind::UltrametricRationals).plus(&Dist::int(3), &Dist::int(5)).unwrap(), Dist::int(5));
        assert!(matches!(t.plus(&Dist::int(2), &Dist::int(0)), Err(MonoidError::CarrierMismatch(..))));
    }

    #[test]
    fn minus_examples() {
        assert_eq!(m(MonoidKind::RationalsNonneg).minus(&Dist::int(5), &Dist::int(3)).unwrap(), Dist::int(2));
        let u = m(MonoidKind::UltrametricRationals);
        assert_eq!(u.minus(&Dist::int(3), &Dist::int(3)).unwrap(), Dist::int(0));
        assert_eq!(u.minus(&Dist::int(5), &Dist::int(3)).unwrap(), Dist::int(5));
        assert!(matches!(u.minus(&Dist::int(3), &Dist::int(5)), Err(MonoidError::OrderViolation { .. })));
    }

    #[test]
    fn standard_gap_examples() {
        assert_eq!(
            m(MonoidKind::RationalsNonneg).standard_gap(&Dist::int(1), &Dist::int(0)).unwrap(),
            Dist::frac(1, 2)
        );
        assert_eq!(
            m(MonoidKind::TruncatedUnitRationals).standard_gap(&Dist::int(1), &Dist::frac(9, 10)).unwrap(),
            Dist::frac(1, 20)
        );
        assert_eq!(
            m(MonoidKind::UltrametricRationals).standard_gap(&Dist::int(5), &Dist::int(3)).unwrap(),
            Dist::int(4)
        );
        let lex = m(MonoidKind::LexPairRationals);
        let r = Dist::Pair(Rat::one(), Rat::zero());
        let s = Dist::Pair(Rat::zero(), Rat::int(5));
        let t = lex.standard_gap(&r, &s).unwrap();
        assert!(lex.in_carrier(&t) && !t.is_zero() && lex.sum(&s, &t) < r);
    }

    #[test]
    fn grid_contents() {
        let g = m(MonoidKind::TruncatedUnitRationals).grid(2);
        assert_eq!(g, vec![Dist::int(0), Dist::frac(1, 2), Dist::int(1)]);
        let q = m(MonoidKind::RationalsNonneg).grid(2);
        assert_eq!(q, vec![Dist::int(0), Dist::frac(1, 2), Dist::int(1), Dist::int(2)]);
        let lex = m(MonoidKind::LexPairRationals).grid(1);
        // (0,0), (0,1), (1,-1), (1,0), (1,1)
        assert_eq!(lex.len(), 5);
        assert!(lex.iter().all(|d| m(MonoidKind::LexPairRationals).in_carrier(d)));
    }

    #[test]
    fn serde_shapes() {
        let d = Dist::frac(3, 4);
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"3/4\"");
        let p = Dist::Pair(Rat::one(), Rat::new(-1, 2));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[\"1\",\"-1/2\"]");
        assert_eq!(serde_json::from_str::<Dist>(&s).unwrap(), p);
        assert_eq!(serde_json::to_string(&MonoidKind::LexPairRationals).unwrap(), "\"q_lex2\"");
    }
}
