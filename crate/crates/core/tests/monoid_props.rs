//! Monoid laws and truncated subtraction on random rationals.

use homog::monoid::{Dist, MonoidKind, MonoidSpec};
use homog::rational::Rat;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-30i64..=60, 1i64..=12).prop_map(|(p, q)| Rat::new(p, q))
}

fn kind() -> impl Strategy<Value = MonoidKind> {
    prop::sample::select(MonoidKind::ALL.to_vec())
}

/// A raw candidate of the right shape; callers filter by the carrier.
fn raw(kind: MonoidKind) -> BoxedStrategy<Dist> {
    if kind == MonoidKind::LexPairRationals {
        (rat(), rat()).prop_map(|(a, b)| Dist::Pair(a, b)).boxed()
    } else {
        rat().prop_map(Dist::Scalar).boxed()
    }
}

fn elems(n: usize) -> impl Strategy<Value = (MonoidSpec, Vec<Dist>)> {
    kind().prop_flat_map(move |k| {
        let m = MonoidSpec::new(k);
        let mc = m.clone();
        (Just(m), prop::collection::vec(raw(k).prop_filter("in carrier", move |d| mc.in_carrier(d)), n))
    })
}

/// Closed forms, written per kind rather than through ⊕.
fn expected_minus(m: &MonoidSpec, r: &Dist, s: &Dist) -> Dist {
    if r <= s {
        return m.zero();
    }
    match (m.kind, r, s) {
        (MonoidKind::UltrametricRationals, _, _) => r.clone(),
        (_, Dist::Scalar(a), Dist::Scalar(b)) => Dist::Scalar(a - b),
        (_, Dist::Pair(a1, a2), Dist::Pair(b1, b2)) => Dist::Pair(a1 - b1, a2 - b2),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn plus_is_a_commutative_monoid((m, v) in elems(3)) {
        let (r, s, t) = (&v[0], &v[1], &v[2]);
        prop_assert_eq!(m.sum(r, s), m.sum(s, r));
        prop_assert_eq!(m.sum(&m.sum(r, s), t), m.sum(r, &m.sum(s, t)));
        prop_assert_eq!(&m.sum(r, &m.zero()), r);
        prop_assert!(m.in_carrier(&m.sum(r, s)));
        prop_assert!(r <= &m.sum(r, s));
    }

    #[test]
    fn plus_is_monotone((m, v) in elems(3)) {
        let (r, s, t) = (&v[0], &v[1], &v[2]);
        if r <= s {
            prop_assert!(m.sum(r, t) <= m.sum(s, t));
        }
    }

    #[test]
    fn minus_matches_closed_form((m, v) in elems(2)) {
        let (r, s) = if v[0] >= v[1] { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
        prop_assert_eq!(m.minus(r, s).unwrap(), expected_minus(&m, r, s));
    }

    #[test]
    fn minus_residuation((m, v) in elems(4)) {
        let (r, s) = if v[0] >= v[1] { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
        let rs = m.minus(r, s).unwrap();
        let t = &v[2];
        prop_assert_eq!(&rs <= t, r <= &m.sum(s, t));
        let tu = m.sum(t, &v[3]);
        if s <= &tu {
            prop_assert!(r <= &m.sum(&tu, &rs));
        }
    }

    #[test]
    fn minus_rejects_larger_subtrahend((m, v) in elems(2)) {
        if v[0] < v[1] {
            prop_assert!(m.minus(&v[0], &v[1]).is_err());
        }
    }

    #[test]
    fn standard_gap_fits((m, v) in elems(2)) {
        let (r, s) = if v[0] >= v[1] { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
        if s < r {
            let t = m.standard_gap(r, s).unwrap();
            prop_assert!(!t.is_zero());
            prop_assert!(m.in_carrier(&t));
            prop_assert!(&m.sum(s, &t) < r);
        }
    }

    #[test]
    fn dist_json_round_trip((_m, v) in elems(1)) {
        let text = serde_json::to_string(&v[0]).unwrap();
        let back: Dist = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, v[0].clone());
    }
}
