//! Closure, orbits and independence on random small configurations.

use homog::indep::{absorb, absorbing_config_check, alg_indep};
use homog::oligo::oracle::{brute_acl, raw_partial_iso};
use homog::oligo::ops::sim_class;
use homog::oligo::{Elem, ElemSet, Kind, Structure, Subuniverse};
use homog::rng::rng;
use proptest::prelude::*;
use rand::Rng as _;

fn fixtures() -> Vec<(Kind, u64)> {
    vec![
        (Kind::PureSet, 10),
        (Kind::DenseOrder, 10),
        (Kind::VecFq { q: 2 }, 4),
        (Kind::VecFq { q: 3 }, 3),
        (Kind::AffineFq { q: 2 }, 4),
        (Kind::CopiesKn { n: 3 }, 4),
        (Kind::RandomGraph, 12),
        (Kind::RandomBipartite, 12),
    ]
}

fn structure() -> impl Strategy<Value = Structure> {
    (prop::sample::select(fixtures()), 0u64..4).prop_map(|((k, n), seed)| Structure::with_size(k, n, seed).unwrap())
}

fn pick(s: &Structure, r: &mut homog::rng::Rng, k: usize) -> Vec<Elem> {
    (0..k).map(|_| r.gen_range(0..s.len())).collect()
}

fn set(t: &[Elem]) -> ElemSet {
    t.iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn acl_is_a_finite_closure(s in structure(), seed in any::<u64>(), ka in 0usize..3, kb in 0usize..2) {
        let mut r = rng(seed);
        let a = set(&pick(&s, &mut r, ka));
        let b: ElemSet = a.iter().copied().chain(pick(&s, &mut r, kb)).collect();
        let (ca, cb) = (s.acl(&a), s.acl(&b));
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&cb));
        prop_assert_eq!(&s.acl(&ca), &ca);
        prop_assert!(ca.iter().all(|&x| s.contains(x)));
        let cl = s.closure(&a);
        for x in s.elements() {
            prop_assert_eq!(cl.contains(&s, x), ca.contains(&x), "x = {}", x);
        }
    }

    #[test]
    fn orbit_eq_is_the_quantifier_free_type(s in structure(), seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let u = pick(&s, &mut r, k);
        let v = pick(&s, &mut r, k);
        prop_assert_eq!(s.orbit_eq(&u, &v).unwrap(), raw_partial_iso(&s, &u, &v));
        prop_assert!(s.orbit_eq(&u, &u).unwrap());
        prop_assert_eq!(s.orbit_eq(&u, &v).unwrap(), s.orbit_eq(&v, &u).unwrap());
        if let Some(g) = s.random_stabilizer_element(&ElemSet::new(), &mut r) {
            if let Some(gu) = g.map_tuple(&u) {
                prop_assert!(s.orbit_eq(&u, &gu).unwrap());
                let w = pick(&s, &mut r, k);
                // transitivity through gu
                prop_assert_eq!(s.orbit_eq(&gu, &w).unwrap(), s.orbit_eq(&u, &w).unwrap());
            }
        }
    }

    #[test]
    fn extended_automorphisms_keep_orbits(s in structure(), seed in any::<u64>(), k in 1usize..3) {
        let mut s = s;
        let mut r = rng(seed);
        let u = pick(&s, &mut r, k);
        let Some(g) = s.random_stabilizer_element(&ElemSet::new(), &mut r) else { return Ok(()) };
        let Some(v) = g.map_tuple(&u) else { return Ok(()) };
        let phi = homog::oligo::PartialMap::from_pairs(u.iter().copied().zip(v.iter().copied())).unwrap();
        let x = r.gen_range(0..s.len());
        let psi = s.extend_automorphism(&phi, x, 1_000_000).unwrap();
        let mut ux = u.clone();
        ux.push(x);
        let vx = psi.map_tuple(&ux).unwrap();
        prop_assert!(s.orbit_eq(&ux, &vx).unwrap());
    }

    #[test]
    fn sim_classes_are_symmetric(s in structure(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = r.gen_range(0..s.len());
        for b in sim_class(&s, a) {
            prop_assert!(sim_class(&s, b).contains(&a));
        }
    }
}

fn small() -> impl Strategy<Value = Structure> {
    let kinds = vec![(Kind::PureSet, 7), (Kind::VecFq { q: 2 }, 3), (Kind::CopiesKn { n: 3 }, 3), (Kind::DenseOrder, 7)];
    prop::sample::select(kinds).prop_map(|(k, n)| Structure::with_size(k, n, 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Formula closure inside alg_indep against orbit-counting closure.
    #[test]
    fn alg_indep_matches_brute_closures(s in small(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let kc = r.gen_range(0..2);
        let (a, b, c) = (set(&pick(&s, &mut r, 1)), set(&pick(&s, &mut r, 1)), set(&pick(&s, &mut r, kc)));
        let ac: ElemSet = a.union(&c).copied().collect();
        let bc: ElemSet = b.union(&c).copied().collect();
        let lhs: ElemSet = brute_acl(&s, &ac).intersection(&brute_acl(&s, &bc)).copied().collect();
        prop_assert_eq!(alg_indep(&s, &a, &b, &c), lhs == brute_acl(&s, &c));
        prop_assert_eq!(alg_indep(&s, &a, &b, &c), alg_indep(&s, &b, &a, &c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Whenever (a1; a2; b) is absorbing, absorb moves a2 so that it meets
    /// the even span exactly in the image of a1, over b.
    #[test]
    fn absorb_meets_both_postconditions(seed in any::<u64>()) {
        let mut s = Structure::with_size(Kind::VecFq { q: 2 }, 5, 0).unwrap();
        let omega = Subuniverse::EvenSpan;
        let mut r = rng(seed);
        let even: Vec<Elem> = s.elements().filter(|&e| omega.contains(&s, e)).collect();
        let a1: Vec<Elem> = s.acl_of(&[even[r.gen_range(0..even.len())]]).into_iter().collect();
        let mut a2v = a1.clone();
        a2v.push(r.gen_range(0..s.len()));
        let a2: Vec<Elem> = s.acl_of(&a2v).into_iter().collect();
        let b: Vec<Elem> = s.acl_of(&[r.gen_range(0..s.len())]).into_iter().collect();
        prop_assume!(absorbing_config_check(&s, &omega, &a1, &a2, &b).unwrap());
        let (a1p, a2p) = absorb(&mut s, &omega, &a1, &a2, &b, 1_000_000).unwrap();
        let mut before = a1.clone();
        before.extend(&a2);
        before.extend(&b);
        let mut after = a1p.clone();
        after.extend(&a2p);
        after.extend(&b);
        prop_assert!(raw_partial_iso(&s, &before, &after));
        prop_assert_eq!(omega.filter(&s, &set(&a2p)), set(&a1p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seeded_reports_are_reproducible(seed in any::<u64>()) {
        use homog::indep::{axiom_suite, IndepRelation};
        use homog::report::Report;
        let s = Structure::new(Kind::VecFq { q: 2 }, 0).unwrap();
        let run = || Report::new(seed, axiom_suite(&s, IndepRelation::Algebraic, 15, seed)).to_json_string();
        prop_assert_eq!(run(), run());
    }
}
