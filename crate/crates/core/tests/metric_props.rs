//! Amalgams, one-point extensions, the Urysohn generator and the
//! pinching/spreading recursions on random inputs.

use homog::metric::{amalgam, check_katetov, check_partial_isometry, extend_one_point, validate_space, ExtensionRequest, PartialIsometry, PointId, Space};
use homog::monoid::{Dist, MonoidKind, MonoidSpec};
use homog::report::Status;
use homog::rng::rng;
use homog::suite::{pinch_check, random_extension, spread_check};
use homog::urysohn::Generator;
use proptest::prelude::*;
use rand::Rng as _;

fn kind() -> impl Strategy<Value = MonoidKind> {
    prop::sample::select(MonoidKind::ALL.to_vec())
}

fn nonzero_grid(m: &MonoidSpec) -> Vec<Dist> {
    m.grid(4).into_iter().filter(|d| !d.is_zero()).collect()
}

fn random_space(m: &MonoidSpec, n: usize, seed: u64) -> Space {
    let one = Space::from_fn(m.clone(), 1, |_, _| m.zero());
    random_extension(&one, n - 1, &nonzero_grid(m), &mut rng(seed))
}

/// Random A, and B sharing A's first `c` points.
fn glued(m: &MonoidSpec, na: usize, nb: usize, c: usize, seed: u64) -> (Space, Space, Vec<PointId>) {
    let a = random_space(m, na, seed);
    let c_ids: Vec<PointId> = a.points()[..c].to_vec();
    let b = random_extension(&a.restrict(&c_ids).unwrap(), nb.saturating_sub(c), &nonzero_grid(m), &mut rng(seed ^ 0xb));
    (a, b, c_ids)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn amalgam_is_valid_and_uses_the_path_formula(k in kind(), na in 1usize..=8, nb in 1usize..=8, c in 1usize..=3, seed in any::<u64>()) {
        let m = MonoidSpec::new(k);
        let c = c.min(na).min(nb);
        let (a, b, c_ids) = glued(&m, na, nb, c, seed);
        let am = amalgam(&a, &b, &PartialIsometry::identity(&c_ids)).unwrap();
        prop_assert!(validate_space(&am.space).is_ok());
        prop_assert_eq!(am.space.len(), na + nb - c);
        // cross distances: the shortest route through the glue
        for &x in a.points() {
            for &y in b.points().iter().filter(|y| !c_ids.contains(y)) {
                let via = c_ids.iter().map(|&z| m.sum(a.d(x, z), b.d(z, y))).min().unwrap();
                prop_assert_eq!(am.space.d(x, am.right[&y]), &via);
            }
        }
    }

    #[test]
    fn amalgam_is_symmetric(k in kind(), na in 1usize..=6, nb in 1usize..=6, c in 1usize..=3, seed in any::<u64>()) {
        let m = MonoidSpec::new(k);
        let c = c.min(na).min(nb);
        let (a, b, c_ids) = glued(&m, na, nb, c, seed);
        let glue = PartialIsometry::identity(&c_ids);
        let ab = amalgam(&a, &b, &glue).unwrap();
        let ba = amalgam(&b, &a, &glue).unwrap();
        // where each original point of A and B landed in either amalgam
        let in_ab = |from_a: bool, p: PointId| if from_a { p } else { ab.right[&p] };
        let in_ba = |from_a: bool, p: PointId| if from_a { ba.right[&p] } else { p };
        let all: Vec<(bool, PointId)> = a.points().iter().map(|&p| (true, p)).chain(b.points().iter().map(|&p| (false, p))).collect();
        for &(fx, x) in &all {
            for &(fy, y) in &all {
                prop_assert_eq!(ab.space.d(in_ab(fx, x), in_ab(fy, y)), ba.space.d(in_ba(fx, x), in_ba(fy, y)));
            }
        }
    }

    #[test]
    fn katetov_extensions_stay_valid(k in kind(), n in 1usize..=7, seed in any::<u64>()) {
        let m = MonoidSpec::new(k);
        let s = random_space(&m, n, seed);
        let grid = nonzero_grid(&m);
        let mut r = rng(seed ^ 1);
        let req = ExtensionRequest::new(s.points().iter().map(|&p| (p, grid[r.gen_range(0..grid.len())].clone())).collect());
        match check_katetov(&s, &req).unwrap() {
            Ok(()) => {
                let (t, p) = extend_one_point(&s, &req).unwrap();
                prop_assert!(validate_space(&t).is_ok());
                for (z, d) in &req.base {
                    prop_assert_eq!(t.d(p, *z), d);
                }
            }
            Err(_) => prop_assert!(extend_one_point(&s, &req).is_err()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_prefixes_are_valid_and_reproducible(k in kind(), steps in 1u64..120) {
        let run = || {
            let mut g = Generator::new(MonoidSpec::new(k));
            for _ in 0..steps {
                g.step();
                assert!(validate_space(g.space()).is_ok());
            }
            g.to_json()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn partial_isometries_extend_over_the_first_ten(k in kind(), seed in any::<u64>(), size in 1usize..=4) {
        let mut g = Generator::with_points(MonoidSpec::new(k), 10);
        let first: Vec<PointId> = (0..10).map(PointId).collect();
        let mut r = rng(seed);
        let mut dom = first.clone();
        rand::seq::SliceRandom::shuffle(&mut dom[..], &mut r);
        dom.truncate(size);
        // every isometric copy of dom inside the first ten, by brute force
        let mut copies = Vec::new();
        let mut stack: Vec<Vec<PointId>> = vec![Vec::new()];
        while let Some(t) = stack.pop() {
            if t.len() == size {
                copies.push(t);
                continue;
            }
            let i = t.len();
            for &y in &first {
                if !t.contains(&y) && t.iter().enumerate().all(|(j, &z)| g.d(y, z) == g.d(dom[i], dom[j])) {
                    let mut u = t.clone();
                    u.push(y);
                    stack.push(u);
                }
            }
        }
        prop_assert!(!copies.is_empty());
        let img = copies[r.gen_range(0..copies.len())].clone();
        let mut phi = PartialIsometry::from_pairs(dom.iter().copied().zip(img));
        for &x in &first {
            if phi.get(x).is_none() {
                g.extend_partial_isometry(&mut phi, x).unwrap();
            }
        }
        prop_assert_eq!(phi.len(), 10);
        prop_assert!(matches!(check_partial_isometry(&phi, g.space(), g.space()), Ok(Ok(()))));
    }

    #[test]
    fn pinch_and_spread_invariants(bounded in any::<bool>(), p in 1i64..=8, q in 1i64..=4, advances in 1usize..25) {
        let m = MonoidSpec::new(if bounded { MonoidKind::TruncatedUnitRationals } else { MonoidKind::RationalsNonneg });
        let eps = Dist::frac(p, q);
        prop_assume!(m.in_carrier(&eps));
        prop_assert_eq!(pinch_check(&m, &eps, advances).status, Status::Ok);
        prop_assert_eq!(spread_check(&m, &eps, advances).status, Status::Ok);
    }
}
