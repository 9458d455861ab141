//! Brute-force references for the formulaic answers of the structures.
//! Nothing here uses echelon forms or the acl formulas.

use super::{Elem, ElemSet, Kind, PartialMap, Structure};

fn coords(q: u64, dim: u32, mut e: u64) -> Vec<u64> {
    (0..dim)
        .map(|_| {
            let d = e % q;
            e /= q;
            d
        })
        .collect()
}

/// Is Σ c_i t_i zero, for every coefficient vector where it is zero on
/// the other side too? Enumerates all of 𝔽_q^k; `affine` restricts to
/// coefficient vectors summing to zero.
fn same_relations(q: u64, dim: u32, u: &[Elem], v: &[Elem], affine: bool) -> bool {
    let k = u.len() as u32;
    let total = q.pow(k);
    let zero_comb = |t: &[Elem], c: &[u64]| -> bool {
        let mut acc = vec![0u64; dim as usize];
        for (&e, &f) in t.iter().zip(c) {
            for (a, x) in acc.iter_mut().zip(coords(q, dim, e)) {
                *a = (*a + f * x) % q;
            }
        }
        acc.iter().all(|&a| a == 0)
    };
    (0..total).all(|n| {
        let c = coords(q, k, n);
        if affine && c.iter().sum::<u64>() % q != 0 {
            return true;
        }
        zero_comb(u, &c) == zero_comb(v, &c)
    })
}

/// Does `u_i ↦ v_i` preserve and reflect every basic relation?
pub fn raw_partial_iso(s: &Structure, u: &[Elem], v: &[Elem]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let k = u.len();
    let pairs_agree = |f: &dyn Fn(Elem, Elem) -> bool| {
        (0..k).all(|i| (0..k).all(|j| f(u[i], u[j]) == f(v[i], v[j])))
    };
    if !pairs_agree(&|a, b| a == b) {
        return false;
    }
    match s.kind() {
        Kind::PureSet => true,
        Kind::DenseOrder => pairs_agree(&|a, b| s.value(a) < s.value(b)),
        Kind::VecFq { q } => same_relations(q, s.dim(), u, v, false),
        Kind::AffineFq { q } => same_relations(q, s.dim(), u, v, true),
        Kind::CopiesKn { n } => pairs_agree(&|a, b| a != b && a / n == b / n),
        Kind::RandomGraph => pairs_agree(&|a, b| s.adjacent(a, b)),
        Kind::RandomBipartite => (0..k).all(|i| s.side(u[i]) == s.side(v[i])) && pairs_agree(&|a, b| s.adjacent(a, b)),
    }
}

/// Size of the orbit of `x` under partial automorphisms fixing `a`.
fn orbit_size(s: &Structure, a: &[Elem], x: Elem) -> usize {
    let mut u = a.to_vec();
    u.push(x);
    s.elements()
        .filter(|&y| {
            let mut v = a.to_vec();
            v.push(y);
            raw_partial_iso(s, &u, &v)
        })
        .count()
}

/// acl(A) within the truncation: x is algebraic over A when its orbit over
/// A does not grow after the truncation is enlarged, once blindly and once
/// toward every non-algebraic-looking type.
pub fn brute_acl(s: &Structure, a: &ElemSet) -> ElemSet {
    let at: Vec<Elem> = a.iter().copied().collect();
    let before: Vec<usize> = s.elements().map(|x| orbit_size(s, &at, x)).collect();
    let mut big = s.clone();
    big.grow();
    let id = PartialMap::identity_on(at.iter().copied());
    for x in s.elements() {
        if !a.contains(&x) && orbit_size(&big, &at, x) == before[x as usize] {
            big.grow_realizing(&id, x);
        }
    }
    s.elements().filter(|&x| orbit_size(&big, &at, x) == before[x as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_acl_examples() {
        let v = Structure::with_size(Kind::VecFq { q: 2 }, 4, 0).unwrap();
        assert_eq!(brute_acl(&v, &[5].into()), [0, 5].into());
        let c = Structure::with_size(Kind::CopiesKn { n: 3 }, 5, 0).unwrap();
        assert_eq!(brute_acl(&c, &[4].into()), [3, 4, 5].into());
        let d = Structure::new(Kind::DenseOrder, 0).unwrap();
        assert_eq!(brute_acl(&d, &[3, 7].into()), [3, 7].into());
    }

    #[test]
    fn raw_relations() {
        let v = Structure::new(Kind::VecFq { q: 3 }, 0).unwrap();
        assert!(raw_partial_iso(&v, &[1, 3], &[3, 9]));
        assert!(!raw_partial_iso(&v, &[1, 2], &[1, 3]));
        let a = Structure::new(Kind::AffineFq { q: 2 }, 0).unwrap();
        // 0 and 1 are affinely just two points
        assert!(raw_partial_iso(&a, &[0, 1], &[5, 6]));
    }

    #[test]
    fn formulas_agree_on_small_subsets() {
        let kinds = [
            (Kind::PureSet, 8),
            (Kind::DenseOrder, 8),
            (Kind::VecFq { q: 2 }, 3),
            (Kind::AffineFq { q: 2 }, 3),
            (Kind::CopiesKn { n: 3 }, 3),
            (Kind::RandomGraph, 8),
            (Kind::RandomBipartite, 8),
        ];
        for (kind, size) in kinds {
            let s = Structure::with_size(kind, size, 7).unwrap();
            let n = s.len();
            for a in 0..n {
                for b in a..n {
                    for c in b..n {
                        for set in [ElemSet::new(), [a].into(), [a, b].into(), [a, b, c].into()] {
                            assert_eq!(s.acl(&set), brute_acl(&s, &set), "{kind} {set:?}");
                        }
                    }
                }
            }
        }
    }
}
