//! Neumann witnesses, similarity classes and the saturated-pair prefixes.

use super::{Elem, ElemSet, OligoError, PartialMap, Structure, Subuniverse};

/// A partial automorphism `g` fixing `c` pointwise, defined on `d`, with
/// `g(d) ∩ b = c ∩ d ∩ b`. Points of `d ∖ c` whose image is not forced
/// are sent outside `acl(b ∪ c ∪ g(earlier))`.
pub fn neumann_witness(
    s: &mut Structure,
    c: &ElemSet,
    d: &ElemSet,
    b: &ElemSet,
    budget: usize,
) -> Result<PartialMap, OligoError> {
    if !s.is_acl_closed(c) {
        return Err(OligoError::NotAclClosed);
    }
    let mut g = PartialMap::identity_on(c.iter().copied());
    for &x in d.difference(c) {
        if s.forced(&g, x) {
            s.extend(&mut g, x, budget)?;
            continue;
        }
        let mut near: ElemSet = b.union(c).copied().collect();
        near.extend(g.image());
        let avoid = s.acl(&near);
        s.extend_with(&mut g, x, &mut |_, y| !avoid.contains(&y), budget)?;
    }
    let gd = g.map_set(d).expect("g is defined on d");
    let want: ElemSet = c.intersection(d).filter(|x| b.contains(x)).copied().collect();
    let got: ElemSet = gd.intersection(b).copied().collect();
    if !s.is_partial_iso(&g) || !g.fixes(c) || got != want {
        return Err(OligoError::PreconditionFailed(format!(
            "intersection identity fails: g(D)∩B = {got:?}, want {want:?}"
        )));
    }
    Ok(g)
}

/// `acl(a)` intersected with the orbit of `a`.
pub fn sim_class(s: &Structure, a: Elem) -> ElemSet {
    s.acl_of(&[a])
        .into_iter()
        .filter(|&y| s.orbit_eq(&[a], &[y]).unwrap_or(false))
        .collect()
}

/// `a` followed by the lowest other elements, `depth` in total.
fn prefix_with(s: &mut Structure, first: Option<Elem>, depth: usize) -> Vec<Elem> {
    while (s.len() as usize) < depth + 1 {
        s.grow();
    }
    let mut out: Vec<Elem> = first.into_iter().collect();
    out.extend(s.elements().filter(|&e| Some(e) != first).take(depth - out.len()));
    out
}

/// Two prefixes α = id and β, agreeing on the X-points of the prefix and
/// differing at `a`. The prefix is `a` plus the first `depth - 1` other
/// elements.
pub fn agreeing_pair(
    s: &mut Structure,
    x: &Subuniverse,
    a: Elem,
    depth: usize,
    budget: usize,
) -> Result<(PartialMap, PartialMap), OligoError> {
    if depth == 0 {
        return Err(OligoError::PreconditionFailed("depth must be positive".into()));
    }
    if x.contains(s, a) {
        return Err(OligoError::PreconditionFailed("a lies in X".into()));
    }
    let prefix = prefix_with(s, Some(a), depth);
    let fixed: ElemSet = prefix.iter().copied().filter(|&e| x.contains(s, e)).collect();
    let alpha = PartialMap::identity_on(prefix.iter().copied());
    let mut beta = PartialMap::identity_on(fixed.iter().copied());
    if s.forced(&beta, a) {
        return Err(OligoError::PreconditionFailed("a is algebraic over X".into()));
    }
    s.extend_with(&mut beta, a, &mut |_, y| y != a, budget)
        .map_err(|_| OligoError::PreconditionFailed("no second image for a over X".into()))?;
    for &e in &prefix {
        s.extend(&mut beta, e, budget)?;
    }
    debug_assert!(s.is_partial_iso(&beta));
    if alpha.restrict(&fixed) != beta.restrict(&fixed) || beta.get(a) == alpha.get(a) {
        return Err(OligoError::PreconditionFailed("agreement check failed".into()));
    }
    Ok((alpha, beta))
}

/// Two prefixes on the first `depth` elements with α = id, β fixing X and
/// `im(α) ∩ im(β) = α(X ∩ prefix)`, checked after every step.
pub fn image_disjoint_pair(
    s: &mut Structure,
    x: &Subuniverse,
    depth: usize,
    budget: usize,
) -> Result<(PartialMap, PartialMap), OligoError> {
    let prefix = if depth == 0 { Vec::new() } else { prefix_with(s, None, depth) };
    let pset: ElemSet = prefix.iter().copied().collect();
    let fixed: ElemSet = prefix.iter().copied().filter(|&e| x.contains(s, e)).collect();
    if !s.acl(&fixed).iter().all(|&e| x.contains(s, e)) {
        return Err(OligoError::NotAclClosed);
    }
    let alpha = PartialMap::identity_on(prefix.iter().copied());
    let mut beta = PartialMap::identity_on(fixed.iter().copied());
    for &e in &prefix {
        if beta.get(e).is_some() {
            continue;
        }
        if s.forced(&beta, e) {
            s.extend(&mut beta, e, budget)?;
        } else {
            let mut near = pset.clone();
            near.extend(beta.image());
            let avoid = s.acl(&near);
            s.extend_with(&mut beta, e, &mut |_, y| !avoid.contains(&y), budget)?;
        }
        let meet: ElemSet = beta.image_set().intersection(&pset).copied().collect();
        if meet != fixed {
            return Err(OligoError::PreconditionFailed(format!("images meet outside X at {e}")));
        }
    }
    Ok((alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::super::Kind;
    use super::*;

    fn set(xs: &[Elem]) -> ElemSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn neumann_examples() {
        let mut p = Structure::new(Kind::PureSet, 0).unwrap();
        let g = neumann_witness(&mut p, &set(&[1]), &set(&[1, 2]), &set(&[1, 2, 3]), 4).unwrap();
        assert_eq!(g.get(1), Some(1));
        assert!(![1, 2, 3].contains(&g.get(2).unwrap()));

        let g = neumann_witness(&mut p, &set(&[1, 2]), &set(&[2]), &set(&[2, 5]), 4).unwrap();
        assert_eq!(g.get(2), Some(2));

        // C = span(e1), D = span(e1, e2), B = span(e1, e2, e3)
        let mut v = Structure::new(Kind::VecFq { q: 2 }, 0).unwrap();
        let c = v.acl(&set(&[1]));
        let d = v.acl(&set(&[1, 2]));
        let b = v.acl(&set(&[1, 2, 4]));
        let g = neumann_witness(&mut v, &c, &d, &b, 4).unwrap();
        assert!(v.dim() >= 4);
        assert!(!b.contains(&g.get(2).unwrap()));

        assert_eq!(neumann_witness(&mut v, &set(&[1]), &d, &b, 4), Err(OligoError::NotAclClosed));
    }

    #[test]
    fn similarity_classes() {
        let p = Structure::new(Kind::PureSet, 0).unwrap();
        assert_eq!(sim_class(&p, 3), set(&[3]));
        let c = Structure::new(Kind::CopiesKn { n: 3 }, 0).unwrap();
        assert_eq!(sim_class(&c, 4), set(&[3, 4, 5]));
        let v = Structure::new(Kind::VecFq { q: 2 }, 0).unwrap();
        assert_eq!(sim_class(&v, 6), set(&[6]));
    }

    #[test]
    fn agreeing_pairs() {
        let mut g = Structure::new(Kind::RandomBipartite, 5).unwrap();
        let a = g.elements().find(|&e| g.side(e)).unwrap();
        let (al, be) = agreeing_pair(&mut g, &Subuniverse::Side(false), a, 8, 8).unwrap();
        assert_ne!(al.get(a), be.get(a));
        for &(e, _) in al.pairs() {
            if !g.side(e) {
                assert_eq!(be.get(e), Some(e));
            }
        }
        assert!(g.is_partial_iso(&be));

        let mut p = Structure::new(Kind::PureSet, 0).unwrap();
        let (al, be) = agreeing_pair(&mut p, &Subuniverse::Empty, 2, 1, 4).unwrap();
        assert_eq!(al.len(), 1);
        assert_ne!(be.get(2), Some(2));

        let mut v = Structure::new(Kind::VecFq { q: 2 }, 0).unwrap();
        assert!(agreeing_pair(&mut v, &Subuniverse::Empty, 0, 3, 4).is_err());
    }

    #[test]
    fn image_disjoint_pairs() {
        let mut v = Structure::new(Kind::VecFq { q: 2 }, 0).unwrap();
        let x = Subuniverse::Finite(set(&[0, 1]));
        let (al, be) = image_disjoint_pair(&mut v, &x, 8, 8).unwrap();
        let meet: ElemSet = al.image_set().intersection(&be.image_set()).copied().collect();
        assert_eq!(meet, set(&[0, 1]));

        let mut p = Structure::new(Kind::PureSet, 0).unwrap();
        let (al, be) = image_disjoint_pair(&mut p, &Subuniverse::Empty, 6, 8).unwrap();
        assert!(al.image_set().is_disjoint(&be.image_set()));

        let bad = Subuniverse::Finite(set(&[1]));
        assert_eq!(image_disjoint_pair(&mut v, &bad, 4, 4), Err(OligoError::NotAclClosed));
    }
}
