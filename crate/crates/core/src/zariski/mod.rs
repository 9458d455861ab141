//! Basic open sets of the metric-pointwise topology and their Zariski
//! descriptions, checked on explored prefixes of embeddings.
//!
//! Membership in `O` and `Z` is existential over the image of an embedding,
//! which is only ever explored up to a depth, so those answers are
//! three-valued. `W` needs a single application.

use serde::Serialize;
use serde_json::json;

use crate::embed::{EmbedError, EmbeddingId, Universe};
use crate::metric::{PartialIsometry, PointId};
use crate::monoid::Dist;
use crate::report::Check;
use crate::rng::derive;
use crate::urysohn::Generator;

pub mod words;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpenSet {
    /// `{s | d(s(a), b) < ε}`
    W { a: PointId, b: PointId, eps: Dist },
    /// `{s | B_ε(a) ∩ im(s) ≠ ∅}`
    O { a: PointId, eps: Dist },
    /// `{s | B_ζ(a) ∩ im(sσ) ≠ ∅ and B_η(a) ∩ im(sθ) ≠ ∅}`
    Z { a: PointId, zeta: Dist, eta: Dist, sigma: EmbeddingId, theta: EmbeddingId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict")]
pub enum Membership {
    /// Witnessing source points: `a` for W, `x` with `s(x)` in the ball
    /// for O, and the points `c ∈ im σ`, `d ∈ im θ` for Z.
    Yes { witness: Vec<PointId> },
    No,
    Inconclusive,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZariskiError {
    #[error("parameters violate ζ ≤ η and ζ ⊕ η ≤ ε")]
    ParameterViolation,
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

fn soft<T>(r: Result<T, EmbedError>) -> Result<Option<T>, EmbedError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(EmbedError::DepthExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// First explored (or newly explored, within `depth` advances) source point
/// of `s` whose image lies in `B_r(center)`.
fn find_in_ball(u: &mut Universe, s: EmbeddingId, center: PointId, r: &Dist, depth: usize) -> Result<Option<PointId>, EmbedError> {
    let mut k = 0;
    let mut advances = 0;
    loop {
        let ex = u.explored(s);
        while k < ex.len() {
            let (x, y) = ex[k];
            if u.d(y, center) < r {
                return Ok(Some(x));
            }
            k += 1;
        }
        if advances == depth {
            return Ok(None);
        }
        if soft(u.advance(s))?.is_none() {
            return Ok(None);
        }
        advances += 1;
    }
}

/// Search the explored part of `outer ∘ inner` (advancing `inner` at most
/// `depth` times, evaluating `outer` under the same bound) for a source
/// whose image lies in `B_r(center)`; returns the `inner` image point.
fn find_composite_in_ball(
    u: &mut Universe,
    outer: EmbeddingId,
    inner: EmbeddingId,
    center: PointId,
    r: &Dist,
    depth: usize,
) -> Result<Option<PointId>, EmbedError> {
    let mut k = 0;
    let mut advances = 0;
    loop {
        while k < u.explored_len(inner) {
            let c = u.explored(inner)[k].1;
            if let Some(sc) = soft(u.apply_at(outer, c, depth))? {
                if u.d(sc, center) < r {
                    return Ok(Some(c));
                }
            }
            k += 1;
        }
        if advances == depth {
            return Ok(None);
        }
        if soft(u.advance(inner))?.is_none() {
            return Ok(None);
        }
        advances += 1;
    }
}

/// Bounded membership test. Never answers `Yes` wrongly; `O` and `Z` never
/// answer `No`.
pub fn member_bounded(u: &mut Universe, set: &OpenSet, s: EmbeddingId, depth: usize) -> Result<Membership, EmbedError> {
    if !u.owns(s) {
        return Err(EmbedError::GeneratorMismatch);
    }
    Ok(match set {
        OpenSet::W { a, b, eps } => match soft(u.apply_at(s, *a, depth))? {
            Some(sa) if u.d(sa, *b) < eps => Membership::Yes { witness: vec![*a] },
            Some(_) => Membership::No,
            None => Membership::Inconclusive,
        },
        OpenSet::O { a, eps } => match find_in_ball(u, s, *a, eps, depth)? {
            Some(x) => Membership::Yes { witness: vec![x] },
            None => Membership::Inconclusive,
        },
        OpenSet::Z { a, zeta, eta, sigma, theta } => {
            if !u.owns(*sigma) || !u.owns(*theta) {
                return Err(EmbedError::GeneratorMismatch);
            }
            let c = find_composite_in_ball(u, s, *sigma, *a, zeta, depth)?;
            let d = find_composite_in_ball(u, s, *theta, *a, eta, depth)?;
            match (c, d) {
                (Some(c), Some(d)) => Membership::Yes { witness: vec![c, d] },
                _ => Membership::Inconclusive,
            }
        }
    })
}

/// Draw the sample embedding used by the sampling checks: a plain random
/// back-and-forth run, or one seeded with `a ↦ target`.
fn sample(u: &mut Universe, seed: u64, anchor: Option<(PointId, PointId)>, depth: usize) -> Result<EmbeddingId, EmbedError> {
    let seeds = PartialIsometry::from_pairs(anchor);
    u.sample_embedding_from(seed, seeds, depth)
}

/// Advances allowed when evaluating the pinching pair at an image point.
fn pair_depth(u: &Universe, depth: usize) -> usize {
    4 * (u.generator().len() + depth)
}

/// For sampled `s`, compare "im(s) meets `B_ε(a)`" with "φs ≠ ψs" for the
/// pinching pair (φ, ψ) at `a`. Both are tested pointwise on the explored
/// part of `s`: each explored image point is in the ball exactly when φ
/// and ψ differ there.
pub fn check_o_characterization(g: &Generator, a: PointId, eps: &Dist, samples: usize, depth: usize, seed: u64) -> Result<Check, EmbedError> {
    let mut check = Check::new(
        "o_characterization",
        json!({"monoid": g.monoid().kind, "a": a, "eps": eps, "samples": samples, "depth": depth, "prefix": g.len()}),
    );
    let (mut both_yes, mut both_open, mut one_sided) = (0u64, 0u64, 0u64);
    for i in 0..samples {
        let mut u = Universe::new(g.clone());
        let (phi, psi) = u.pinching_pair(a, eps.clone())?;
        // odd samples start inside the ball so both outcomes get exercised
        let anchor = if i % 2 == 1 {
            let r = u.monoid().standard_gap(eps, &u.monoid().zero()).expect("standard");
            let c = u.generator_mut().realize_type(&crate::metric::ExtensionRequest::single(a, r))?;
            Some((PointId(0), c))
        } else {
            None
        };
        let s = sample(&mut u, derive(seed, i as u64), anchor, depth)?;
        let (mut inside, mut differ, mut undecided) = (false, false, false);
        let pd = pair_depth(&u, depth);
        for (x, y) in u.explored(s) {
            let in_ball = u.d(y, a) < eps;
            let fy = soft(u.apply_at(phi, y, pd))?;
            let gy = soft(u.apply_at(psi, y, pd))?;
            inside |= in_ball;
            match (fy, gy) {
                (Some(fy), Some(gy)) => {
                    differ |= fy != gy;
                    if (fy != gy) != in_ball {
                        check.violation(json!({"sample": i, "x": x, "s(x)": y, "phi": fy, "psi": gy, "d(a,s(x))": u.d(y, a)}));
                    }
                }
                _ => undecided = true,
            }
        }
        match (inside, differ) {
            (true, true) => both_yes += 1,
            (false, false) if !undecided => both_open += 1,
            _ => one_sided += 1,
        }
    }
    if one_sided > 0 {
        check.inconclusive();
    }
    Ok(check.with_stats(json!({
        "both_yes": both_yes,
        "both_inconclusive": both_open,
        "one_sided_inconclusive": one_sided,
        "inconclusive_rate": format!("{}/{}", both_open + one_sided, samples),
    })))
}

/// For sampled `s`, check `W(a,b,ζ) ⊆ Z(b,ζ,η) ⊆ W(a,b,ε⊕ζ)` where `Z` is
/// built from the spreading pair at `a` with radius `ε`.
#[allow(clippy::too_many_arguments)]
pub fn check_containments(
    g: &Generator,
    a: PointId,
    b: PointId,
    zeta: &Dist,
    eta: &Dist,
    eps: &Dist,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<Check, ZariskiError> {
    let m = g.monoid().clone();
    if zeta > eta || &m.sum(zeta, eta) > eps || zeta.is_zero() {
        return Err(ZariskiError::ParameterViolation);
    }
    let wide = m.sum(eps, zeta);
    let mut check = Check::new(
        "containments",
        json!({"monoid": m.kind, "a": a, "b": b, "zeta": zeta, "eta": eta, "eps": eps, "samples": samples, "depth": depth}),
    );
    let (mut in_w, mut in_z, mut w_missing_z) = (0u64, 0u64, 0u64);
    for i in 0..samples {
        let mut u = Universe::new(g.clone());
        let (sigma, theta) = u.spreading_pair(a, eps.clone())?;
        let anchor = match i % 3 {
            0 => {
                let r = m.standard_gap(zeta, &m.zero()).expect("standard");
                Some(u.generator_mut().realize_type(&crate::metric::ExtensionRequest::single(b, r)).map_err(EmbedError::from)?)
            }
            1 => Some(u.generator_mut().realize_type(&crate::metric::ExtensionRequest::single(b, zeta.clone())).map_err(EmbedError::from)?),
            _ => None,
        };
        let s = sample(&mut u, derive(seed, i as u64), anchor.map(|c| (a, c)), depth)?;
        let w1 = member_bounded(&mut u, &OpenSet::W { a, b, eps: zeta.clone() }, s, depth)?;
        let z = member_bounded(&mut u, &OpenSet::Z { a: b, zeta: zeta.clone(), eta: eta.clone(), sigma, theta }, s, depth)?;
        if w1.is_yes() {
            in_w += 1;
            if !z.is_yes() {
                w_missing_z += 1;
            }
        }
        if let Membership::Yes { witness } = &z {
            in_z += 1;
            let (c, d) = (witness[0], witness[1]);
            let sa = u.apply_at(s, a, usize::MAX)?;
            let (sc, sd) = (u.lookup(s, c).expect("evaluated"), u.lookup(s, d).expect("evaluated"));
            // replay: d(c,d) = d(sc,sd) < ζ⊕η ≤ ε, so c ∈ B_ε(a), so
            // d(s(a), b) ≤ d(a,c) ⊕ d(s(c), b) < ε ⊕ ζ
            let chain_ok = u.d(c, d) < eps
                && u.d(a, c) < eps
                && u.d(sa, b) <= &m.sum(u.d(a, c), u.d(sc, b))
                && u.d(sa, b) < &wide;
            if !chain_ok {
                check.violation(json!({
                    "sample": i, "c": c, "d": d, "s(c)": sc, "s(d)": sd, "s(a)": sa,
                    "d(c,d)": u.d(c, d), "d(a,c)": u.d(a, c), "d(s(a),b)": u.d(sa, b),
                }));
            }
        }
    }
    if w_missing_z > 0 {
        check.inconclusive();
    }
    Ok(check.with_stats(json!({"in_w_small": in_w, "in_z": in_z, "w_without_found_z": w_missing_z})))
}

/// Run `separation_witness` for `count` seeded maps and verify each result
/// lands in `W(a,b,ε)` and visibly disagrees with φ.
pub fn check_separation(g: &Generator, eps: &Dist, count: usize, map_size: usize, seed: u64) -> Result<Check, EmbedError> {
    use rand::seq::SliceRandom;
    use rand::Rng as _;
    let mut check =
        Check::new("separation_witness", json!({"monoid": g.monoid().kind, "eps": eps, "count": count, "map_size": map_size}));
    let mut singletons = 0u64;
    for i in 0..count {
        let mut u = Universe::new(g.clone());
        let mut r = crate::rng::sub_rng(seed, i as u64);
        let n = u.generator().len() as u32;
        let mut pts: Vec<PointId> = (0..n).map(PointId).collect();
        pts.shuffle(&mut r);
        let size = r.gen_range(1..=map_size.min(pts.len()));
        let dom: Vec<PointId> = pts[..size].to_vec();
        // mostly genuine isometries (images from a random embedding), some arbitrary
        let phi = if i % 4 == 3 {
            let mut img = pts.clone();
            img.shuffle(&mut r);
            PartialIsometry::from_pairs(dom.iter().copied().zip(img))
        } else {
            let e = u.sample_embedding(derive(seed, 1000 + i as u64), 0)?;
            let mut pi = PartialIsometry::new();
            for &x in &dom {
                pi.insert(x, u.apply_at(e, x, usize::MAX)?);
            }
            pi
        };
        let (a, b) = match i % 3 {
            0 => (dom[0], phi.get(dom[0]).expect("in domain")),
            _ => (pts[r.gen_range(0..pts.len())], pts[r.gen_range(0..pts.len())]),
        };
        let s = u.separation_witness(&phi, a, b, eps)?;
        let sa = u.lookup(s, a).expect("explored");
        let moved = crate::embed::disagreement(&u, s, &phi);
        let in_w = u.d(sa, b) < eps;
        singletons += u64::from(phi.len() == 1);
        if !in_w || moved.is_none() {
            check.violation(json!({"sample": i, "phi": phi.pairs, "a": a, "b": b, "s(a)": sa, "moved": moved}));
        }
    }
    Ok(check.with_stats(json!({"singleton_maps": singletons, "larger_maps": count as u64 - singletons})))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{MonoidKind, MonoidSpec};

    fn q() -> MonoidSpec {
        MonoidSpec::new(MonoidKind::RationalsNonneg)
    }

    #[test]
    fn identity_memberships() {
        let mut u = Universe::with_points(q(), 4);
        let id = u.identity();
        let a = PointId(1);
        let eps = Dist::frac(1, 2);
        assert!(member_bounded(&mut u, &OpenSet::W { a, b: a, eps: eps.clone() }, id, 0).unwrap().is_yes());
        u.advance(id).unwrap();
        u.advance(id).unwrap();
        assert!(member_bounded(&mut u, &OpenSet::O { a, eps }, id, 0).unwrap().is_yes());
    }

    #[test]
    fn o_membership_can_stay_open() {
        // s sends everything far from a fresh point at distance 5 from the prefix
        let mut u = Universe::with_points(q(), 3);
        let far = u.generator_mut().realize_type(&crate::metric::ExtensionRequest::single(PointId(0), Dist::int(9))).unwrap();
        let s = u.back_and_forth(PartialIsometry::from_pairs([(PointId(0), PointId(0))])).unwrap();
        let got = member_bounded(&mut u, &OpenSet::O { a: far, eps: Dist::frac(1, 10) }, s, 2).unwrap();
        assert_eq!(got, Membership::Inconclusive);
    }

    #[test]
    fn o_characterization_small_run() {
        let g = Generator::with_points(q(), 6);
        let c = check_o_characterization(&g, PointId(0), &Dist::int(1), 10, 8, 3).unwrap();
        assert_ne!(c.status, crate::report::Status::Violation, "{:?}", c.witness);
        assert!(c.stats["both_yes"].as_u64().unwrap() >= 5);
    }

    #[test]
    fn containments_small_run() {
        let g = Generator::with_points(q(), 6);
        let c = check_containments(&g, PointId(0), PointId(1), &Dist::frac(1, 4), &Dist::frac(1, 2), &Dist::int(1), 9, 8, 5)
            .unwrap();
        assert_ne!(c.status, crate::report::Status::Violation, "{:?}", c.witness);
        assert!(c.stats["in_w_small"].as_u64().unwrap() >= 3);
        assert_eq!(
            check_containments(&g, PointId(0), PointId(1), &Dist::int(1), &Dist::int(1), &Dist::int(1), 1, 1, 0),
            Err(ZariskiError::ParameterViolation)
        );
    }

    #[test]
    fn separation_runs() {
        let g = Generator::with_points(q(), 8);
        let c = check_separation(&g, &Dist::frac(1, 2), 8, 3, 11).unwrap();
        assert_eq!(c.status, crate::report::Status::Ok, "{:?}", c.witness);
    }
}
