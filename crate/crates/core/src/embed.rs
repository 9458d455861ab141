//! Lazily extended isometric self-embeddings of a Urysohn prefix.
//!
//! A [`Universe`] owns one [`Generator`] together with every embedding built
//! over it; embeddings are addressed by [`EmbeddingId`]. Each embedding has an
//! explored finite part that only ever grows. One advance adds the next
//! source point: its anchor points first, then the lowest id not yet in the
//! domain. Image points created along the way are appended to the prefix and
//! so are enumerated later like any other point.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng as _;
use serde::Serialize;

use crate::metric::{check_partial_isometry, ExtensionRequest, MetricError, PartialIsometry, PointId};
use crate::monoid::{Dist, MonoidSpec};
use crate::rng::{self, Rng};
use crate::urysohn::Generator;

static UNIVERSE_TAG: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("point {point} not reached within {depth} advances")]
    DepthExceeded { point: PointId, depth: usize },
    #[error("embeddings live over different generators")]
    GeneratorMismatch,
    #[error("epsilon must be nonzero")]
    ZeroEpsilon,
    #[error("monoid is not metrically complete")]
    NotMetricallyComplete,
    #[error("{0} is not in the carrier of the monoid")]
    NotInCarrier(Dist),
    #[error("seed map is not a partial isometry at ({0}, {1})")]
    NotIsometric(PointId, PointId),
    /// Only raised for an empty map: every embedding extends it.
    #[error("no witness exists for an empty map")]
    NoWitnessPossible,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EmbeddingId {
    universe: u64,
    index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleTag {
    Identity,
    BackAndForth,
    PinchLeft,
    PinchRight,
    SpreadLeft,
    SpreadRight,
    Composite,
}

#[derive(Debug, Clone)]
struct BackForth {
    map: PartialIsometry,
    order: Vec<PointId>,
    scan: u32,
    rng: Option<Rng>,
}

/// State shared by the two halves of a pinching or spreading pair.
#[derive(Debug, Clone)]
struct PairState {
    spread: bool,
    a: PointId,
    eps: Dist,
    src: Vec<PointId>,
    pos: HashMap<PointId, usize>,
    alpha: Vec<Dist>,
    left: Vec<PointId>,
    right: Vec<PointId>,
    scan: u32,
}

#[derive(Debug, Clone)]
struct Composite {
    outer: usize,
    inner: usize,
    cap: usize,
    order: Vec<PointId>,
    map: HashMap<PointId, PointId>,
}

#[derive(Debug, Clone)]
enum Rule {
    Identity { n: u32 },
    BackForth(BackForth),
    Pair { state: usize, right: bool },
    Composite(Composite),
}

#[derive(Debug, Clone)]
pub struct Universe {
    tag: u64,
    gen: Generator,
    embs: Vec<Rule>,
    pairs: Vec<PairState>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingJson {
    pub pairs: Vec<(PointId, PointId)>,
    pub rule: RuleTag,
}

/// Default advance cap for the outer factor of a composite.
pub const COMPOSITE_CAP: usize = 256;

fn next_source(gen: &mut Generator, scan: &mut u32, taken: impl Fn(PointId) -> bool) -> PointId {
    loop {
        while (*scan as usize) < gen.len() {
            let p = PointId(*scan);
            if !taken(p) {
                return p;
            }
            *scan += 1;
        }
        gen.fresh_point();
    }
}

fn push_unique(req: &mut Vec<(PointId, Dist)>, z: PointId, d: Dist) {
    if !req.iter().any(|(w, _)| *w == z) {
        req.push((z, d));
    }
}

impl Universe {
    pub fn new(gen: Generator) -> Universe {
        Universe { tag: UNIVERSE_TAG.fetch_add(1, Ordering::Relaxed), gen, embs: Vec::new(), pairs: Vec::new() }
    }

    /// A fresh generator over `monoid` run until it has `n` points.
    pub fn with_points(monoid: MonoidSpec, n: usize) -> Universe {
        Universe::new(Generator::with_points(monoid, n))
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn generator_mut(&mut self) -> &mut Generator {
        &mut self.gen
    }

    pub fn monoid(&self) -> &MonoidSpec {
        self.gen.monoid()
    }

    pub fn d(&self, x: PointId, y: PointId) -> &Dist {
        self.gen.d(x, y)
    }

    fn idx(&self, e: EmbeddingId) -> Result<usize, EmbedError> {
        if e.universe != self.tag || e.index >= self.embs.len() {
            return Err(EmbedError::GeneratorMismatch);
        }
        Ok(e.index)
    }

    fn add(&mut self, r: Rule) -> EmbeddingId {
        self.embs.push(r);
        EmbeddingId { universe: self.tag, index: self.embs.len() - 1 }
    }

    pub fn owns(&self, e: EmbeddingId) -> bool {
        self.idx(e).is_ok()
    }

    pub fn identity(&mut self) -> EmbeddingId {
        self.add(Rule::Identity { n: 0 })
    }

    fn check_seeds(&self, seeds: &PartialIsometry) -> Result<(), EmbedError> {
        let s = self.gen.space();
        match check_partial_isometry(seeds, s, s)? {
            Ok(()) => Ok(()),
            Err((x, y)) => Err(EmbedError::NotIsometric(x, y)),
        }
    }

    fn back_forth_from(&mut self, seeds: PartialIsometry, rng: Option<Rng>) -> Result<EmbeddingId, EmbedError> {
        self.check_seeds(&seeds)?;
        let order = seeds.domain();
        Ok(self.add(Rule::BackForth(BackForth { map: seeds, order, scan: 0, rng })))
    }

    /// Deterministic back-and-forth extension of `seeds`: each new point goes
    /// to the lowest-id match, else to a freshly realized point.
    pub fn back_and_forth(&mut self, seeds: PartialIsometry) -> Result<EmbeddingId, EmbedError> {
        self.back_forth_from(seeds, None)
    }

    /// Pseudorandom back-and-forth embedding advanced `n` times. At each
    /// step the image is drawn uniformly from the matching existing points
    /// plus one fresh point.
    pub fn sample_embedding(&mut self, seed: u64, n: usize) -> Result<EmbeddingId, EmbedError> {
        self.sample_embedding_from(seed, PartialIsometry::new(), n)
    }

    pub fn sample_embedding_from(&mut self, seed: u64, seeds: PartialIsometry, n: usize) -> Result<EmbeddingId, EmbedError> {
        let e = self.back_forth_from(seeds, Some(rng::rng(seed)))?;
        for _ in 0..n {
            self.advance(e)?;
        }
        Ok(e)
    }

    fn check_eps(&self, eps: &Dist) -> Result<(), EmbedError> {
        if eps.is_zero() {
            return Err(EmbedError::ZeroEpsilon);
        }
        if !self.monoid().in_carrier(eps) {
            return Err(EmbedError::NotInCarrier(eps.clone()));
        }
        Ok(())
    }

    /// φ, ψ agreeing off `B_ε(a)` and disagreeing at every point of it.
    pub fn pinching_pair(&mut self, a: PointId, eps: Dist) -> Result<(EmbeddingId, EmbeddingId), EmbedError> {
        self.check_eps(&eps)?;
        if !self.monoid().metrically_complete {
            return Err(EmbedError::NotMetricallyComplete);
        }
        self.gen.space().try_d(a, a)?;
        let c = self.gen.realize_type(&ExtensionRequest::single(a, eps.clone()))?;
        Ok(self.new_pair(false, a, eps, c))
    }

    /// σ, θ fixing `a` whose images only come ε-close inside `B_ε(a)`.
    pub fn spreading_pair(&mut self, a: PointId, eps: Dist) -> Result<(EmbeddingId, EmbeddingId), EmbedError> {
        self.check_eps(&eps)?;
        self.gen.space().try_d(a, a)?;
        Ok(self.new_pair(true, a, eps, a))
    }

    fn new_pair(&mut self, spread: bool, a: PointId, eps: Dist, c0: PointId) -> (EmbeddingId, EmbeddingId) {
        let zero = self.monoid().zero();
        self.pairs.push(PairState {
            spread,
            a,
            eps,
            src: vec![a],
            pos: HashMap::from([(a, 0)]),
            alpha: vec![zero],
            left: vec![a],
            right: vec![c0],
            scan: 0,
        });
        let state = self.pairs.len() - 1;
        (self.add(Rule::Pair { state, right: false }), self.add(Rule::Pair { state, right: true }))
    }

    /// The lazy composite `outer ∘ inner`.
    pub fn compose(&mut self, outer: EmbeddingId, inner: EmbeddingId) -> Result<EmbeddingId, EmbedError> {
        self.compose_with_cap(outer, inner, COMPOSITE_CAP)
    }

    pub fn compose_with_cap(&mut self, outer: EmbeddingId, inner: EmbeddingId, cap: usize) -> Result<EmbeddingId, EmbedError> {
        let outer = self.idx(outer)?;
        let inner = self.idx(inner)?;
        Ok(self.add(Rule::Composite(Composite { outer, inner, cap, order: Vec::new(), map: HashMap::new() })))
    }

    pub fn rule(&self, e: EmbeddingId) -> Result<RuleTag, EmbedError> {
        Ok(match &self.embs[self.idx(e)?] {
            Rule::Identity { .. } => RuleTag::Identity,
            Rule::BackForth(_) => RuleTag::BackAndForth,
            Rule::Pair { state, right } => match (self.pairs[*state].spread, right) {
                (false, false) => RuleTag::PinchLeft,
                (false, true) => RuleTag::PinchRight,
                (true, false) => RuleTag::SpreadLeft,
                (true, true) => RuleTag::SpreadRight,
            },
            Rule::Composite(_) => RuleTag::Composite,
        })
    }

    fn explored_len_at(&self, i: usize) -> usize {
        match &self.embs[i] {
            Rule::Identity { n } => *n as usize,
            Rule::BackForth(bf) => bf.order.len(),
            Rule::Pair { state, .. } => self.pairs[*state].src.len(),
            Rule::Composite(c) => c.order.len(),
        }
    }

    fn explored_pair_at(&self, i: usize, k: usize) -> (PointId, PointId) {
        match &self.embs[i] {
            Rule::Identity { .. } => (PointId(k as u32), PointId(k as u32)),
            Rule::BackForth(bf) => {
                let x = bf.order[k];
                (x, bf.map.get(x).expect("explored"))
            }
            Rule::Pair { state, right } => {
                let s = &self.pairs[*state];
                (s.src[k], if *right { s.right[k] } else { s.left[k] })
            }
            Rule::Composite(c) => {
                let x = c.order[k];
                (x, c.map[&x])
            }
        }
    }

    fn lookup_at(&self, i: usize, p: PointId) -> Option<PointId> {
        match &self.embs[i] {
            Rule::Identity { .. } => self.gen.space().contains(p).then_some(p),
            Rule::BackForth(bf) => bf.map.get(p),
            Rule::Pair { state, right } => {
                let s = &self.pairs[*state];
                s.pos.get(&p).map(|&k| if *right { s.right[k] } else { s.left[k] })
            }
            Rule::Composite(c) => c.map.get(&p).copied(),
        }
    }

    /// The image of `p` if it is already explored; never advances.
    pub fn lookup(&self, e: EmbeddingId, p: PointId) -> Option<PointId> {
        self.idx(e).ok().and_then(|i| self.lookup_at(i, p))
    }

    /// Explored pairs in advance order.
    pub fn explored(&self, e: EmbeddingId) -> Vec<(PointId, PointId)> {
        let i = self.idx(e).expect("embedding of this universe");
        (0..self.explored_len_at(i)).map(|k| self.explored_pair_at(i, k)).collect()
    }

    pub fn explored_len(&self, e: EmbeddingId) -> usize {
        self.explored_len_at(self.idx(e).expect("embedding of this universe"))
    }

    /// Explored image points in advance order.
    pub fn image(&self, e: EmbeddingId) -> Vec<PointId> {
        self.explored(e).into_iter().map(|(_, y)| y).collect()
    }

    pub fn to_json(&self, e: EmbeddingId) -> Result<EmbeddingJson, EmbedError> {
        Ok(EmbeddingJson { pairs: self.explored(e), rule: self.rule(e)? })
    }

    /// Extend `e` by one source point and return the new pair.
    pub fn advance(&mut self, e: EmbeddingId) -> Result<(PointId, PointId), EmbedError> {
        let i = self.idx(e)?;
        self.advance_at(i)
    }

    fn advance_at(&mut self, i: usize) -> Result<(PointId, PointId), EmbedError> {
        match &self.embs[i] {
            Rule::Identity { n } => {
                let n = *n;
                while self.gen.len() <= n as usize {
                    self.gen.fresh_point();
                }
                self.embs[i] = Rule::Identity { n: n + 1 };
                Ok((PointId(n), PointId(n)))
            }
            Rule::BackForth(_) => self.advance_back_forth(i),
            Rule::Pair { state, .. } => {
                let state = *state;
                self.advance_pair(state)?;
                let k = self.explored_len_at(i) - 1;
                Ok(self.explored_pair_at(i, k))
            }
            Rule::Composite(c) => {
                let (outer, inner, cap, k) = (c.outer, c.inner, c.cap, c.order.len());
                if self.explored_len_at(inner) <= k {
                    self.advance_at(inner)?;
                }
                let (x, y) = self.explored_pair_at(inner, k);
                let z = self.apply_index(outer, y, cap)?;
                if let Rule::Composite(c) = &mut self.embs[i] {
                    c.order.push(x);
                    c.map.insert(x, z);
                }
                Ok((x, z))
            }
        }
    }

    fn advance_back_forth(&mut self, i: usize) -> Result<(PointId, PointId), EmbedError> {
        let Universe { gen, embs, .. } = self;
        let Rule::BackForth(bf) = &mut embs[i] else { unreachable!() };
        let map = &bf.map;
        let x = next_source(gen, &mut bf.scan, |p| map.get(p).is_some());
        self.extend_back_forth(i, x)
    }

    /// One forth step at the source point `x`.
    fn extend_back_forth(&mut self, i: usize, x: PointId) -> Result<(PointId, PointId), EmbedError> {
        let Universe { gen, embs, .. } = self;
        let Rule::BackForth(bf) = &mut embs[i] else { unreachable!() };
        let forced: Vec<(PointId, Dist)> =
            bf.order.iter().map(|z| (bf.map.get(*z).expect("explored"), gen.d(x, *z).clone())).collect();
        let image = bf.map.image();
        let img = match &mut bf.rng {
            None => match gen.lowest_match(&forced, &image) {
                Some(p) => p,
                None => gen.realize_type(&ExtensionRequest::new(forced))?,
            },
            Some(r) => {
                let cands = gen.matches(&forced, &image);
                // an empty base does not pin down a fresh point
                let fresh = usize::from(!forced.is_empty());
                let k = r.gen_range(0..cands.len() + fresh);
                if k < cands.len() {
                    cands[k]
                } else {
                    gen.realize_type(&ExtensionRequest::new(forced))?
                }
            }
        };
        bf.map.insert(x, img);
        bf.order.push(x);
        Ok((x, img))
    }

    fn advance_pair(&mut self, state: usize) -> Result<(), EmbedError> {
        let Universe { gen, pairs, .. } = self;
        let s = &mut pairs[state];
        let pos = &s.pos;
        let p = next_source(gen, &mut s.scan, |q| pos.contains_key(&q));
        self.extend_pair(state, p)
    }

    /// One step of the pair recursion at the source point `p`. The
    /// recursion only looks at earlier sources, so any order works.
    fn extend_pair(&mut self, state: usize, p: PointId) -> Result<(), EmbedError> {
        let Universe { gen, pairs, .. } = self;
        let s = &mut pairs[state];
        let m = gen.monoid().clone();
        let alpha = gen.d(s.a, p).clone();
        let delta: Vec<Dist> = s.src.iter().map(|z| gen.d(*z, p).clone()).collect();
        let n = s.src.len();
        let (l, r) = if s.spread {
            // within each side copy the source distances, across sides α_i ⊕ α_j
            let mut bl = Vec::new();
            for i in 0..n {
                push_unique(&mut bl, s.left[i], delta[i].clone());
            }
            for j in 0..n {
                push_unique(&mut bl, s.right[j], m.sum(&alpha, &s.alpha[j]));
            }
            let bp = realize(gen, bl)?;
            let mut cr = Vec::new();
            for i in 0..n {
                push_unique(&mut cr, s.right[i], delta[i].clone());
            }
            for j in 0..n {
                push_unique(&mut cr, s.left[j], m.sum(&s.alpha[j], &alpha));
            }
            push_unique(&mut cr, bp, m.sum(&alpha, &alpha));
            (bp, realize(gen, cr)?)
        } else if alpha >= s.eps {
            let mut req = Vec::new();
            for i in 0..n {
                push_unique(&mut req, s.left[i], delta[i].clone());
                push_unique(&mut req, s.right[i], delta[i].clone());
            }
            let e = realize(gen, req)?;
            (e, e)
        } else {
            let gap = m.residual(&s.eps, &alpha);
            // distance from a new left point to right[j] (and symmetrically);
            // j = 0 is not special: α_0 = 0 gives ε
            let cross = |j: usize| -> Dist {
                if s.alpha[j] >= s.eps {
                    delta[j].clone()
                } else {
                    let gj = m.residual(&s.eps, &s.alpha[j]);
                    m.max(m.max(&delta[j], &gap), &gj).clone()
                }
            };
            let mut xl = Vec::new();
            for i in 0..n {
                push_unique(&mut xl, s.left[i], delta[i].clone());
            }
            for j in 0..n {
                push_unique(&mut xl, s.right[j], cross(j));
            }
            let x = realize(gen, xl)?;
            let mut yr = Vec::new();
            for i in 0..n {
                push_unique(&mut yr, s.right[i], delta[i].clone());
            }
            for j in 0..n {
                push_unique(&mut yr, s.left[j], cross(j));
            }
            push_unique(&mut yr, x, gap);
            (x, realize(gen, yr)?)
        };
        s.pos.insert(p, n);
        s.src.push(p);
        s.alpha.push(alpha);
        s.left.push(l);
        s.right.push(r);
        Ok(())
    }

    fn apply_index(&mut self, i: usize, p: PointId, depth: usize) -> Result<PointId, EmbedError> {
        if let Some(q) = self.lookup_at(i, p) {
            return Ok(q);
        }
        match &self.embs[i] {
            Rule::Identity { .. } => {
                let mut steps = 0;
                while !self.gen.space().contains(p) {
                    if steps == depth {
                        return Err(EmbedError::DepthExceeded { point: p, depth });
                    }
                    self.gen.fresh_point();
                    steps += 1;
                }
                Ok(p)
            }
            Rule::Composite(c) => {
                let (outer, inner, cap) = (c.outer, c.inner, c.cap);
                let y = self.apply_index(inner, p, depth)?;
                self.apply_index(outer, y, cap.max(depth))
            }
            _ if depth == 0 || !self.gen.space().contains(p) => Err(EmbedError::DepthExceeded { point: p, depth }),
            Rule::BackForth(_) => Ok(self.extend_back_forth(i, p)?.1),
            Rule::Pair { state, .. } => {
                let state = *state;
                self.extend_pair(state, p)?;
                Ok(self.lookup_at(i, p).expect("just extended"))
            }
        }
    }

    /// The image of `p`, extending `e` at `p` if needed. `depth` bounds the
    /// extension steps: zero means lookup only. Composites evaluate their
    /// factors, each under the same bound.
    pub fn apply_at(&mut self, e: EmbeddingId, p: PointId, depth: usize) -> Result<PointId, EmbedError> {
        let i = self.idx(e)?;
        self.apply_index(i, p, depth)
    }

    /// An embedding `s` with `d(s(a), b) < ε` that moves some point of
    /// `dom(φ)` off its φ-image.
    pub fn separation_witness(&mut self, phi: &PartialIsometry, a: PointId, b: PointId, eps: &Dist) -> Result<EmbeddingId, EmbedError> {
        self.check_eps(eps)?;
        if phi.is_empty() {
            return Err(EmbedError::NoWitnessPossible);
        }
        let space = self.gen.space();
        for x in phi.pairs.iter().flat_map(|(x, y)| [x, y]).chain([&a, &b]) {
            space.try_d(*x, *x)?;
        }
        let mut joint = phi.clone();
        let consistent = match phi.get(a) {
            Some(y) => y == b,
            None => {
                joint.insert(a, b);
                true
            }
        };
        let isometric = consistent && matches!(check_partial_isometry(&joint, space, space)?, Ok(()));
        let s = if !isometric {
            self.back_and_forth(PartialIsometry::from_pairs([(a, b)]))?
        } else if joint.len() == 1 {
            let gap = self.monoid().standard_gap(eps, &self.monoid().zero()).expect("standard monoid");
            let c = self.gen.realize_type(&ExtensionRequest::single(b, gap))?;
            self.back_and_forth(PartialIsometry::from_pairs([(a, c)]))?
        } else {
            // a second copy of B ∪ {b} meeting the first only in b, placed by
            // the independent amalgam over {b}
            let m = self.monoid().clone();
            let targets: Vec<PointId> = joint.image().into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            let mut copy: HashMap<PointId, PointId> = HashMap::from([(b, b)]);
            for &y in targets.iter().filter(|y| **y != b) {
                let mut req = Vec::new();
                for &z in &targets {
                    let d = if z == b { self.gen.d(y, b).clone() } else { m.sum(self.gen.d(y, b), self.gen.d(b, z)) };
                    req.push((z, d));
                }
                for &w in targets.iter().filter(|w| **w != b) {
                    if let Some(&w2) = copy.get(&w).filter(|_| w != b) {
                        req.push((w2, self.gen.d(y, w).clone()));
                    }
                }
                let y2 = realize(&mut self.gen, req)?;
                copy.insert(y, y2);
            }
            let seeds = PartialIsometry::from_pairs(joint.pairs.iter().map(|(x, y)| (*x, copy[y])));
            self.back_and_forth(seeds)?
        };
        for x in phi.domain() {
            self.apply_at(s, x, usize::MAX)?;
        }
        self.apply_at(s, a, usize::MAX)?;
        Ok(s)
    }
}

fn realize(gen: &mut Generator, req: Vec<(PointId, Dist)>) -> Result<PointId, EmbedError> {
    Ok(gen.realize_type(&ExtensionRequest::new(req))?)
}

/// A point of `dom(φ)` where the explored part of `s` differs from `φ`.
pub fn disagreement(u: &Universe, s: EmbeddingId, phi: &PartialIsometry) -> Option<PointId> {
    phi.pairs.iter().find(|(x, y)| u.lookup(s, **x).is_some_and(|z| z != **y)).map(|(x, _)| *x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_space;
    use crate::monoid::MonoidKind;

    fn q() -> MonoidSpec {
        MonoidSpec::new(MonoidKind::RationalsNonneg)
    }

    fn explored_is_isometric(u: &Universe, e: EmbeddingId) -> bool {
        let pi = PartialIsometry::from_pairs(u.explored(e));
        let s = u.generator().space();
        pi.len() == u.explored_len(e) && check_partial_isometry(&pi, s, s).unwrap().is_ok()
    }

    #[test]
    fn identity_applies_trivially() {
        let mut u = Universe::with_points(q(), 5);
        let id = u.identity();
        for p in 0..5 {
            assert_eq!(u.apply_at(id, PointId(p), 0).unwrap(), PointId(p));
        }
    }

    #[test]
    fn depth_zero_on_unseen_point() {
        let mut u = Universe::with_points(q(), 5);
        let e = u.sample_embedding(3, 0).unwrap();
        assert_eq!(u.apply_at(e, PointId(2), 0), Err(EmbedError::DepthExceeded { point: PointId(2), depth: 0 }));
    }

    #[test]
    fn pinch_first_images() {
        let mut u = Universe::with_points(q(), 4);
        let eps = Dist::frac(1, 2);
        let (phi, psi) = u.pinching_pair(PointId(0), eps.clone()).unwrap();
        let c = u.apply_at(psi, PointId(0), 1).unwrap();
        assert_eq!(u.apply_at(phi, PointId(0), 1).unwrap(), PointId(0));
        assert_eq!(u.d(c, PointId(0)), &eps);
    }

    #[test]
    fn pinch_cross_distance_to_c0() {
        // a_j very close to a, a_n further out: the image of a_n must sit at
        // distance ε from c_0, anything shorter breaks the triangle through c_j
        let mut u = Universe::with_points(q(), 1);
        let a = PointId(0);
        let aj = u.generator_mut().realize_type(&ExtensionRequest::single(a, Dist::frac(1, 100))).unwrap();
        let an = u
            .generator_mut()
            .realize_type(&ExtensionRequest::new(vec![(a, Dist::frac(3, 10)), (aj, Dist::frac(29, 100))]))
            .unwrap();
        let eps = Dist::int(1);
        let (phi, psi) = u.pinching_pair(a, eps.clone()).unwrap();
        let c0 = u.apply_at(psi, a, 1).unwrap();
        let cj = u.apply_at(psi, aj, 1).unwrap();
        let bn = u.apply_at(phi, an, 1).unwrap();
        assert_eq!(u.d(bn, c0), &eps);
        assert_eq!(u.d(bn, cj), &Dist::frac(99, 100));
        let m = q();
        let short = m.max(&Dist::frac(3, 10), &Dist::frac(7, 10)).clone();
        assert!(m.sum(&short, u.d(c0, cj)) < *u.d(bn, cj));
    }

    #[test]
    fn pinch_twenty_advances() {
        let mut u = Universe::with_points(q(), 6);
        let a = PointId(0);
        let eps = Dist::int(1);
        let (phi, psi) = u.pinching_pair(a, eps.clone()).unwrap();
        for _ in 0..20 {
            u.advance(phi).unwrap();
            assert!(explored_is_isometric(&u, phi) && explored_is_isometric(&u, psi));
        }
        let m = u.monoid().clone();
        for (x, y) in u.explored(phi) {
            let z = u.lookup(psi, x).unwrap();
            let al = u.d(a, x).clone();
            if al >= eps {
                assert_eq!(y, z);
            } else {
                assert_ne!(y, z);
                assert!(u.d(y, z) >= &m.residual(&eps, &al));
            }
        }
        assert!(validate_space(u.generator().space()).is_ok());
    }

    #[test]
    fn spread_twenty_advances() {
        let mut u = Universe::with_points(q(), 6);
        let a = PointId(0);
        let eps = Dist::frac(1, 2);
        let (sig, th) = u.spreading_pair(a, eps.clone()).unwrap();
        assert_eq!(u.apply_at(sig, a, 1).unwrap(), a);
        assert_eq!(u.apply_at(th, a, 1).unwrap(), a);
        for _ in 0..20 {
            u.advance(sig).unwrap();
        }
        assert!(explored_is_isometric(&u, sig) && explored_is_isometric(&u, th));
        let ims = u.image(sig);
        let imt = u.image(th);
        for &x in &ims {
            if imt.iter().any(|&y| u.d(x, y) < &eps) {
                assert!(u.d(a, x) < &eps);
            }
        }
        // cross distances follow α_i ⊕ α_j
        let ex = u.explored(sig);
        let m = u.monoid().clone();
        for (i, &(xi, bi)) in ex.iter().enumerate() {
            for &(xj, _) in &ex[i..] {
                let cj = u.lookup(th, xj).unwrap();
                assert_eq!(u.d(bi, cj), &m.sum(u.d(a, xi), u.d(a, xj)));
            }
        }
    }

    #[test]
    fn compose_identity_and_associativity() {
        let mut u = Universe::with_points(q(), 6);
        let e1 = u.sample_embedding(1, 8).unwrap();
        let e2 = u.sample_embedding(2, 8).unwrap();
        let e3 = u.sample_embedding(3, 8).unwrap();
        let id = u.identity();
        let ie = u.compose(id, e1).unwrap();
        let e12 = u.compose(e1, e2).unwrap();
        let l = u.compose(e12, e3).unwrap();
        let e23 = u.compose(e2, e3).unwrap();
        let r = u.compose(e1, e23).unwrap();
        for p in 0..6 {
            let p = PointId(p);
            assert_eq!(u.apply_at(ie, p, 64).unwrap(), u.apply_at(e1, p, 64).unwrap());
            assert_eq!(u.apply_at(l, p, 64).unwrap(), u.apply_at(r, p, 64).unwrap());
        }
        for _ in 0..6 {
            u.advance(l).unwrap();
        }
        assert!(explored_is_isometric(&u, l));
    }

    #[test]
    fn compose_rejects_foreign_embedding() {
        let mut u = Universe::with_points(q(), 3);
        let mut v = Universe::with_points(q(), 3);
        let e = u.identity();
        let f = v.identity();
        assert_eq!(u.compose(e, f), Err(EmbedError::GeneratorMismatch));
    }

    #[test]
    fn samples_are_deterministic_and_varied() {
        let run = |seed| {
            let mut u = Universe::with_points(q(), 8);
            let e = u.sample_embedding(seed, 10).unwrap();
            assert!(explored_is_isometric(&u, e));
            u.explored(e)
        };
        assert_eq!(run(5), run(5));
        let distinct: BTreeSet<_> = (0..30).map(run).collect();
        assert!(distinct.len() > 20);
    }

    #[test]
    fn separation_singleton_case() {
        let mut u = Universe::with_points(q(), 5);
        let (a, b) = (PointId(1), PointId(3));
        let eps = Dist::frac(1, 3);
        let phi = PartialIsometry::from_pairs([(a, b)]);
        let s = u.separation_witness(&phi, a, b, &eps).unwrap();
        let sa = u.lookup(s, a).unwrap();
        assert_ne!(sa, b);
        assert!(u.d(sa, b) < &eps);
    }

    #[test]
    fn separation_non_isometric_case() {
        let mut u = Universe::with_points(q(), 6);
        // a ↦ b while φ already sends a elsewhere
        let phi = PartialIsometry::from_pairs([(PointId(0), PointId(2)), (PointId(1), PointId(3))]);
        let s = u.separation_witness(&phi, PointId(0), PointId(4), &Dist::int(1)).unwrap();
        assert_eq!(u.lookup(s, PointId(0)), Some(PointId(4)));
        assert!(disagreement(&u, s, &phi).is_some());
    }

    #[test]
    fn separation_generic_case() {
        let mut u = Universe::with_points(q(), 8);
        let pts: Vec<PointId> = (0..3).map(PointId).collect();
        let phi = PartialIsometry::identity(&pts);
        let s = u.separation_witness(&phi, PointId(0), PointId(0), &Dist::frac(1, 4)).unwrap();
        assert_eq!(u.lookup(s, PointId(0)), Some(PointId(0)));
        assert!(disagreement(&u, s, &phi).is_some());
        assert!(explored_is_isometric(&u, s));
        assert_eq!(u.separation_witness(&PartialIsometry::new(), PointId(0), PointId(0), &Dist::int(1)), Err(EmbedError::NoWitnessPossible));
    }

    #[test]
    fn pinch_rejects_zero_epsilon() {
        let mut u = Universe::with_points(q(), 2);
        assert_eq!(u.pinching_pair(PointId(0), Dist::int(0)), Err(EmbedError::ZeroEpsilon));
    }
}
