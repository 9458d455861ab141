//! Concrete homogeneous structures over a finite, growing truncation.
//!
//! Elements are `u64` ids into the current truncation. Group elements are
//! never stored whole: they are [`PartialMap`]s that get extended on demand
//! by back-and-forth, growing the truncation when no image is available.

pub mod groups;
pub mod linalg;
pub mod ops;
pub mod oracle;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rational::Rat;
use crate::rng::{derive, Rng};
use linalg::{code, digits, is_prime, Echelon};

pub type Elem = u64;
pub type ElemSet = BTreeSet<Elem>;

/// Largest universe a vector-space truncation may reach.
const MAX_VECTOR_ELEMS: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Kind {
    PureSet,
    DenseOrder,
    VecFq { q: u64 },
    /// The affine space underlying `VecFq`; only shipped as a fixture.
    AffineFq { q: u64 },
    CopiesKn { n: u64 },
    RandomGraph,
    RandomBipartite,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::PureSet => "pure_set",
            Kind::DenseOrder => "dense_order",
            Kind::VecFq { .. } => "vec_fq",
            Kind::AffineFq { .. } => "affine_fq",
            Kind::CopiesKn { .. } => "copies_kn",
            Kind::RandomGraph => "random_graph",
            Kind::RandomBipartite => "random_bipartite",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::VecFq { q } => write!(f, "vec_fq(q={q})"),
            Kind::AffineFq { q } => write!(f, "affine_fq(q={q})"),
            Kind::CopiesKn { n } => write!(f, "copies_kn(n={n})"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OligoError {
    #[error("search budget exhausted")]
    BudgetExceeded,
    #[error("tuples of different lengths")]
    LengthMismatch,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("set is not algebraically closed")]
    NotAclClosed,
    #[error("map is not a partial isomorphism")]
    NotPartialIso,
    #[error("bad structure parameter: {0}")]
    BadParameter(String),
    #[error("cannot parse element {0:?}")]
    Parse(String),
}

/// A finite partial map, remembering insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialMap {
    pairs: Vec<(Elem, Elem)>,
    fwd: BTreeMap<Elem, Elem>,
    bwd: BTreeMap<Elem, Elem>,
}

impl PartialMap {
    pub fn new() -> PartialMap {
        PartialMap::default()
    }

    pub fn identity_on<I: IntoIterator<Item = Elem>>(xs: I) -> PartialMap {
        let mut m = PartialMap::new();
        for x in xs {
            m.insert(x, x).expect("identity is injective");
        }
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (Elem, Elem)>>(pairs: I) -> Result<PartialMap, OligoError> {
        let mut m = PartialMap::new();
        for (x, y) in pairs {
            m.insert(x, y)?;
        }
        Ok(m)
    }

    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.fwd.get(&x).copied()
    }

    pub fn preimage(&self, y: Elem) -> Option<Elem> {
        self.bwd.get(&y).copied()
    }

    /// Adds `x ↦ y`. Re-adding an existing pair is a no-op; anything that
    /// would break functionality or injectivity is refused.
    pub fn insert(&mut self, x: Elem, y: Elem) -> Result<(), OligoError> {
        match (self.fwd.get(&x), self.bwd.get(&y)) {
            (Some(&y0), _) if y0 == y => Ok(()),
            (None, None) => {
                self.pairs.push((x, y));
                self.fwd.insert(x, y);
                self.bwd.insert(y, x);
                Ok(())
            }
            _ => Err(OligoError::NotPartialIso),
        }
    }

    /// Drops pairs added after the first `len`.
    pub fn truncate(&mut self, len: usize) {
        for (x, y) in self.pairs.drain(len..) {
            self.fwd.remove(&x);
            self.bwd.remove(&y);
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Elem, Elem)] {
        &self.pairs
    }

    pub fn domain(&self) -> Vec<Elem> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn image(&self) -> Vec<Elem> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn domain_set(&self) -> ElemSet {
        self.fwd.keys().copied().collect()
    }

    pub fn image_set(&self) -> ElemSet {
        self.bwd.keys().copied().collect()
    }

    pub fn inverse(&self) -> PartialMap {
        PartialMap::from_pairs(self.pairs.iter().map(|&(x, y)| (y, x))).expect("inverse of injective map")
    }

    /// `self ∘ other` where both are defined.
    pub fn compose(&self, other: &PartialMap) -> PartialMap {
        let pairs = other.pairs.iter().filter_map(|&(x, y)| self.get(y).map(|z| (x, z)));
        PartialMap::from_pairs(pairs).expect("composition of injective maps")
    }

    pub fn map_tuple(&self, t: &[Elem]) -> Option<Vec<Elem>> {
        t.iter().map(|&x| self.get(x)).collect()
    }

    pub fn map_set(&self, s: &ElemSet) -> Option<ElemSet> {
        s.iter().map(|&x| self.get(x)).collect()
    }

    pub fn restrict(&self, keep: &ElemSet) -> PartialMap {
        PartialMap::from_pairs(self.pairs.iter().copied().filter(|(x, _)| keep.contains(x))).expect("restriction")
    }

    pub fn fixes(&self, s: &ElemSet) -> bool {
        s.iter().all(|&x| self.get(x) == Some(x))
    }
}

impl Serialize for PartialMap {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.pairs.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PartialMap {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<PartialMap, D::Error> {
        let pairs = Vec::<(Elem, Elem)>::deserialize(de)?;
        PartialMap::from_pairs(pairs).map_err(serde::de::Error::custom)
    }
}

/// An invariant-describable subset of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subuniverse {
    Whole,
    Empty,
    /// One side of a bipartite graph.
    Side(bool),
    /// Span of e2, e4, … (digit positions 1, 3, … counting from zero).
    EvenSpan,
    /// Elements with dyadic value: dense and codense in the order.
    Dyadic,
    Finite(ElemSet),
}

impl Subuniverse {
    pub fn contains(&self, s: &Structure, e: Elem) -> bool {
        match self {
            Subuniverse::Whole => true,
            Subuniverse::Empty => false,
            Subuniverse::Side(b) => s.side(e) == *b,
            Subuniverse::EvenSpan => s.vector(e).iter().step_by(2).all(|&d| d == 0),
            Subuniverse::Dyadic => s.value(e).is_dyadic(),
            Subuniverse::Finite(set) => set.contains(&e),
        }
    }

    pub fn filter(&self, s: &Structure, xs: &ElemSet) -> ElemSet {
        xs.iter().copied().filter(|&e| self.contains(s, e)).collect()
    }
}

/// Membership in some `acl(A)`, without listing it.
#[derive(Debug, Clone)]
pub enum Closure {
    Linear { origin: Vec<u64>, span: Echelon },
    Set(ElemSet),
}

impl Closure {
    pub fn contains(&self, s: &Structure, e: Elem) -> bool {
        match self {
            Closure::Linear { origin, span } => {
                let mut v = s.vector(e);
                linalg::axpy(s.q(), &mut v, s.q() - 1, origin);
                span.contains(&v)
            }
            Closure::Set(set) => set.contains(&e),
        }
    }
}

/// Outcome of a bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Search<T> {
    Found(T),
    /// The whole space was searched.
    Exhausted,
    Budget,
}

#[derive(Debug, Clone)]
pub struct Structure {
    kind: Kind,
    /// points (PureSet), copies (CopiesKn) or dimension (VecFq, AffineFq)
    size: u64,
    values: Vec<Rat>,
    /// lower triangle: adj[i][j] for j < i
    adj: Vec<Vec<bool>>,
    side: Vec<bool>,
    seed: u64,
}

impl Structure {
    /// Default truncation: 8 points, dimension 3, or 3 copies.
    pub fn new(kind: Kind, seed: u64) -> Result<Structure, OligoError> {
        let size = match kind {
            Kind::VecFq { .. } | Kind::AffineFq { .. } | Kind::CopiesKn { .. } => 3,
            _ => 8,
        };
        Structure::with_size(kind, size, seed)
    }

    /// `size` counts points, copies or dimensions depending on the kind.
    pub fn with_size(kind: Kind, size: u64, seed: u64) -> Result<Structure, OligoError> {
        match kind {
            Kind::VecFq { q } | Kind::AffineFq { q } if !is_prime(q) => {
                return Err(OligoError::BadParameter(format!("q = {q} is not prime")))
            }
            Kind::VecFq { q } | Kind::AffineFq { q } if q.checked_pow(size as u32).is_none_or(|n| n > MAX_VECTOR_ELEMS) => {
                return Err(OligoError::BadParameter(format!("dimension {size} too large")))
            }
            Kind::CopiesKn { n } if n == 0 => return Err(OligoError::BadParameter("n = 0".into())),
            _ => {}
        }
        let mut s = Structure { kind, size: 0, values: Vec::new(), adj: Vec::new(), side: Vec::new(), seed };
        match kind {
            Kind::DenseOrder => {
                s.values = (0..size as i64).map(Rat::int).collect();
            }
            Kind::RandomGraph | Kind::RandomBipartite => {
                for _ in 0..size {
                    s.grow();
                }
            }
            _ => s.size = size,
        }
        Ok(s)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn len(&self) -> u64 {
        match self.kind {
            Kind::PureSet => self.size,
            Kind::DenseOrder => self.values.len() as u64,
            Kind::VecFq { q } | Kind::AffineFq { q } => q.pow(self.size as u32),
            Kind::CopiesKn { n } => self.size * n,
            Kind::RandomGraph | Kind::RandomBipartite => self.adj.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.len()
    }

    pub fn contains(&self, e: Elem) -> bool {
        e < self.len()
    }

    // ----- raw relations -----

    pub fn q(&self) -> u64 {
        match self.kind {
            Kind::VecFq { q } | Kind::AffineFq { q } => q,
            _ => 0,
        }
    }

    pub fn dim(&self) -> u32 {
        match self.kind {
            Kind::VecFq { .. } | Kind::AffineFq { .. } => self.size as u32,
            _ => 0,
        }
    }

    /// Coordinates of a vector element (empty for other kinds).
    pub fn vector(&self, e: Elem) -> Vec<u64> {
        match self.kind {
            Kind::VecFq { q } | Kind::AffineFq { q } => digits(q, self.size as u32, e),
            _ => Vec::new(),
        }
    }

    pub fn value(&self, e: Elem) -> &Rat {
        &self.values[e as usize]
    }

    pub fn copy_of(&self, e: Elem) -> u64 {
        match self.kind {
            Kind::CopiesKn { n } => e / n,
            _ => e,
        }
    }

    pub fn adjacent(&self, a: Elem, b: Elem) -> bool {
        match a.cmp(&b) {
            Ordering::Equal => false,
            Ordering::Less => self.adj[b as usize][a as usize],
            Ordering::Greater => self.adj[a as usize][b as usize],
        }
    }

    pub fn side(&self, e: Elem) -> bool {
        self.side.get(e as usize).copied().unwrap_or(false)
    }

    fn coin(&self, i: u64, j: u64) -> bool {
        derive(self.seed, (i << 32) ^ j) & 1 == 1
    }

    // ----- orbits and closure -----

    /// Same orbit under the automorphism group; by homogeneity this is
    /// equality of quantifier-free types.
    pub fn orbit_eq(&self, u: &[Elem], v: &[Elem]) -> Result<bool, OligoError> {
        if u.len() != v.len() {
            return Err(OligoError::LengthMismatch);
        }
        let k = u.len();
        for i in 0..k {
            for j in 0..i {
                if (u[i] == u[j]) != (v[i] == v[j]) {
                    return Ok(false);
                }
            }
        }
        let pairwise = |f: &dyn Fn(Elem, Elem) -> bool| (0..k).all(|i| (0..i).all(|j| f(u[i], u[j]) == f(v[i], v[j])));
        Ok(match self.kind {
            Kind::PureSet => true,
            Kind::DenseOrder => pairwise(&|a, b| self.value(a) < self.value(b)),
            Kind::VecFq { .. } => self.same_dependencies(u.iter().map(|&e| self.vector(e)), v.iter().map(|&e| self.vector(e))),
            Kind::AffineFq { .. } => {
                k == 0 || self.same_dependencies(self.differences(u).into_iter(), self.differences(v).into_iter())
            }
            Kind::CopiesKn { .. } => pairwise(&|a, b| self.copy_of(a) == self.copy_of(b)),
            Kind::RandomGraph => pairwise(&|a, b| self.adjacent(a, b)),
            Kind::RandomBipartite => {
                (0..k).all(|i| self.side(u[i]) == self.side(v[i])) && pairwise(&|a, b| self.adjacent(a, b))
            }
        })
    }

    /// `t_i - t_0` for i ≥ 1.
    fn differences(&self, t: &[Elem]) -> Vec<Vec<u64>> {
        let q = self.q();
        let base = self.vector(t[0]);
        t[1..]
            .iter()
            .map(|&e| {
                let mut v = self.vector(e);
                linalg::axpy(q, &mut v, q - 1, &base);
                v
            })
            .collect()
    }

    fn same_dependencies<I: Iterator<Item = Vec<u64>>, J: Iterator<Item = Vec<u64>>>(&self, u: I, v: J) -> bool {
        let mut eu = Echelon::new(self.q(), self.dim());
        let mut ev = Echelon::new(self.q(), self.dim());
        u.zip(v).all(|(a, b)| eu.insert(&a) == ev.insert(&b))
    }

    pub fn acl(&self, a: &ElemSet) -> ElemSet {
        match self.kind {
            Kind::VecFq { q } => {
                let mut ech = Echelon::new(q, self.dim());
                for &e in a {
                    ech.insert(&self.vector(e));
                }
                ech.span_codes().into_iter().collect()
            }
            Kind::AffineFq { q } => {
                let Some(&a0) = a.iter().next() else { return ElemSet::new() };
                let t: Vec<Elem> = a.iter().copied().collect();
                let mut ech = Echelon::new(q, self.dim());
                for d in self.differences(&t) {
                    ech.insert(&d);
                }
                let base = self.vector(a0);
                ech.span_codes()
                    .into_iter()
                    .map(|c| {
                        let mut v = digits(q, self.dim(), c);
                        linalg::axpy(q, &mut v, 1, &base);
                        code(q, &v)
                    })
                    .collect()
            }
            Kind::CopiesKn { n } => {
                let copies: BTreeSet<u64> = a.iter().map(|&e| self.copy_of(e)).collect();
                copies.into_iter().flat_map(|c| c * n..(c + 1) * n).collect()
            }
            _ => a.clone(),
        }
    }

    pub fn closure(&self, a: &ElemSet) -> Closure {
        match self.kind {
            Kind::VecFq { q } | Kind::AffineFq { q } => {
                let t: Vec<Elem> = a.iter().copied().collect();
                let mut span = Echelon::new(q, self.dim());
                let origin = match (self.kind, t.first()) {
                    (Kind::AffineFq { .. }, None) => return Closure::Set(ElemSet::new()),
                    (Kind::AffineFq { .. }, Some(&a0)) => {
                        for d in self.differences(&t) {
                            span.insert(&d);
                        }
                        self.vector(a0)
                    }
                    _ => {
                        for &e in &t {
                            span.insert(&self.vector(e));
                        }
                        Vec::new()
                    }
                };
                Closure::Linear { origin, span }
            }
            _ => Closure::Set(self.acl(a)),
        }
    }

    pub fn acl_of(&self, a: &[Elem]) -> ElemSet {
        self.acl(&a.iter().copied().collect())
    }

    pub fn is_acl_closed(&self, a: &ElemSet) -> bool {
        self.acl(a) == *a
    }

    pub fn is_partial_iso(&self, m: &PartialMap) -> bool {
        self.orbit_eq(&m.domain(), &m.image()).unwrap_or(false)
    }

    // ----- back-and-forth -----

    /// Every element that `x` may be sent to extending `m`, ascending.
    pub fn candidates(&self, m: &PartialMap, x: Elem) -> Vec<Elem> {
        self.candidate_iter(m, x).collect()
    }

    /// [`Structure::candidates`], lazily; the linear kinds never list
    /// their whole universe up front.
    pub fn candidate_iter<'a>(&'a self, m: &PartialMap, x: Elem) -> Box<dyn Iterator<Item = Elem> + 'a> {
        if let Some(y) = m.get(x) {
            return Box::new(std::iter::once(y));
        }
        let used = m.image_set();
        let free = |y: &Elem| !used.contains(y);
        let list: Vec<Elem> = match self.kind {
            Kind::PureSet => self.elements().filter(free).collect(),
            Kind::DenseOrder => {
                let (lo, hi) = self.image_bounds(m, x);
                self.elements()
                    .filter(free)
                    .filter(|&y| lo.is_none_or(|l| l < self.value(y)) && hi.is_none_or(|h| self.value(y) < h))
                    .collect()
            }
            Kind::VecFq { .. } => {
                let dom: Vec<Vec<u64>> = m.pairs().iter().map(|p| self.vector(p.0)).collect();
                let img: Vec<Vec<u64>> = m.pairs().iter().map(|p| self.vector(p.1)).collect();
                return self.linear_candidates(&dom, &img, &self.vector(x), None);
            }
            Kind::AffineFq { .. } => {
                let Some(&(_, i0)) = m.pairs().first() else { return Box::new(self.elements()) };
                let mut dt = m.domain();
                dt.push(x);
                let dd = self.differences(&dt);
                let id = self.differences(&m.image());
                let (target, dom) = dd.split_last().expect("x is last");
                return self.linear_candidates(dom, &id, target, Some(i0));
            }
            Kind::CopiesKn { n } => {
                if let Some(&(_, i)) = m.pairs().iter().find(|p| self.copy_of(p.0) == self.copy_of(x)) {
                    let c = self.copy_of(i);
                    (c * n..(c + 1) * n).filter(free).collect()
                } else {
                    let touched: BTreeSet<u64> = used.iter().map(|&e| self.copy_of(e)).collect();
                    self.elements().filter(|&y| !touched.contains(&self.copy_of(y))).collect()
                }
            }
            Kind::RandomGraph | Kind::RandomBipartite => self
                .elements()
                .filter(free)
                .filter(|&y| self.kind != Kind::RandomBipartite || self.side(y) == self.side(x))
                .filter(|&y| m.pairs().iter().all(|&(d, i)| self.adjacent(x, d) == self.adjacent(y, i)))
                .collect(),
        };
        Box::new(list.into_iter())
    }

    /// Candidate images for a vector `target` given `dom ↦ img`; with
    /// `origin` set, everything is relative to it (affine case).
    fn linear_candidates<'a>(
        &'a self,
        dom: &[Vec<u64>],
        img: &[Vec<u64>],
        target: &[u64],
        origin: Option<Elem>,
    ) -> Box<dyn Iterator<Item = Elem> + 'a> {
        let q = self.q();
        let mut ed = Echelon::new(q, self.dim());
        let mut ei = Echelon::new(q, self.dim());
        let mut basis_img = Vec::new();
        for (d, i) in dom.iter().zip(img) {
            if ed.insert(d).is_none() {
                basis_img.push(i.clone());
            }
            ei.insert(i);
        }
        let o = origin.map(|o| self.vector(o)).unwrap_or_else(|| vec![0; self.dim() as usize]);
        let (res, c) = ed.reduce(target);
        if res.iter().all(|&r| r == 0) {
            let mut y = o;
            for (f, b) in c.iter().zip(&basis_img) {
                linalg::axpy(q, &mut y, *f, b);
            }
            return Box::new(std::iter::once(code(q, &y)));
        }
        Box::new(self.elements().filter(move |&e| {
            let mut v = self.vector(e);
            linalg::axpy(q, &mut v, q - 1, &o);
            !ei.contains(&v)
        }))
    }

    /// Would `x ↦ y` extend `m` to a partial isomorphism?
    pub fn is_candidate(&self, m: &PartialMap, x: Elem, y: Elem) -> bool {
        match (m.get(x), m.preimage(y)) {
            (Some(y0), _) => y0 == y,
            (None, Some(_)) => false,
            (None, None) => {
                let mut u = m.domain();
                let mut v = m.image();
                u.push(x);
                v.push(y);
                self.orbit_eq(&u, &v).unwrap_or(false)
            }
        }
    }

    /// Values of the images of x's nearest dom-neighbours below and above.
    fn image_bounds<'a>(&'a self, m: &PartialMap, x: Elem) -> (Option<&'a Rat>, Option<&'a Rat>) {
        let vx = self.value(x);
        let mut lo: Option<&Rat> = None;
        let mut hi: Option<&Rat> = None;
        for &(d, i) in m.pairs() {
            let vi = self.value(i);
            match self.value(d).cmp(vx) {
                Ordering::Less if lo.is_none_or(|l| vi > l) => lo = Some(vi),
                Ordering::Greater if hi.is_none_or(|h| vi < h) => hi = Some(vi),
                _ => {}
            }
        }
        (lo, hi)
    }

    /// Is the image of `x` under any extension of `m` determined?
    pub fn forced(&self, m: &PartialMap, x: Elem) -> bool {
        if m.get(x).is_some() {
            return true;
        }
        match self.kind {
            Kind::VecFq { q } => {
                let mut ech = Echelon::new(q, self.dim());
                for &(d, _) in m.pairs() {
                    ech.insert(&self.vector(d));
                }
                ech.contains(&self.vector(x))
            }
            Kind::AffineFq { q } => {
                if m.is_empty() {
                    return false;
                }
                let mut t = m.domain();
                t.push(x);
                let mut diffs = self.differences(&t);
                let target = diffs.pop().expect("x is last");
                let mut ech = Echelon::new(q, self.dim());
                for d in diffs {
                    ech.insert(&d);
                }
                ech.contains(&target)
            }
            Kind::CopiesKn { .. } => m.pairs().iter().any(|p| self.copy_of(p.0) == self.copy_of(x)),
            _ => false,
        }
    }

    /// Enlarges the truncation so that some new element realizes the type
    /// of `x` over `m`'s image. False when the image is forced anyway.
    pub fn grow_toward(&mut self, m: &PartialMap, x: Elem) -> bool {
        !self.forced(m, x) && self.grow_realizing(m, x)
    }

    /// The growth step of [`Structure::grow_toward`] without the
    /// forcedness test: for the linear kinds and copies this is a blind
    /// [`Structure::grow`], for the others a new element of x's type.
    pub fn grow_realizing(&mut self, m: &PartialMap, x: Elem) -> bool {
        match self.kind {
            Kind::DenseOrder => {
                let (lo, hi) = self.image_bounds(m, x);
                let (lo, hi) = (lo.cloned(), hi.cloned());
                let d = between(lo.as_ref(), hi.as_ref(), true);
                let n = between(lo.as_ref(), hi.as_ref(), false);
                self.values.push(d);
                self.values.push(n);
                true
            }
            Kind::RandomGraph | Kind::RandomBipartite => {
                let want: BTreeMap<Elem, bool> = m.pairs().iter().map(|&(d, i)| (i, self.adjacent(x, d))).collect();
                let side = self.side(x);
                self.push_vertex(side, |v| want.get(&v).copied());
                true
            }
            _ => self.grow(),
        }
    }

    /// One more unit of truncation, independent of any type. False when
    /// the size cap is reached.
    pub fn grow(&mut self) -> bool {
        match self.kind {
            Kind::PureSet | Kind::CopiesKn { .. } => self.size += 1,
            Kind::DenseOrder => {
                let top = self.values.iter().max().cloned().unwrap_or_else(|| Rat::int(-1));
                self.values.push(top.floor() + Rat::one());
            }
            Kind::VecFq { q } | Kind::AffineFq { q } => {
                if q.pow(self.size as u32 + 1) > MAX_VECTOR_ELEMS {
                    return false;
                }
                self.size += 1;
            }
            Kind::RandomGraph => self.push_vertex(false, |_| None),
            Kind::RandomBipartite => {
                let side = self.adj.len() % 2 == 1;
                self.push_vertex(side, |_| None)
            }
        }
        true
    }

    fn push_vertex(&mut self, side: bool, fixed: impl Fn(Elem) -> Option<bool>) {
        let v = self.adj.len() as u64;
        let bip = self.kind == Kind::RandomBipartite;
        let row = (0..v)
            .map(|u| {
                if bip && self.side(u) == side {
                    false
                } else {
                    fixed(u).unwrap_or_else(|| self.coin(v, u))
                }
            })
            .collect();
        self.adj.push(row);
        self.side.push(side);
    }

    /// Grows until the truncation has at least `extra` unused elements of
    /// every kind a search over `used` might need: free points, free
    /// coordinates (both parities), untouched copies, or values in every gap.
    pub fn ensure_room(&mut self, used: &ElemSet, extra: usize) {
        let extra = extra as u64;
        match self.kind {
            Kind::PureSet => {
                while self.len() < used.len() as u64 + extra {
                    self.grow();
                }
            }
            Kind::VecFq { .. } | Kind::AffineFq { .. } => {
                let top = used
                    .iter()
                    .map(|&e| self.vector(e).iter().rposition(|&d| d != 0).map_or(0, |p| p as u64 + 1))
                    .max()
                    .unwrap_or(0);
                while self.size < top + 2 * extra + 1 && self.grow() {}
            }
            Kind::CopiesKn { .. } => {
                let top = used.iter().map(|&e| self.copy_of(e) + 1).max().unwrap_or(0);
                while self.size < top + extra {
                    self.grow();
                }
            }
            Kind::DenseOrder => {
                let mut cuts: Vec<Rat> = used.iter().map(|&e| self.value(e).clone()).collect();
                cuts.sort();
                let mut gaps: Vec<(Option<Rat>, Option<Rat>)> = Vec::new();
                let mut prev = None;
                for c in cuts {
                    gaps.push((prev.clone(), Some(c.clone())));
                    prev = Some(c);
                }
                gaps.push((prev, None));
                for (lo, hi) in gaps {
                    for dyadic in [true, false] {
                        let inside = |s: &Structure| {
                            s.values
                                .iter()
                                .filter(|v| v.is_dyadic() == dyadic)
                                .filter(|v| lo.as_ref().is_none_or(|l| l < *v) && hi.as_ref().is_none_or(|h| *v < h))
                                .count() as u64
                        };
                        let mut have = inside(self);
                        let mut hi2 = hi.clone();
                        while have < extra {
                            let v = between(lo.as_ref(), hi2.as_ref(), dyadic);
                            hi2 = Some(v.clone());
                            self.values.push(v);
                            have += 1;
                        }
                    }
                }
            }
            Kind::RandomGraph | Kind::RandomBipartite => {
                for _ in 0..extra {
                    self.grow();
                }
            }
        }
    }

    /// Like [`Structure::ensure_room`], but linear kinds only grow until
    /// `extra` dimensions lie outside the span of `used`.
    pub fn make_room(&mut self, used: &ElemSet, extra: usize) {
        match self.closure(used) {
            Closure::Linear { span, .. } => while (self.dim() as usize) < span.rank() + extra + 1 && self.grow() {},
            Closure::Set(_) => self.ensure_room(used, extra),
        }
    }

    /// Extends `m` over `x` with `x` itself if allowed, else the lowest
    /// candidate `accept` likes, growing toward x's type at most `budget`
    /// times.
    pub fn extend_with(
        &mut self,
        m: &mut PartialMap,
        x: Elem,
        accept: &mut dyn FnMut(&Structure, Elem) -> bool,
        budget: usize,
    ) -> Result<Elem, OligoError> {
        if let Some(y) = m.get(x) {
            return Ok(y);
        }
        for round in 0..=budget {
            let pick = if self.is_candidate(m, x, x) && accept(self, x) {
                Some(x)
            } else {
                self.candidate_iter(m, x).find(|&y| accept(self, y))
            };
            if let Some(y) = pick {
                m.insert(x, y)?;
                return Ok(y);
            }
            if round == budget || !self.grow_toward(m, x) {
                break;
            }
        }
        Err(OligoError::BudgetExceeded)
    }

    pub fn extend(&mut self, m: &mut PartialMap, x: Elem, budget: usize) -> Result<Elem, OligoError> {
        self.extend_with(m, x, &mut |_, _| true, budget)
    }

    /// Like [`Structure::extend`] with a uniformly random candidate.
    pub fn extend_random(&mut self, m: &mut PartialMap, x: Elem, rng: &mut Rng, budget: usize) -> Result<Elem, OligoError> {
        if let Some(y) = m.get(x) {
            return Ok(y);
        }
        for round in 0..=budget {
            if let Some(&y) = self.candidates(m, x).choose(rng) {
                m.insert(x, y)?;
                return Ok(y);
            }
            if round == budget || !self.grow_toward(m, x) {
                break;
            }
        }
        Err(OligoError::BudgetExceeded)
    }

    /// Extends `m` so that `y` is in its image.
    pub fn extend_inverse(&mut self, m: &mut PartialMap, y: Elem, budget: usize) -> Result<Elem, OligoError> {
        let mut inv = m.inverse();
        let x = self.extend(&mut inv, y, budget)?;
        m.insert(x, y)?;
        Ok(x)
    }

    pub fn extend_automorphism(&mut self, phi: &PartialMap, target: Elem, budget: usize) -> Result<PartialMap, OligoError> {
        if !self.is_partial_iso(phi) {
            return Err(OligoError::NotPartialIso);
        }
        let mut m = phi.clone();
        self.extend(&mut m, target, budget)?;
        Ok(m)
    }

    /// Depth-first search for images of `tuple` extending `base`, inside
    /// the current truncation. `ok` prunes partial image tuples.
    pub fn search_images(
        &self,
        base: &PartialMap,
        tuple: &[Elem],
        ok: &mut dyn FnMut(&Structure, &[Elem]) -> bool,
        budget: &mut u64,
    ) -> Search<Vec<Elem>> {
        let mut cur = base.clone();
        let mut out = Vec::with_capacity(tuple.len());
        self.search_rec(&mut cur, tuple, &mut out, ok, budget)
    }

    fn search_rec(
        &self,
        cur: &mut PartialMap,
        tuple: &[Elem],
        out: &mut Vec<Elem>,
        ok: &mut dyn FnMut(&Structure, &[Elem]) -> bool,
        budget: &mut u64,
    ) -> Search<Vec<Elem>> {
        let j = out.len();
        if j == tuple.len() {
            return Search::Found(out.clone());
        }
        let mark = cur.len();
        let mut hit_budget = false;
        for y in self.candidates(cur, tuple[j]) {
            if *budget == 0 {
                return Search::Budget;
            }
            *budget -= 1;
            if cur.insert(tuple[j], y).is_err() {
                continue;
            }
            out.push(y);
            if ok(self, out) {
                match self.search_rec(cur, tuple, out, ok, budget) {
                    Search::Found(t) => return Search::Found(t),
                    Search::Budget => hit_budget = true,
                    Search::Exhausted => {}
                }
            }
            out.pop();
            cur.truncate(mark);
            if hit_budget {
                return Search::Budget;
            }
        }
        Search::Exhausted
    }

    /// Like [`Structure::search_images`], but each coordinate only ranges
    /// over [`Structure::orbit_reps`] for `params`. `ok` sees the map after
    /// each placement together with the number of coordinates placed.
    pub fn search_reps(
        &self,
        base: &PartialMap,
        tuple: &[Elem],
        params: &ElemSet,
        ok: &mut dyn FnMut(&Structure, &PartialMap, usize) -> bool,
        budget: &mut u64,
    ) -> Search<PartialMap> {
        let mut cur = base.clone();
        self.reps_rec(&mut cur, tuple, 0, params, ok, budget)
    }

    fn reps_rec(
        &self,
        cur: &mut PartialMap,
        tuple: &[Elem],
        j: usize,
        params: &ElemSet,
        ok: &mut dyn FnMut(&Structure, &PartialMap, usize) -> bool,
        budget: &mut u64,
    ) -> Search<PartialMap> {
        if j == tuple.len() {
            return Search::Found(cur.clone());
        }
        let mark = cur.len();
        let mut hit_budget = false;
        for y in self.orbit_reps(cur, tuple[j], params) {
            if *budget == 0 {
                return Search::Budget;
            }
            *budget -= 1;
            if cur.insert(tuple[j], y).is_err() {
                continue;
            }
            if ok(self, cur, j + 1) {
                match self.reps_rec(cur, tuple, j + 1, params, ok, budget) {
                    Search::Found(m) => return Search::Found(m),
                    Search::Budget => hit_budget = true,
                    Search::Exhausted => {}
                }
            }
            cur.truncate(mark);
            if hit_budget {
                return Search::Budget;
            }
        }
        Search::Exhausted
    }

    /// A random automorphism of the truncation fixing `fixed` pointwise,
    /// built by back-and-forth without growth. `None` if the truncation
    /// is not homogeneous enough to complete it.
    pub fn random_stabilizer_element(&self, fixed: &ElemSet, rng: &mut Rng) -> Option<PartialMap> {
        let linear = matches!(self.kind, Kind::VecFq { .. } | Kind::AffineFq { .. });
        let mut m = PartialMap::identity_on(fixed.iter().copied());
        for x in self.elements() {
            if m.get(x).is_some() || (linear && self.forced(&m, x)) {
                continue;
            }
            let y = *self.candidates(&m, x).choose(rng)?;
            m.insert(x, y).ok()?;
        }
        if linear {
            // the rest is determined by the free choices
            let gens = m.clone();
            for x in self.elements() {
                if m.get(x).is_none() {
                    let y = self.candidate_iter(&gens, x).next()?;
                    m.insert(x, y).ok()?;
                }
            }
        }
        Some(m)
    }

    /// Candidates for `x` over `m`, one per orbit of the pointwise
    /// stabilizer of `params ∪ im(m)`. A search that only needs to respect
    /// `params` loses nothing by trying just these.
    pub fn orbit_reps(&self, m: &PartialMap, x: Elem, params: &ElemSet) -> Vec<Elem> {
        if let Some(y) = m.get(x) {
            return vec![y];
        }
        let mut over = params.clone();
        over.extend(m.image());
        if let Kind::VecFq { .. } | Kind::AffineFq { .. } = self.kind {
            if self.forced(m, x) {
                return self.candidate_iter(m, x).collect();
            }
            // inside the closure every point is its own orbit, outside
            // there is a single orbit
            let cl = self.closure(&over);
            let mut out: Vec<Elem> = self.acl(&over).into_iter().filter(|&y| self.is_candidate(m, x, y)).collect();
            out.extend(self.elements().find(|&e| !cl.contains(self, e)));
            return out;
        }
        let cl = self.acl(&over);
        let mut seen = BTreeSet::new();
        self.candidate_iter(m, x).filter(|&y| seen.insert(self.type_key(&over, &cl, y))).collect()
    }

    /// Determines the type of `y` over `over` (whose closure is `cl`).
    fn type_key(&self, over: &ElemSet, cl: &ElemSet, y: Elem) -> Vec<u64> {
        if cl.contains(&y) {
            return vec![0, y];
        }
        match self.kind {
            Kind::CopiesKn { .. } => {
                let c = self.copy_of(y);
                if over.iter().any(|&e| self.copy_of(e) == c) {
                    vec![1, c]
                } else {
                    vec![2]
                }
            }
            Kind::DenseOrder => vec![1, over.iter().filter(|&&e| self.value(e) < self.value(y)).count() as u64],
            Kind::RandomGraph | Kind::RandomBipartite => {
                let mut k = vec![1, self.side(y) as u64];
                k.extend(over.iter().map(|&e| self.adjacent(y, e) as u64));
                k
            }
            _ => vec![1],
        }
    }

    // ----- element syntax -----

    pub fn format_elem(&self, e: Elem) -> String {
        match self.kind {
            Kind::VecFq { .. } | Kind::AffineFq { .. } => {
                let terms: Vec<String> = self
                    .vector(e)
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d != 0)
                    .map(|(i, &d)| if d == 1 { format!("e{}", i + 1) } else { format!("{d}e{}", i + 1) })
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join("+")
                }
            }
            _ => e.to_string(),
        }
    }

    /// Parses an element, growing the truncation to contain it.
    pub fn parse_elem(&mut self, s: &str) -> Result<Elem, OligoError> {
        let bad = || OligoError::Parse(s.to_string());
        let s = s.trim();
        let e = match self.kind {
            Kind::VecFq { q } | Kind::AffineFq { q } => {
                let mut coords: Vec<u64> = Vec::new();
                if s != "0" {
                    for term in s.split('+') {
                        let (c, i) = term.trim().split_once('e').ok_or_else(bad)?;
                        let c: u64 = if c.is_empty() { 1 } else { c.parse().map_err(|_| bad())? };
                        let i: usize = i.parse().map_err(|_| bad())?;
                        if i == 0 {
                            return Err(bad());
                        }
                        if coords.len() < i {
                            coords.resize(i, 0);
                        }
                        coords[i - 1] = (coords[i - 1] + c) % q;
                    }
                }
                while (self.dim() as usize) < coords.len() {
                    if !self.grow() {
                        return Err(OligoError::BadParameter("dimension too large".into()));
                    }
                }
                coords.resize(self.dim() as usize, 0);
                code(q, &coords)
            }
            _ => s.parse().map_err(|_| bad())?,
        };
        while !self.contains(e) {
            self.grow();
        }
        Ok(e)
    }

    pub fn parse_set(&mut self, s: &str) -> Result<ElemSet, OligoError> {
        s.split(',').filter(|t| !t.trim().is_empty()).map(|t| self.parse_elem(t)).collect()
    }
}

/// A dyadic (or non-dyadic) rational strictly between the bounds.
fn between(lo: Option<&Rat>, hi: Option<&Rat>, dyadic: bool) -> Rat {
    let third = Rat::new(1, 3);
    match (lo, hi) {
        (None, None) if dyadic => Rat::zero(),
        (None, None) => third,
        (Some(l), None) => l.floor() + Rat::one() + if dyadic { Rat::zero() } else { third },
        (None, Some(h)) => h.floor() - Rat::one() - if dyadic { Rat::zero() } else { third },
        (Some(l), Some(h)) => {
            let mut denom = if dyadic { 1i64 } else { 3 };
            loop {
                let d = Rat::int(denom);
                let mut k = (l.clone() * d.clone()).floor() + Rat::one();
                while k.clone() / d.clone() < *h {
                    let (kn, _) = k.as_small().expect("small grid");
                    if dyadic || kn % 3 != 0 {
                        return k / d;
                    }
                    k = k + Rat::one();
                }
                denom *= 2;
            }
        }
    }
}
