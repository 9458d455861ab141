//! Semigroup inequalities over automorphism groups of oligomorphic
//! structures, and the non-Hausdorff witness built from a central element.
//!
//! A word `λ_n s λ_{n-1} s ⋯ s λ_0` is stored as its coefficient list
//! `[λ_0, …, λ_n]`. Coefficients are partial maps extended on demand.

use serde::{Deserialize, Serialize};

use crate::oligo::groups::Central;
use crate::oligo::{Closure, Elem, ElemSet, OligoError, PartialMap, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coef {
    Id,
    Map(PartialMap),
}

impl Coef {
    pub fn get(&self, x: Elem) -> Option<Elem> {
        match self {
            Coef::Id => Some(x),
            Coef::Map(m) => m.get(x),
        }
    }

    /// Could this coefficient send `y` outside `avoid`, possibly after
    /// extending it?
    fn can_avoid(&self, s: &Structure, y: Elem, avoid: &Closure) -> bool {
        match self {
            Coef::Id => !avoid.contains(s, y),
            Coef::Map(m) => match m.get(y) {
                Some(z) => !avoid.contains(s, z),
                None if s.forced(m, y) => s.candidates(m, y).iter().any(|&z| !avoid.contains(s, z)),
                None => true,
            },
        }
    }

    fn push_avoiding(&mut self, s: &mut Structure, y: Elem, avoid: &Closure, budget: usize) -> Result<Elem, OligoError> {
        match self {
            Coef::Id => Ok(y),
            Coef::Map(m) => s.extend_with(m, y, &mut |st, z| !avoid.contains(st, z), budget),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityWord<C> {
    /// λ_0, …, λ_n
    pub left: Vec<C>,
    /// η_0, …, η_m
    pub right: Vec<C>,
}

pub type Word = InequalityWord<Coef>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WordType {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("malformed word: need n ≥ m ≥ 0")]
    MalformedWord,
    #[error("wrong inequality type for this operation")]
    WrongType,
    #[error("sequence is not free: {0}")]
    NotFree(String),
    #[error("not central: generator {generator} disagrees at {element}")]
    NotCentral { generator: usize, element: Elem },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Oligo(#[from] OligoError),
}

impl<C> InequalityWord<C> {
    pub fn new(left: Vec<C>, right: Vec<C>) -> InequalityWord<C> {
        InequalityWord { left, right }
    }

    pub fn classify(&self) -> Result<WordType, WordError> {
        match (self.left.len(), self.right.len()) {
            (0, _) | (_, 0) => Err(WordError::MalformedWord),
            (n, m) if n < m => Err(WordError::MalformedWord),
            (n, m) if n == m => Ok(WordType::TypeI),
            _ => Ok(WordType::TypeII),
        }
    }
}

/// `c_k s ⋯ s c_0` at `x`, or `None` where something is undefined.
pub fn eval_side(coefs: &[Coef], s: &dyn Fn(Elem) -> Option<Elem>, x: Elem) -> Option<Elem> {
    let mut y = coefs[0].get(x)?;
    for c in &coefs[1..] {
        y = c.get(s(y)?)?;
    }
    Some(y)
}

/// A pair sequence `a_0, …, a_k` together with the points `f_i a_i` and
/// the base tuples `b ↦ b′`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeSeq {
    pub a: Vec<(Elem, Elem)>,
    pub fa: Vec<(Elem, Elem)>,
    pub b: Vec<Elem>,
    pub b_prime: Vec<Elem>,
}

fn coords(ps: &[(Elem, Elem)]) -> Vec<Elem> {
    ps.iter().flat_map(|&(x, y)| [x, y]).collect()
}

impl FreeSeq {
    /// Length in the sense of the number of transitions.
    pub fn len(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// acl of `f_0 a_0, …, f_i a_i` and `b`.
    fn closure_upto(&self, s: &Structure, i: usize) -> Closure {
        let mut pts: ElemSet = coords(&self.fa[..=i]).into_iter().collect();
        pts.extend(self.b.iter().copied());
        s.closure(&pts)
    }

    /// Both conditions of freeness, from scratch.
    pub fn verify(&self, s: &Structure) -> Result<(), WordError> {
        if self.a.is_empty() || self.a.len() != self.fa.len() {
            return Err(WordError::NotFree("empty or ragged sequence".into()));
        }
        let k = self.a.len() - 1;
        let mut u = coords(&self.fa[..k]);
        u.extend(&self.b);
        let mut v = coords(&self.a[1..]);
        v.extend(&self.b_prime);
        if !s.orbit_eq(&u, &v)? {
            return Err(WordError::NotFree("no δ carries f_i a_i to a_{i+1} over b ↦ b′".into()));
        }
        for i in 0..k {
            let cl = self.closure_upto(s, i);
            let (x, y) = self.fa[i + 1];
            if cl.contains(s, x) || cl.contains(s, y) {
                return Err(WordError::NotFree(format!("f_{} a_{} is algebraic over its predecessors", i + 1, i + 1)));
            }
        }
        Ok(())
    }
}

/// Starts a free sequence with `a_0 = (e_0, e_0)`, `f_0 e_0` outside
/// `acl(b)` in both coordinates; `delta` must map `b` to `b′`.
pub fn free_sequence_start(
    s: &mut Structure,
    f0: &mut (Coef, Coef),
    delta: &PartialMap,
    budget: usize,
) -> Result<FreeSeq, WordError> {
    let b = delta.domain();
    let b_prime = delta.image();
    let avoid = s.closure(&b.iter().copied().collect());
    for round in 0..=budget {
        let pick = s.elements().find(|&e| f0.0.can_avoid(s, e, &avoid) && f0.1.can_avoid(s, e, &avoid));
        if let Some(e0) = pick {
            let x = f0.0.push_avoiding(s, e0, &avoid, budget)?;
            let y = f0.1.push_avoiding(s, e0, &avoid, budget)?;
            return Ok(FreeSeq { a: vec![(e0, e0)], fa: vec![(x, y)], b, b_prime });
        }
        if round < budget {
            s.grow();
        }
    }
    Err(OligoError::BudgetExceeded.into())
}

/// Appends `a_{k+1} = δ(f_k a_k)`, choosing δ's new values so that
/// `f_{k+1} a_{k+1}` escapes `acl(f_0 a_0, …, f_k a_k, b)` in both
/// coordinates.
pub fn free_sequence_step(
    s: &mut Structure,
    next: &mut (Coef, Coef),
    seq: &mut FreeSeq,
    delta: &mut PartialMap,
    budget: usize,
) -> Result<(), WordError> {
    seq.verify(s)?;
    let k = seq.a.len() - 1;
    let avoid = seq.closure_upto(s, k);
    let (p1, p2) = seq.fa[k];
    // δ(p1) is chosen jointly with δ(p2): once p1 is placed, p2 may be
    // forced, and its forced image must escape too
    let mark = delta.len();
    let mut placed = delta.get(p1).is_some();
    for round in 0..=budget {
        if placed {
            break;
        }
        for y1 in s.candidates(delta, p1) {
            if !next.0.can_avoid(s, y1, &avoid) {
                continue;
            }
            delta.insert(p1, y1)?;
            let ok = match s.forced(delta, p2) {
                true => s.candidates(delta, p2).iter().any(|&y2| next.1.can_avoid(s, y2, &avoid)),
                false => true,
            };
            if ok {
                placed = true;
                break;
            }
            delta.truncate(mark);
        }
        if !placed && (round == budget || !s.grow_toward(delta, p1)) {
            return Err(OligoError::BudgetExceeded.into());
        }
    }
    let y1 = delta.get(p1).expect("placed");
    let z1 = next.0.push_avoiding(s, y1, &avoid, budget)?;
    let c2 = &next.1;
    let y2 = s.extend_with(delta, p2, &mut |st, y| c2.can_avoid(st, y, &avoid), budget)?;
    let z2 = next.1.push_avoiding(s, y2, &avoid, budget)?;
    seq.a.push((y1, y2));
    seq.fa.push((z1, z2));
    seq.verify(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeIIWitness {
    pub delta: PartialMap,
    pub point: Elem,
    pub left: Elem,
    pub right: Elem,
}

/// A δ extending `nbhd` that satisfies the type-II inequality `w`,
/// together with the point where the two sides differ. Coefficients of
/// `w` are extended in place.
pub fn solve_type_ii(s: &mut Structure, w: &mut Word, nbhd: &PartialMap, budget: usize) -> Result<TypeIIWitness, WordError> {
    if w.classify()? != WordType::TypeII {
        return Err(WordError::WrongType);
    }
    if !s.is_partial_iso(nbhd) {
        return Err(OligoError::NotPartialIso.into());
    }
    let n = w.left.len() - 1;
    let m = w.right.len() - 1;
    let mut fs: Vec<(Coef, Coef)> = (0..=n)
        .map(|i| (w.left[i].clone(), if i <= m { w.right[i].clone() } else { Coef::Id }))
        .collect();
    let mut delta = nbhd.clone();
    let mut seq = free_sequence_start(s, &mut fs[0], &delta, budget)?;
    for f in fs.iter_mut().skip(1) {
        free_sequence_step(s, f, &mut seq, &mut delta, budget)?;
    }
    for (i, (l, r)) in fs.into_iter().enumerate() {
        w.left[i] = l;
        if i <= m {
            w.right[i] = r;
        }
    }
    let point = seq.a[0].0;
    let ev = |coefs: &[Coef]| eval_side(coefs, &|x| delta.get(x), point);
    let (Some(left), Some(right)) = (ev(&w.left), ev(&w.right)) else {
        return Err(WordError::PreconditionFailed("word undefined at the witness point".into()));
    };
    if left == right || !s.is_partial_iso(&delta) || nbhd.pairs().iter().any(|&(x, y)| delta.get(x) != Some(y)) {
        return Err(WordError::PreconditionFailed("type-II witness failed verification".into()));
    }
    Ok(TypeIIWitness { delta, point, left, right })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentreWitness {
    pub delta: PartialMap,
    /// for each type-I word, the point where both the identity and γ
    /// satisfy it
    pub type_i_points: Vec<Elem>,
    pub type_ii: Vec<TypeIIWitness>,
}

/// Checks that γ commutes with the generators, that it satisfies every
/// type-I word the identity satisfies (through `λ_n γ ⋯ γ λ_0 = γⁿ λ_n ⋯ λ_0`),
/// then solves the type-II words one after another from `γ↾base`.
pub fn centre_witness(
    s: &mut Structure,
    gamma: &Central,
    type_i: &[Word],
    type_ii: &mut [Word],
    base: &ElemSet,
    budget: usize,
) -> Result<CentreWitness, WordError> {
    if !gamma.is_valid(s) {
        return Err(WordError::PreconditionFailed("γ is not an automorphism of this kind".into()));
    }
    if let Some((generator, element)) = s.centrality_violation(gamma) {
        return Err(WordError::NotCentral { generator, element });
    }
    let st: &Structure = s;
    let g = |x: Elem| Some(gamma.apply(st, x));
    let id = |x: Elem| Some(x);
    let mut type_i_points = Vec::new();
    for w in type_i {
        if w.classify()? != WordType::TypeI {
            return Err(WordError::WrongType);
        }
        let n = w.left.len() - 1;
        let at_identity = |x| (eval_side(&w.left, &id, x), eval_side(&w.right, &id, x));
        let x = st
            .elements()
            .find(|&x| matches!(at_identity(x), (Some(l), Some(r)) if l != r))
            .ok_or_else(|| WordError::PreconditionFailed("identity does not satisfy a type-I word".into()))?;
        let (l1, r1) = at_identity(x);
        let (l, r) = (eval_side(&w.left, &g, x), eval_side(&w.right, &g, x));
        let (Some(l), Some(r)) = (l, r) else {
            return Err(WordError::PreconditionFailed("type-I coefficient undefined on the truncation".into()));
        };
        if l != gamma.power_apply(st, n, l1.expect("found")) || r != gamma.power_apply(st, n, r1.expect("found")) || l == r {
            return Err(WordError::NotCentral { generator: usize::MAX, element: x });
        }
        type_i_points.push(x);
    }
    let mut delta = PartialMap::from_pairs(base.iter().map(|&b| (b, gamma.apply(s, b))))?;
    let mut sols = Vec::new();
    for w in type_ii.iter_mut() {
        let sol = solve_type_ii(s, w, &delta, budget)?;
        delta = sol.delta.clone();
        sols.push(sol);
    }
    // every earlier inequality still holds for the final δ
    for (w, sol) in type_ii.iter().zip(&sols) {
        let l = eval_side(&w.left, &|x| delta.get(x), sol.point);
        let r = eval_side(&w.right, &|x| delta.get(x), sol.point);
        if l.is_none() || l != Some(sol.left) || r != Some(sol.right) {
            return Err(WordError::PreconditionFailed("later extension broke an earlier witness".into()));
        }
    }
    if base.iter().any(|&b| delta.get(b) != Some(gamma.apply(s, b))) {
        return Err(WordError::PreconditionFailed("δ does not agree with γ on the base".into()));
    }
    Ok(CentreWitness { delta, type_i_points, type_ii: sols })
}

/// Random words with coefficients drawn from the automorphisms of the
/// current truncation. Type-I words are kept only if the identity
/// satisfies them.
pub fn random_words(s: &Structure, rng: &mut crate::rng::Rng, count: usize, type_ii: bool, max_degree: usize) -> Vec<Word> {
    use rand::Rng as _;
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(1..=max_degree);
        let m = if type_ii { rng.gen_range(0..n) } else { n };
        let mut coefs = |k: usize| -> Vec<Coef> {
            (0..=k).map(|_| Coef::Map(s.random_automorphism(rng).expect("kind has automorphisms"))).collect()
        };
        let w = Word::new(coefs(n), coefs(m));
        if type_ii || s.elements().any(|x| eval_side(&w.left, &Some, x) != eval_side(&w.right, &Some, x)) {
            out.push(w);
        }
    }
    out
}
