//! Chains of finite tuples and the products of their stabilizers,
//! `N_C = N_{c_0} N_{c_1} ⋯ N_{c_k}`.
//!
//! The products are never built. An element g lies in N_C exactly when
//! there is a witness chain `c'_0 = c_0, …, c'_k = g(c_k)` whose links
//! `c'_i c'_{i+1}` have the types of `c_i c_{i+1}`, and everything here is
//! phrased through such witnesses.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::indep::{alg_indep, IndepRelation};
use crate::oligo::ops::neumann_witness;
use crate::oligo::{Closure, Elem, ElemSet, OligoError, PartialMap, Search, Structure, Subuniverse};
use crate::report::Check;
use crate::rng::{sub_rng, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub tuples: Vec<Vec<Elem>>,
    #[serde(default)]
    pub acl_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("the element is not defined on the last link")]
    DomainMismatch,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("budget exceeded")]
    BudgetExceeded,
    #[error("output failed its own check: {0}")]
    Unverified(String),
    #[error(transparent)]
    Oligo(OligoError),
}

impl From<OligoError> for ChainError {
    fn from(e: OligoError) -> ChainError {
        match e {
            OligoError::BudgetExceeded => ChainError::BudgetExceeded,
            e => ChainError::Oligo(e),
        }
    }
}

fn pre(msg: impl Into<String>) -> ChainError {
    ChainError::PreconditionFailed(msg.into())
}

fn set_of(t: &[Elem]) -> ElemSet {
    t.iter().copied().collect()
}

fn concat(a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

fn union_of<'a>(ts: impl IntoIterator<Item = &'a Vec<Elem>>) -> ElemSet {
    ts.into_iter().flatten().copied().collect()
}

impl Chain {
    pub fn new(tuples: Vec<Vec<Elem>>) -> Chain {
        Chain { tuples, acl_closed: false }
    }

    /// A chain of acl-closed sets, each listed in ascending order.
    pub fn of_sets(sets: &[ElemSet]) -> Chain {
        Chain { tuples: sets.iter().map(|s| s.iter().copied().collect()).collect(), acl_closed: true }
    }

    /// `acl` of each generating tuple.
    pub fn closures(s: &Structure, gens: &[Vec<Elem>]) -> Chain {
        let sets: Vec<ElemSet> = gens.iter().map(|g| s.acl_of(g)).collect();
        Chain::of_sets(&sets)
    }

    /// The length k of `(c_0, …, c_k)`.
    pub fn len(&self) -> usize {
        self.tuples.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn set(&self, i: usize) -> ElemSet {
        set_of(&self.tuples[i])
    }

    pub fn last(&self) -> &[Elem] {
        self.tuples.last().map(|t| t.as_slice()).unwrap_or(&[])
    }

    /// `c_i ∩ c_{i+1}` for each link.
    pub fn meets(&self) -> Vec<ElemSet> {
        (0..self.len()).map(|i| self.set(i).intersection(&self.set(i + 1)).copied().collect()).collect()
    }

    pub fn subchain(&self, idx: &[usize]) -> Chain {
        Chain { tuples: idx.iter().map(|&i| self.tuples[i].clone()).collect(), acl_closed: self.acl_closed }
    }

    pub fn even_terms(&self) -> Chain {
        let idx: Vec<usize> = (0..self.tuples.len()).step_by(2).collect();
        self.subchain(&idx)
    }

    /// Nonempty, inside the truncation, and closed when flagged so.
    pub fn validate(&self, s: &Structure) -> Result<(), ChainError> {
        if self.tuples.is_empty() {
            return Err(pre("a chain has at least one term"));
        }
        if let Some(e) = self.tuples.iter().flatten().find(|&&e| !s.contains(e)) {
            return Err(pre(format!("{e} lies outside the truncation")));
        }
        if self.acl_closed {
            if let Some(i) = (0..self.tuples.len()).find(|&i| !s.is_acl_closed(&self.set(i))) {
                return Err(pre(format!("term {i} is not acl-closed")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// `(c'_0, …, c'_k)`
    Witness(Vec<Vec<Elem>>),
    /// Every candidate, up to automorphism, was tried.
    NoWitness,
    Inconclusive,
}

/// Is `w` a witness chain for an element sending `c_k` to `gk`?
pub fn is_witness(s: &Structure, c: &Chain, gk: &[Elem], w: &[Vec<Elem>]) -> bool {
    w.len() == c.tuples.len()
        && w[0] == c.tuples[0]
        && w.last().map(|t| t.as_slice()) == Some(gk)
        && w.iter().zip(&c.tuples).all(|(a, b)| a.len() == b.len())
        && (0..c.len()).all(|i| {
            s.orbit_eq(&concat(&w[i], &w[i + 1]), &concat(&c.tuples[i], &c.tuples[i + 1])).unwrap_or(false)
        })
}

/// Fresh room a copy of `t` may need: its rank for the linear kinds.
pub(crate) fn room(s: &Structure, t: &[Elem]) -> usize {
    match s.closure(&set_of(t)) {
        Closure::Linear { span, .. } => span.rank() + 1,
        Closure::Set(_) => t.len(),
    }
}

/// Looks for a witness chain showing `g ∈ N_C`. Intermediate links range
/// over one candidate per orbit over `g(c_k)` and the previous link, after
/// the truncation is grown so that fresh types have room.
pub fn chain_membership_witness(
    s: &mut Structure,
    c: &Chain,
    g: &PartialMap,
    budget: u64,
) -> Result<Membership, ChainError> {
    c.validate(s)?;
    let gk = g.map_tuple(c.last()).ok_or(ChainError::DomainMismatch)?;
    let k = c.len();
    if k == 0 {
        return Ok(if gk == c.tuples[0] { Membership::Witness(vec![gk]) } else { Membership::NoWitness });
    }
    let mut used = union_of(&c.tuples);
    used.extend(gk.iter().copied());
    let extra = c.tuples[1..k].iter().map(|t| room(s, t)).sum();
    s.make_room(&used, extra);
    let params = set_of(&gk);
    let mut w = vec![c.tuples[0].clone()];
    let mut budget = budget;
    Ok(match next_link(s, c, &gk, &params, &mut w, &mut budget) {
        Search::Found(()) => {
            w.push(gk);
            debug_assert!(is_witness(s, c, w.last().unwrap(), &w));
            Membership::Witness(w)
        }
        Search::Exhausted => Membership::NoWitness,
        Search::Budget => Membership::Inconclusive,
    })
}

fn next_link(
    s: &Structure,
    c: &Chain,
    gk: &[Elem],
    params: &ElemSet,
    w: &mut Vec<Vec<Elem>>,
    budget: &mut u64,
) -> Search<()> {
    let i = w.len();
    let k = c.len();
    if i == k {
        let ok = s.orbit_eq(&concat(&w[k - 1], gk), &concat(&c.tuples[k - 1], &c.tuples[k])).unwrap_or(false);
        return if ok { Search::Found(()) } else { Search::Exhausted };
    }
    let mut m = PartialMap::from_pairs(c.tuples[i - 1].iter().copied().zip(w[i - 1].iter().copied()))
        .expect("a witness link is injective");
    let mut out = Vec::new();
    place(s, c, gk, params, w, &mut m, &mut out, budget)
}

#[allow(clippy::too_many_arguments)]
fn place(
    s: &Structure,
    c: &Chain,
    gk: &[Elem],
    params: &ElemSet,
    w: &mut Vec<Vec<Elem>>,
    m: &mut PartialMap,
    out: &mut Vec<Elem>,
    budget: &mut u64,
) -> Search<()> {
    let t = &c.tuples[w.len()];
    if out.len() == t.len() {
        w.push(out.clone());
        let r = next_link(s, c, gk, params, w, budget);
        if r != Search::Found(()) {
            w.pop();
        }
        return r;
    }
    let x = t[out.len()];
    let mark = m.len();
    let mut over = false;
    for y in s.orbit_reps(m, x, params) {
        if *budget == 0 {
            return Search::Budget;
        }
        *budget -= 1;
        m.insert(x, y).expect("a candidate");
        out.push(y);
        let r = place(s, c, gk, params, w, m, out, budget);
        out.pop();
        m.truncate(mark);
        match r {
            Search::Found(()) => return r,
            Search::Budget => over = true,
            Search::Exhausted => {}
        }
    }
    if over {
        Search::Budget
    } else {
        Search::Exhausted
    }
}

/// Turns a witness for `g` in `N_D`, D the subchain at `idx` (ascending),
/// into one for `g` in `N_C` by padding with identity links.
pub fn lift_subchain_witness(
    s: &mut Structure,
    c: &Chain,
    idx: &[usize],
    witness: &[Vec<Elem>],
    g: &PartialMap,
    budget: usize,
) -> Result<Vec<Vec<Elem>>, ChainError> {
    if idx.is_empty() || idx.len() != witness.len() || idx.windows(2).any(|p| p[0] >= p[1]) {
        return Err(pre("subchain indices must be ascending and match the witness"));
    }
    let n = c.tuples.len();
    let mut out: Vec<Vec<Elem>> = c.tuples[..=idx[0]].to_vec();
    for (t, p) in idx.windows(2).enumerate() {
        let (from, to) = (p[0], p[1]);
        let mut h = PartialMap::from_pairs(
            concat(&c.tuples[from], &c.tuples[to]).into_iter().zip(concat(&witness[t], &witness[t + 1])),
        )?;
        for i in from + 1..=to {
            for &x in &c.tuples[i] {
                s.extend(&mut h, x, budget)?;
            }
            out.push(h.map_tuple(&c.tuples[i]).expect("extended"));
        }
    }
    let mut h = g.clone();
    for i in idx[idx.len() - 1] + 1..n {
        for &x in &c.tuples[i] {
            s.extend(&mut h, x, budget)?;
        }
        out.push(h.map_tuple(&c.tuples[i]).expect("extended"));
    }
    Ok(out)
}

fn check_links_over(s: &Structure, c: &Chain, c2: &Chain, a: &ElemSet) -> Result<(), ChainError> {
    let at: Vec<Elem> = a.iter().copied().collect();
    for i in 0..c.len() {
        let u = concat(&at, &concat(&c.tuples[i], &c.tuples[i + 1]));
        let v = concat(&at, &concat(&c2.tuples[i], &c2.tuples[i + 1]));
        if !s.orbit_eq(&u, &v)? {
            return Err(pre(format!("links {i} are not equivalent over A")));
        }
    }
    Ok(())
}

/// Extends `g` over `c_k` and demands a witness for it in `N_C`.
fn demand_member(s: &mut Structure, c: &Chain, g: &PartialMap, budget: usize, what: &str) -> Result<(), ChainError> {
    let mut gx = g.clone();
    for &x in c.last() {
        s.extend(&mut gx, x, budget)?;
    }
    match chain_membership_witness(s, c, &gx, search_budget(budget))? {
        Membership::Witness(_) => Ok(()),
        Membership::NoWitness => Err(ChainError::Unverified(format!("{what} has no witness chain"))),
        Membership::Inconclusive => Err(ChainError::BudgetExceeded),
    }
}

/// Placement budget for witness searches made on behalf of a
/// construction with extension budget `budget`.
fn search_budget(budget: usize) -> u64 {
    100_000 * (budget as u64 + 1)
}

/// An element g fixing A with `g N_C = N_{C'}` and `g(c_0) = c'_0`, by
/// induction on the length: `g = h h'` where h handles the tail chains and
/// h' fixes `A c_1` and moves `c_0` onto `h⁻¹(c'_0)`.
pub fn change_chain(
    s: &mut Structure,
    c: &Chain,
    c2: &Chain,
    a: &ElemSet,
    budget: usize,
) -> Result<PartialMap, ChainError> {
    c.validate(s)?;
    c2.validate(s)?;
    if c.tuples.len() != c2.tuples.len() || c.tuples.iter().zip(&c2.tuples).any(|(x, y)| x.len() != y.len()) {
        return Err(pre("chains of different shapes"));
    }
    if c.last() != c2.last() {
        return Err(pre("last terms differ"));
    }
    check_links_over(s, c, c2, a)?;
    let g = change_rec(s, &c.tuples, &c2.tuples, a, budget)?;
    if g.map_tuple(&c.tuples[0]).as_deref() != Some(c2.tuples[0].as_slice()) || !g.fixes(a) || !s.is_partial_iso(&g) {
        return Err(ChainError::Unverified("g does not move c_0 onto c'_0 over A".into()));
    }
    // 1 ∈ N_C gives g ∈ N_{C'}, and 1 ∈ N_{C'} gives g⁻¹ ∈ N_C
    demand_member(s, c2, &g, budget, "g in N_C'")?;
    demand_member(s, c, &g.inverse(), budget, "g⁻¹ in N_C")?;
    Ok(g)
}

fn change_rec(
    s: &mut Structure,
    c: &[Vec<Elem>],
    c2: &[Vec<Elem>],
    a: &ElemSet,
    budget: usize,
) -> Result<PartialMap, ChainError> {
    if c.len() == 1 {
        return Ok(PartialMap::identity_on(a.iter().chain(&c[0]).copied()));
    }
    let h = change_rec(s, &c[1..], &c2[1..], a, budget)?;
    let mut hinv = h.inverse();
    for &y in &c2[0] {
        s.extend(&mut hinv, y, budget)?;
    }
    let back = hinv.map_tuple(&c2[0]).expect("extended");
    let mut h1 = PartialMap::identity_on(a.iter().chain(&c[1]).copied());
    for (&x, &y) in c[0].iter().zip(&back) {
        h1.insert(x, y).map_err(|_| pre("first links are not equivalent over A"))?;
    }
    if !s.is_partial_iso(&h1) {
        return Err(pre("first links are not equivalent over A"));
    }
    Ok(hinv.inverse().compose(&h1))
}

/// `E = g(D)` for a Neumann witness g fixing C with `E ∩ A = C ∩ D ∩ A`,
/// so that `N_E g = g N_D ⊆ N_C N_D`.
pub fn intersect_chains(
    s: &mut Structure,
    a: &ElemSet,
    c: &ElemSet,
    d: &ElemSet,
    budget: usize,
) -> Result<(ElemSet, PartialMap), ChainError> {
    for (name, x) in [("A", a), ("C", c), ("D", d)] {
        if !s.is_acl_closed(x) {
            return Err(pre(format!("{name} is not acl-closed")));
        }
    }
    let g = neumann_witness(s, c, d, a, budget)?;
    let e = g.map_set(d).expect("g is defined on D");
    let want: ElemSet = c.intersection(d).filter(|x| a.contains(x)).copied().collect();
    let got: ElemSet = e.intersection(a).copied().collect();
    if got != want || !g.fixes(c) || !s.is_acl_closed(&e) {
        return Err(ChainError::Unverified(format!("E ∩ A = {got:?}, want {want:?}")));
    }
    // g = 1·g with 1 ∈ N_E, so g itself must lie in N_C N_D
    demand_member(s, &Chain::of_sets(&[c.clone(), d.clone()]), &g, budget, "g in N_C N_D")?;
    Ok((e, g))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipCase {
    /// every `c_{2i} ∩ c_{2i+1} ∩ c_{2i+2}` equals this set
    Anchored(ElemSet),
    /// every `c_{2i} ∩ c_{2i+1}` lies in this invariant set
    Invariant(Subuniverse),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    /// the even terms of `rewritten`
    pub chain: Chain,
    pub rewritten: Chain,
    /// `N_chain ⊆ g N_C`
    pub g: PartialMap,
}

/// Replaces a chain of length 2k by one of length k whose stabilizer
/// product lands in a translate of the original. The rewritten chain is
/// built backwards from `c_{2k}`, each even term pushed off its successor
/// by a Neumann witness.
pub fn skip_terms(s: &mut Structure, c: &Chain, case: &SkipCase, budget: usize) -> Result<Skipped, ChainError> {
    c.validate(s)?;
    let n = c.tuples.len();
    if n.is_multiple_of(2) {
        return Err(pre("the length must be even"));
    }
    if let Some(i) = (0..n).find(|&i| !s.is_acl_closed(&c.set(i))) {
        return Err(pre(format!("term {i} is not acl-closed")));
    }
    let k = n / 2;
    let a = match case {
        SkipCase::Anchored(a) => {
            for i in 0..k {
                let meet: ElemSet = c.meets()[2 * i].intersection(&c.set(2 * i + 2)).copied().collect();
                if meet != *a {
                    return Err(pre(format!("terms {}..{} meet in {meet:?}", 2 * i, 2 * i + 2)));
                }
            }
            a.clone()
        }
        SkipCase::Invariant(delta) => {
            for i in 0..k {
                if c.meets()[2 * i].iter().any(|&e| !delta.contains(s, e)) {
                    return Err(pre(format!("terms {} and {} meet outside Δ", 2 * i, 2 * i + 1)));
                }
            }
            ElemSet::new()
        }
    };
    let mut out = vec![Vec::new(); n];
    out[2 * k] = c.tuples[2 * k].clone();
    for l in (1..=k).rev() {
        let mut phi = PartialMap::identity_on(a.iter().copied());
        for (&x, &y) in c.tuples[2 * l].iter().zip(&out[2 * l]) {
            phi.insert(x, y)?;
        }
        for &x in &c.tuples[2 * l - 1] {
            s.extend(&mut phi, x, budget)?;
        }
        out[2 * l - 1] = phi.map_tuple(&c.tuples[2 * l - 1]).expect("extended");
        for &x in &c.tuples[2 * l - 2] {
            s.extend(&mut phi, x, budget)?;
        }
        let moved = phi.map_tuple(&c.tuples[2 * l - 2]).expect("extended");
        let h = neumann_witness(s, &set_of(&out[2 * l - 1]), &set_of(&moved), &set_of(&out[2 * l]), budget)?;
        out[2 * l - 2] = h.map_tuple(&moved).expect("h is defined on the moved term");
    }
    let rewritten = Chain { tuples: out, acl_closed: true };
    let g = change_chain(s, c, &rewritten, &a, budget)?;
    let chain = rewritten.even_terms();
    for (i, m) in chain.meets().iter().enumerate() {
        let ok = match case {
            SkipCase::Anchored(a) => m == a,
            SkipCase::Invariant(delta) => m.iter().all(|&e| delta.contains(s, e)),
        };
        if !ok {
            return Err(ChainError::Unverified(format!("new terms {i} and {} meet in {m:?}", i + 1)));
        }
    }
    Ok(Skipped { chain, rewritten, g })
}

/// Tally of sampled membership queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub witnessed: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

/// Samples `u ∈ N_D` as products of random stabilizer elements and asks
/// for a witness of `g⁻¹u ∈ N_C`.
pub fn skip_spot_check(
    s: &mut Structure,
    c: &Chain,
    skipped: &Skipped,
    samples: usize,
    rng: &mut Rng,
    budget: usize,
) -> Result<Tally, ChainError> {
    let mut tally = Tally::default();
    for _ in 0..samples {
        let mut u = PartialMap::identity_on(s.elements());
        let mut ok = true;
        for t in &skipped.chain.tuples {
            match s.random_stabilizer_element(&set_of(t), rng) {
                Some(v) => u = u.compose(&v),
                None => ok = false,
            }
        }
        if !ok {
            tally.skipped += 1;
            continue;
        }
        let mut ginv = skipped.g.inverse();
        for &x in c.last() {
            let y = u.get(x).expect("u is total");
            s.extend(&mut ginv, y, budget)?;
        }
        let x = ginv.compose(&u.restrict(&set_of(c.last())));
        match chain_membership_witness(s, c, &x, search_budget(budget))? {
            Membership::Witness(_) => tally.witnessed += 1,
            Membership::NoWitness => tally.refuted += 1,
            Membership::Inconclusive => tally.inconclusive += 1,
        }
    }
    Ok(tally)
}

/// The pattern `c_0…c_{i-1} ⫝_{c_i} c_{i+1}…c_k` for `0 < i < k`.
pub fn is_independent_chain(s: &Structure, c: &Chain, rel: IndepRelation) -> bool {
    (1..c.len()).all(|i| rel.holds(s, &union_of(&c.tuples[..i]), &union_of(&c.tuples[i + 1..]), &c.set(i)))
}

/// An independent chain with the same last term whose links are
/// equivalent over A to those of `c`. Built backwards: each term is a
/// generic copy over its successor, avoiding the closure of all later
/// terms.
pub fn independent_chain_from(
    s: &mut Structure,
    c: &Chain,
    a: &ElemSet,
    rel: IndepRelation,
    budget: usize,
) -> Result<Chain, ChainError> {
    c.validate(s)?;
    if let Some(i) = c.meets().iter().position(|m| m != a) {
        return Err(pre(format!("terms {i} and {} do not meet in A", i + 1)));
    }
    let k = c.len();
    let mut out = vec![Vec::new(); k + 1];
    out[k] = c.tuples[k].clone();
    for i in (0..k).rev() {
        let mut phi = PartialMap::identity_on(a.iter().copied());
        for (&x, &y) in c.tuples[i + 1].iter().zip(&out[i + 1]) {
            phi.insert(x, y)?;
        }
        let later = union_of(&out[i + 1..]);
        for &x in &c.tuples[i] {
            if s.forced(&phi, x) {
                s.extend(&mut phi, x, budget)?;
                continue;
            }
            let mut near = later.clone();
            near.extend(phi.image());
            let avoid = s.closure(&near);
            s.extend_with(&mut phi, x, &mut |st, y| !avoid.contains(st, y), budget)?;
        }
        out[i] = phi.map_tuple(&c.tuples[i]).expect("extended");
    }
    let res = Chain { tuples: out, acl_closed: c.acl_closed };
    check_links_over(s, c, &res, a).map_err(|e| ChainError::Unverified(e.to_string()))?;
    if !is_independent_chain(s, &res, rel) {
        return Err(ChainError::Unverified(format!("not independent for {}", rel.name())));
    }
    Ok(res)
}

/// Samples g fixing A and asks each for a witness in `N_C`; when every
/// link is independent over A it also checks the converse on random
/// automorphisms: whatever gets a witness fixes A.
pub fn reachability_check(
    s: &mut Structure,
    a: &ElemSet,
    c: &Chain,
    samples: usize,
    budget: u64,
    seed: u64,
) -> Result<Check, ChainError> {
    c.validate(s)?;
    if let Some(i) = c.meets().iter().position(|m| m != a) {
        return Err(pre(format!("terms {i} and {} do not meet in A", i + 1)));
    }
    let base = s.clone();
    let mut check = Check::new(
        "chains.reachability",
        json!({"kind": s.kind(), "a": a, "chain": c, "samples": samples, "seed": seed}),
    );
    let mut forward = Tally::default();
    for i in 0..samples {
        let Some(g) = base.random_stabilizer_element(a, &mut sub_rng(seed, i as u64)) else {
            forward.skipped += 1;
            check.inconclusive();
            continue;
        };
        match chain_membership_witness(s, c, &g, budget)? {
            Membership::Witness(_) => forward.witnessed += 1,
            Membership::NoWitness => {
                forward.refuted += 1;
                check.violation(json!({"sample": i, "g": g.restrict(&set_of(c.last()))}));
            }
            Membership::Inconclusive => {
                forward.inconclusive += 1;
                check.inconclusive();
            }
        }
    }
    let hypotheses = (0..c.len()).all(|i| alg_indep(&base, &c.set(i), &c.set(i + 1), a));
    let mut converse = Tally::default();
    if hypotheses {
        for i in 0..samples {
            let Some(g) = base.random_stabilizer_element(&ElemSet::new(), &mut sub_rng(seed, (samples + i) as u64))
            else {
                converse.skipped += 1;
                continue;
            };
            match chain_membership_witness(s, c, &g, budget)? {
                Membership::Witness(w) => {
                    converse.witnessed += 1;
                    if !g.fixes(a) {
                        check.violation(json!({"converse_sample": i, "g": g.restrict(&set_of(c.last())), "witness": w}));
                    }
                }
                Membership::NoWitness => converse.refuted += 1,
                Membership::Inconclusive => converse.inconclusive += 1,
            }
        }
    }
    Ok(check.with_stats(json!({"fixing_a": forward, "converse": converse, "converse_applies": hypotheses})))
}

/// A random chain of closures `acl(A ∪ R_i)`, `R_i` of 1 or 2 random
/// elements, kept only if consecutive terms meet exactly in `A`.
pub fn random_chain_over(s: &Structure, a: &ElemSet, len: usize, rng: &mut Rng, tries: usize) -> Option<Chain> {
    use rand::Rng as _;
    for _ in 0..tries {
        let gens: Vec<Vec<Elem>> = (0..=len)
            .map(|_| {
                let r = rng.gen_range(1..=2);
                let mut g: Vec<Elem> = a.iter().copied().collect();
                g.extend((0..r).map(|_| rng.gen_range(0..s.len())));
                g
            })
            .collect();
        let c = Chain::closures(s, &gens);
        if c.meets().iter().all(|m| m == a) {
            return Some(c);
        }
    }
    None
}
