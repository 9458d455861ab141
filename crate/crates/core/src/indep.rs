//! Independence relations on oligomorphic structures: the axiom suite,
//! absorbing configurations, universally embedded models and sinks.

use rand::seq::IteratorRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chains::{chain_membership_witness, is_independent_chain, is_witness, room, Chain, ChainError, Membership};
use crate::oligo::ops::image_disjoint_pair;
use crate::oligo::{Elem, ElemSet, OligoError, PartialMap, Search, Structure, Subuniverse};
use crate::report::Check;
use crate::rng::{derive, sub_rng, Rng};

/// `acl(AC) ∩ acl(BC) = acl(C)`.
pub fn alg_indep(s: &Structure, a: &ElemSet, b: &ElemSet, c: &ElemSet) -> bool {
    let ac = s.acl(&union(a, c));
    let bc = s.acl(&union(b, c));
    let meet: ElemSet = ac.intersection(&bc).copied().collect();
    meet == s.acl(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndepRelation {
    Algebraic,
    /// Not an independence relation; it breaks anti-reflexivity.
    AlwaysTrue,
}

impl IndepRelation {
    pub fn name(&self) -> &'static str {
        match self {
            IndepRelation::Algebraic => "algebraic",
            IndepRelation::AlwaysTrue => "always_true",
        }
    }

    /// `A ⫝_C B`.
    pub fn holds(&self, s: &Structure, a: &ElemSet, b: &ElemSet, c: &ElemSet) -> bool {
        match self {
            IndepRelation::Algebraic => alg_indep(s, a, b, c),
            IndepRelation::AlwaysTrue => true,
        }
    }
}

fn union(a: &ElemSet, b: &ElemSet) -> ElemSet {
    a.union(b).copied().collect()
}

fn set_of(t: &[Elem]) -> ElemSet {
    t.iter().copied().collect()
}

fn concat(parts: &[&[Elem]]) -> Vec<Elem> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn random_set(s: &Structure, rng: &mut Rng, lo: usize, hi: usize) -> ElemSet {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| rng.gen_range(0..s.len())).collect()
}

fn random_closure(s: &Structure, rng: &mut Rng, over: &ElemSet, lo: usize, hi: usize) -> ElemSet {
    s.acl(&union(over, &random_set(s, rng, lo, hi)))
}

/// Search effort per query of the axiom suite and the sampled checks.
const SEARCH_BUDGET: u64 = 200_000;

/// One sampled instance of an axiom.
enum Trial {
    /// hypotheses failed
    Vacuous,
    Pass,
    Fail(Value),
    /// the bounded search ran out
    Unknown,
}

fn run_trials(name: &str, params: Value, samples: usize, seed: u64, mut trial: impl FnMut(&mut Rng) -> Trial) -> Check {
    let mut check = Check::new(name, params);
    let (mut applied, mut vacuous, mut unknown, mut failed) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..samples {
        match trial(&mut sub_rng(seed, i as u64)) {
            Trial::Vacuous => vacuous += 1,
            Trial::Pass => applied += 1,
            Trial::Fail(w) => {
                failed += 1;
                check.violation(json!({"sample": i, "instance": w}));
            }
            Trial::Unknown => {
                unknown += 1;
                check.inconclusive();
            }
        }
    }
    check.with_stats(json!({"passed": applied, "vacuous": vacuous, "inconclusive": unknown, "failed": failed}))
}

fn implication(hyp: bool, concl: bool, w: impl FnOnce() -> Value) -> Trial {
    match (hyp, concl) {
        (false, _) => Trial::Vacuous,
        (true, true) => Trial::Pass,
        (true, false) => Trial::Fail(w()),
    }
}

/// Samples every axiom of an independence relation, plus base
/// monotonicity and the extra amalgamation properties. Sets have at most
/// two generators and come from `s` itself; searches run on clones grown
/// as needed.
pub fn axiom_suite(s: &Structure, rel: IndepRelation, samples: usize, seed: u64) -> Vec<Check> {
    let params = |axiom: &str| json!({"kind": s.kind(), "size": s.len(), "relation": rel.name(), "samples": samples, "seed": seed, "axiom": axiom});
    let name = |axiom: &str| format!("indep.axioms.{}.{}", rel.name(), axiom);
    let holds = |a: &ElemSet, b: &ElemSet, c: &ElemSet| rel.holds(s, a, b, c);
    let mut out = Vec::new();

    out.push(run_trials(&name("invariance"), params("invariance"), samples, derive(seed, 0), |r| {
        let (a, b, c) = (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        let Some(g) = s.random_stabilizer_element(&ElemSet::new(), r) else { return Trial::Unknown };
        let img = |x: &ElemSet| g.map_set(x).expect("g is total");
        if holds(&a, &b, &c) == holds(&img(&a), &img(&b), &img(&c)) {
            Trial::Pass
        } else {
            Trial::Fail(json!({"a": a, "b": b, "c": c, "g": g}))
        }
    }));

    out.push(run_trials(&name("symmetry"), params("symmetry"), samples, derive(seed, 1), |r| {
        let (a, b, c) = (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        implication(holds(&a, &b, &c), holds(&b, &a, &c), || json!({"a": a, "b": b, "c": c}))
    }));

    out.push(run_trials(&name("normality"), params("normality"), samples, derive(seed, 2), |r| {
        let (a, b, c) = (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        implication(holds(&a, &b, &c), holds(&a, &union(&b, &c), &c), || json!({"a": a, "b": b, "c": c}))
    }));

    out.push(run_trials(&name("monotonicity"), params("monotonicity"), samples, derive(seed, 3), |r| {
        let (a, b, c, d) =
            (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        implication(holds(&a, &union(&b, &d), &c), holds(&a, &b, &c), || json!({"a": a, "b": b, "c": c, "d": d}))
    }));

    out.push(run_trials(&name("transitivity"), params("transitivity"), samples, derive(seed, 4), |r| {
        let (a, b, c, d) =
            (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        implication(
            holds(&a, &b, &c) && holds(&a, &d, &union(&b, &c)),
            holds(&a, &union(&b, &d), &c),
            || json!({"a": a, "b": b, "c": c, "d": d}),
        )
    }));

    out.push(run_trials(&name("anti_reflexivity"), params("anti_reflexivity"), samples, derive(seed, 5), |r| {
        let a: ElemSet = [r.gen_range(0..s.len())].into();
        let c = random_set(s, r, 0, 2);
        implication(holds(&a, &a, &c), a.is_subset(&s.acl(&c)), || json!({"a": a, "c": c}))
    }));

    out.push(run_trials(&name("base_monotonicity"), params("base_monotonicity"), samples, derive(seed, 6), |r| {
        let b = random_set(s, r, 0, 1);
        let c = union(&b, &random_set(s, r, 0, 1));
        let d = union(&c, &random_set(s, r, 0, 2));
        let a = random_set(s, r, 1, 2);
        implication(holds(&a, &d, &b), holds(&a, &d, &c), || json!({"a": a, "b": b, "c": c, "d": d}))
    }));

    out.push(run_trials(&name("refines_algebraic"), params("refines_algebraic"), samples, derive(seed, 7), |r| {
        let (a, b, c) = (random_set(s, r, 0, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 2));
        implication(holds(&a, &b, &c), alg_indep(s, &a, &b, &c), || json!({"a": a, "b": b, "c": c}))
    }));

    out.push(run_trials(&name("full_existence"), params("full_existence"), samples, derive(seed, 8), |r| {
        let (a, b, c) = (random_set(s, r, 1, 2), random_set(s, r, 0, 2), random_set(s, r, 0, 1));
        full_existence_trial(s, rel, &a, &b, &c)
    }));

    out.push(run_trials(&name("stationarity"), params("stationarity"), samples, derive(seed, 9), |r| {
        let a = random_closure(s, r, &ElemSet::new(), 0, 1);
        let b1 = random_closure(s, r, &a, 1, 1);
        let c = random_closure(s, r, &a, 0, 1);
        let Some(sigma) = s.random_stabilizer_element(&a, r) else { return Trial::Unknown };
        let t1: Vec<Elem> = b1.iter().copied().collect();
        let t2 = sigma.map_tuple(&t1).expect("sigma is total");
        let b2 = set_of(&t2);
        let ac: Vec<Elem> = union(&a, &c).into_iter().collect();
        let hyp = holds(&b1, &c, &a) && holds(&b2, &c, &a);
        let same = s.orbit_eq(&concat(&[&t1, &ac]), &concat(&[&t2, &ac])).unwrap_or(false);
        implication(hyp, same, || json!({"a": a, "b1": t1, "b2": t2, "c": c}))
    }));

    out.push(run_trials(&name("three_amalgamation"), params("three_amalgamation"), samples, derive(seed, 10), |r| {
        let a = random_closure(s, r, &ElemSet::new(), 0, 1);
        let b1 = random_closure(s, r, &a, 1, 1);
        let b2 = random_closure(s, r, &a, 1, 1);
        let c1 = random_closure(s, r, &a, 1, 1);
        let Some(tau) = s.random_stabilizer_element(&a, r) else { return Trial::Unknown };
        amalgamation_trial(s, rel, &a, &b1, &b2, &c1, &tau)
    }));
    out
}

/// Looks for `A′ ≡_C A` with `A′ ⫝_C B`. The search is over orbit
/// representatives for `B ∪ C`, so running dry is a counterexample.
fn full_existence_trial(s: &Structure, rel: IndepRelation, a: &ElemSet, b: &ElemSet, c: &ElemSet) -> Trial {
    let mut t = s.clone();
    let at: Vec<Elem> = a.iter().copied().collect();
    t.make_room(&union(&union(a, b), c), room(s, &at));
    let base = PartialMap::identity_on(c.iter().copied());
    let params = union(b, c);
    let mut budget = SEARCH_BUDGET;
    let mut ok = |t: &Structure, m: &PartialMap, placed: usize| {
        placed < at.len() || rel.holds(t, &m.map_set(a).expect("placed"), b, c)
    };
    match t.search_reps(&base, &at, &params, &mut ok, &mut budget) {
        Search::Found(_) => Trial::Pass,
        Search::Exhausted => Trial::Fail(json!({"a": a, "b": b, "c": c})),
        Search::Budget => Trial::Unknown,
    }
}

/// Independent 3-amalgamation with `C_2 = τ(C_1)`, τ fixing A: a D with
/// `D ≡_{B_1} C_1`, `D ≡_{B_2} C_2` and `D ⫝_A B_1B_2`.
fn amalgamation_trial(
    s: &Structure,
    rel: IndepRelation,
    a: &ElemSet,
    b1: &ElemSet,
    b2: &ElemSet,
    c1: &ElemSet,
    tau: &PartialMap,
) -> Trial {
    let c2 = tau.map_set(c1).expect("tau is total");
    if !(rel.holds(s, b1, b2, a) && rel.holds(s, c1, b1, a) && rel.holds(s, &c2, b2, a)) {
        return Trial::Vacuous;
    }
    let mut t = s.clone();
    let ct: Vec<Elem> = c1.difference(b1).copied().collect();
    let b2t: Vec<Elem> = b2.iter().copied().collect();
    let all = union(&union(b1, b2), &union(c1, &c2));
    t.make_room(&all, room(s, &ct));
    let base = PartialMap::identity_on(b1.iter().copied());
    let params = union(b1, b2);
    let b12 = params.clone();
    let mut budget = SEARCH_BUDGET;
    let mut ok = |t: &Structure, m: &PartialMap, placed: usize| {
        let d = m.map_tuple(&ct[..placed]).expect("placed");
        let want = tau.map_tuple(&ct[..placed]).expect("tau is total");
        if !t.orbit_eq(&concat(&[&d, &b2t]), &concat(&[&want, &b2t])).unwrap_or(false) {
            return false;
        }
        placed < ct.len() || rel.holds(t, &m.map_set(c1).expect("placed"), &b12, a)
    };
    let w = || json!({"a": a, "b1": b1, "b2": b2, "c1": c1, "c2": c2});
    match t.search_reps(&base, &ct, &params, &mut ok, &mut budget) {
        Search::Found(_) => Trial::Pass,
        Search::Exhausted => Trial::Fail(w()),
        Search::Budget => Trial::Unknown,
    }
}

/// Evaluates `c_0 ⫝_A c_k` on an independent chain of length k over A.
pub fn check_narrowness(
    s: &Structure,
    rel: IndepRelation,
    k: usize,
    a: &ElemSet,
    chain: &Chain,
) -> Result<bool, ChainError> {
    chain.validate(s)?;
    let pre = |m: String| Err(ChainError::PreconditionFailed(m));
    if chain.len() != k {
        return pre(format!("chain has length {}, not {k}", chain.len()));
    }
    if let Some(i) = (0..=k).find(|&i| !s.is_acl_closed(&chain.set(i))) {
        return pre(format!("term {i} is not algebraically closed"));
    }
    if let Some(i) = chain.meets().iter().position(|m| m != a) {
        return pre(format!("terms {i} and {} do not meet in A", i + 1));
    }
    if !is_independent_chain(s, chain, rel) {
        return pre("not an independent chain".into());
    }
    Ok(rel.holds(s, &chain.set(0), &chain.set(k), a))
}

/// Conditions (a) to (c) of an absorbing configuration `(a1; a2; b)`.
pub fn absorbing_config_check(
    s: &Structure,
    omega: &Subuniverse,
    a1: &[Elem],
    a2: &[Elem],
    b: &[Elem],
) -> Result<bool, OligoError> {
    let (a1, a2, b) = (set_of(a1), set_of(a2), set_of(b));
    if ![&a1, &a2, &b].iter().all(|x| s.is_acl_closed(x)) {
        return Err(OligoError::NotAclClosed);
    }
    if !a1.is_subset(&a2) {
        return Err(OligoError::PreconditionFailed("a1 is not contained in a2".into()));
    }
    let bo = omega.filter(s, &b);
    Ok(alg_indep(s, &b, &a1, &bo) && alg_indep(s, &bo, &a2, &a1))
}

/// Finds `a1′a2′ ≡_b a1a2` with `a2′ ∩ Ω′ = a1′`. The search fixes b,
/// places a1 first, accepting only points of Ω′, and then the rest of a2,
/// accepting only points outside it.
pub fn absorb(
    s: &mut Structure,
    omega: &Subuniverse,
    a1: &[Elem],
    a2: &[Elem],
    b: &[Elem],
    budget: u64,
) -> Result<(Vec<Elem>, Vec<Elem>), OligoError> {
    if !absorbing_config_check(s, omega, a1, a2, b)? {
        return Err(OligoError::PreconditionFailed("not an absorbing configuration".into()));
    }
    let bset = set_of(b);
    let a1set = set_of(a1);
    let mut order: Vec<Elem> = a1.iter().copied().filter(|x| !bset.contains(x)).collect();
    order.extend(a2.iter().copied().filter(|x| !bset.contains(x) && !a1set.contains(x)));
    let inside: Vec<bool> = order.iter().map(|x| a1set.contains(x)).collect();
    let base = PartialMap::identity_on(b.iter().copied());
    let mut extra = room(s, a2);
    let mut left = budget;
    for _ in 0..2 {
        s.ensure_room(&union(&set_of(a2), &bset), extra);
        let mut ok = |t: &Structure, out: &[Elem]| omega.contains(t, out[out.len() - 1]) == inside[out.len() - 1];
        match s.search_images(&base, &order, &mut ok, &mut left) {
            Search::Found(img) => {
                let mut m = base.clone();
                for (&x, &y) in order.iter().zip(&img) {
                    m.insert(x, y)?;
                }
                let a1p = m.map_tuple(a1).expect("placed");
                let a2p = m.map_tuple(a2).expect("placed");
                let same = s.orbit_eq(&concat(&[&a1p, &a2p, b]), &concat(&[a1, a2, b]))?;
                if !same || omega.filter(s, &set_of(&a2p)) != set_of(&a1p) {
                    return Err(OligoError::PreconditionFailed("absorption failed its own check".into()));
                }
                return Ok((a1p, a2p));
            }
            Search::Budget => break,
            Search::Exhausted => extra *= 2,
        }
    }
    Err(OligoError::BudgetExceeded)
}

/// Samples the coheir and extension properties of Ω′.
pub fn lovely_pair_check(s: &Structure, omega: &Subuniverse, samples: usize, seed: u64) -> Vec<Check> {
    let params = |what: &str| json!({"kind": s.kind(), "omega": omega, "samples": samples, "seed": seed, "property": what});
    let coheir = run_trials("indep.lovely.coheir", params("coheir"), samples, derive(seed, 0), |r| {
        let a = random_closure(s, r, &ElemSet::new(), 1, 2);
        let b = random_closure(s, r, &ElemSet::new(), 0, 2);
        if !alg_indep(s, &b, &a, &omega.filter(s, &b)) {
            return Trial::Vacuous;
        }
        relocate(s, &a, &b, &mut |t, y| omega.contains(t, y), &mut |_, _| true)
    });
    let extension = run_trials("indep.lovely.extension", params("extension"), samples, derive(seed, 1), |r| {
        let a = random_closure(s, r, &ElemSet::new(), 1, 2);
        let gens: ElemSet = (0..r.gen_range(0..=2))
            .filter_map(|_| s.elements().filter(|&e| omega.contains(s, e)).choose(r))
            .collect();
        let b = s.acl(&gens);
        let bb = b.clone();
        relocate(s, &a, &b, &mut |t, y| !omega.contains(t, y) || bb.contains(&y), &mut |t, ap| {
            omega.filter(t, &t.acl(&union(ap, &bb))) == bb
        })
    });
    vec![coheir, extension]
}

/// Searches `a′ ≡_b a` whose points all pass `point` and whose image
/// passes `whole`.
fn relocate(
    s: &Structure,
    a: &ElemSet,
    b: &ElemSet,
    point: &mut dyn FnMut(&Structure, Elem) -> bool,
    whole: &mut dyn FnMut(&Structure, &ElemSet) -> bool,
) -> Trial {
    let mut t = s.clone();
    let at: Vec<Elem> = a.difference(b).copied().collect();
    t.ensure_room(&union(a, b), room(s, &at));
    let base = PartialMap::identity_on(b.iter().copied());
    if at.is_empty() {
        return if whole(&t, a) { Trial::Pass } else { Trial::Unknown };
    }
    let mut budget = SEARCH_BUDGET;
    let mut ok = |t: &Structure, out: &[Elem]| {
        if !point(t, out[out.len() - 1]) {
            return false;
        }
        out.len() < at.len() || whole(t, &union(&set_of(out), &a.intersection(b).copied().collect()))
    };
    match t.search_images(&base, &at, &mut ok, &mut budget) {
        Search::Found(_) => Trial::Pass,
        Search::Exhausted | Search::Budget => Trial::Unknown,
    }
}

/// Samples acl-closed `A ⊆ B` and C, and compares `acl(A ∪ (C∩B))` with
/// `acl(A∪C) ∩ B`.
pub fn modularity_check(s: &Structure, samples: usize, seed: u64) -> Check {
    let params = json!({"kind": s.kind(), "samples": samples, "seed": seed});
    run_trials("indep.modularity", params, samples, seed, |r| {
        let a = random_closure(s, r, &ElemSet::new(), 0, 1);
        let b = random_closure(s, r, &a, 1, 2);
        let c = random_closure(s, r, &ElemSet::new(), 1, 2);
        let lhs = s.acl(&union(&a, &c.intersection(&b).copied().collect()));
        let rhs: ElemSet = s.acl(&union(&a, &c)).intersection(&b).copied().collect();
        implication(true, lhs == rhs, || json!({"a": a, "b": b, "c": c}))
    })
}

/// `a ∈ acl(Ab) ∖ acl(A)` implies `b ∈ acl(Aa)`, with a drawn from
/// `acl(Ab) ∖ acl(A)` so the hypothesis usually holds.
pub fn exchange_check(s: &Structure, samples: usize, seed: u64) -> Check {
    let params = json!({"kind": s.kind(), "samples": samples, "seed": seed});
    run_trials("indep.exchange", params, samples, seed, |r| {
        let a_set = random_set(s, r, 0, 1);
        let b = r.gen_range(0..s.len());
        let base = s.acl(&a_set);
        let Some(a) = s.acl(&union(&a_set, &[b].into())).difference(&base).copied().choose(r) else {
            return Trial::Vacuous;
        };
        let back = s.acl(&union(&a_set, &[a].into()));
        implication(true, back.contains(&b), || json!({"set": a_set, "a": a, "b": b}))
    })
}

/// The three conditions on Ω′ being a k-sink relative to Δ, checked on
/// the first `depth` elements and on sampled chains.
pub fn sink_check(
    s: &Structure,
    omega: &Subuniverse,
    delta: &Subuniverse,
    k: usize,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Vec<Check> {
    let params = json!({"kind": s.kind(), "omega": omega, "delta": delta, "k": k, "depth": depth, "samples": samples, "seed": seed});
    vec![
        sink_equalizer(s, omega, depth, params.clone()),
        sink_chains(s, omega, delta, k, depth, samples, seed, params.clone()),
        sink_delta(s, omega, delta, depth, params),
    ]
}

fn budget_or_violation(check: &mut Check, e: impl std::fmt::Display, budget: bool) {
    if budget {
        check.inconclusive();
    } else {
        check.violation(json!({"error": e.to_string()}));
    }
}

/// Condition (1): `Ω′` is the equalizer of two embeddings.
fn sink_equalizer(s: &Structure, omega: &Subuniverse, depth: usize, params: Value) -> Check {
    let mut check = Check::new("indep.sink.equalizer", params);
    let mut t = s.clone();
    match image_disjoint_pair(&mut t, omega, depth, 1000) {
        Ok((alpha, beta)) => {
            let dom = alpha.domain_set();
            let eq: ElemSet = dom.iter().copied().filter(|&e| alpha.get(e) == beta.get(e)).collect();
            let want = omega.filter(&t, &dom);
            let meet: ElemSet = alpha.image_set().intersection(&beta.image_set()).copied().collect();
            if eq != want || meet != want {
                check.violation(json!({"equalizer": eq, "expected": want, "image_meet": meet}));
            }
            check.with_stats(json!({"explored": dom.len(), "in_omega": want.len()}))
        }
        Err(e) => {
            budget_or_violation(&mut check, &e, e == OligoError::BudgetExceeded);
            check
        }
    }
}

/// A random chain of closures of one or two random elements whose
/// consecutive terms meet inside Δ.
fn random_chain_meeting_in(s: &Structure, delta: &Subuniverse, k: usize, rng: &mut Rng) -> Option<Chain> {
    for _ in 0..100 {
        let sets: Vec<ElemSet> = (0..=k).map(|_| random_closure(s, rng, &ElemSet::new(), 1, 2)).collect();
        let c = Chain::of_sets(&sets);
        if c.meets().iter().all(|m| m.iter().all(|&e| delta.contains(s, e))) {
            return Some(c);
        }
    }
    None
}

/// Condition (2): a witness chain ending inside Ω′, built link by link by
/// absorption: intermediate terms are pushed off Ω′, the last one into it.
/// Returns the witness and the map `c_k ↦ c′_k`.
pub fn chain_into(
    s: &mut Structure,
    omega: &Subuniverse,
    c: &Chain,
    budget: u64,
) -> Result<(Vec<Vec<Elem>>, PartialMap), OligoError> {
    let k = c.len();
    let null: Vec<Elem> = s.acl(&ElemSet::new()).into_iter().collect();
    let mut w = vec![c.tuples[0].clone()];
    let mut h = PartialMap::identity_on(c.tuples[0].iter().copied());
    for i in 1..=k {
        // h sends c_{i-1} to w_{i-1}; extend it over c_i
        let mut g = h.restrict(&c.set(i - 1));
        for &x in &c.tuples[i] {
            s.extend(&mut g, x, 50)?;
        }
        let moved = g.map_tuple(&c.tuples[i]).expect("extended");
        let a1 = if i == k { moved.clone() } else { null.clone() };
        let (_, next) = absorb(s, omega, &a1, &moved, &w[i - 1], budget)?;
        h = PartialMap::from_pairs(c.tuples[i].iter().copied().zip(next.iter().copied()))?;
        w.push(next);
    }
    Ok((w, h))
}

#[allow(clippy::too_many_arguments)]
fn sink_chains(
    s: &Structure,
    omega: &Subuniverse,
    delta: &Subuniverse,
    k: usize,
    depth: usize,
    samples: usize,
    seed: u64,
    params: Value,
) -> Check {
    let mut check = Check::new("indep.sink.chains", params);
    let (mut built, mut skipped) = (0u64, 0u64);
    for i in 0..samples {
        let mut r = sub_rng(derive(seed, 1), i as u64);
        let Some(c) = random_chain_meeting_in(s, delta, k, &mut r) else {
            skipped += 1;
            continue;
        };
        let mut t = s.clone();
        let res = chain_into(&mut t, omega, &c, SEARCH_BUDGET).and_then(|(w, h)| {
            let mut u = h;
            let prefix: Vec<Elem> = t.elements().take(depth).collect();
            for x in prefix {
                t.extend_with(&mut u, x, &mut |t, y| omega.contains(t, y), 50)?;
            }
            Ok((w, u))
        });
        match res {
            Ok((w, u)) => {
                let gk = u.map_tuple(c.last()).expect("u is defined on c_k");
                let into = u.image().iter().all(|&y| omega.contains(&t, y));
                let searched = chain_membership_witness(&mut t, &c, &u, SEARCH_BUDGET);
                let found = matches!(searched, Ok(Membership::Witness(_)));
                if !(is_witness(&t, &c, &gk, &w) && into && t.is_partial_iso(&u) && found) {
                    check.violation(json!({"sample": i, "chain": c, "witness": w, "image_in_omega": into}));
                }
                built += 1;
            }
            Err(e) => budget_or_violation(&mut check, &e, e == OligoError::BudgetExceeded),
        }
    }
    if skipped > 0 {
        check.inconclusive();
    }
    check.with_stats(json!({"built": built, "no_chain_sampled": skipped}))
}

/// Condition (3): v on the first `depth` elements with `im(v) ∩ Ω′ =
/// v(Δ)`, grown one closure at a time and corrected by absorption.
pub fn delta_embedding(
    s: &mut Structure,
    omega: &Subuniverse,
    delta: &Subuniverse,
    depth: usize,
    budget: u64,
) -> Result<PartialMap, OligoError> {
    while (s.len() as usize) < depth {
        s.grow();
    }
    let prefix: Vec<Elem> = s.elements().take(depth).collect();
    let null = s.acl(&ElemSet::new());
    if !null.iter().all(|&e| omega.contains(s, e)) {
        return Err(OligoError::PreconditionFailed("acl(∅) is not inside Ω′".into()));
    }
    let mut v = PartialMap::identity_on(null.iter().copied());
    let mut done = null;
    for n in 0..prefix.len() {
        let next = s.acl(&union(&done, &set_of(&prefix[..=n])));
        if next == done {
            continue;
        }
        let mut g = v.clone();
        let a2: Vec<Elem> = next.iter().copied().collect();
        for &x in &a2 {
            s.extend(&mut g, x, 50)?;
        }
        let a1: Vec<Elem> = a2.iter().copied().filter(|&x| delta.contains(s, x)).collect();
        let b: Vec<Elem> = done.iter().copied().collect();
        let map = |t: &[Elem]| g.map_tuple(t).expect("extended");
        let (_, a2p) = absorb(s, omega, &map(&a1), &map(&a2), &map(&b), budget)?;
        v = PartialMap::from_pairs(a2.iter().copied().zip(a2p))?;
        done = next;
        if !s.is_partial_iso(&v) || !delta_condition(s, omega, delta, &v) {
            return Err(OligoError::PreconditionFailed(format!("step {n} breaks im(v) ∩ Ω′ = v(Δ)")));
        }
    }
    Ok(v)
}

fn delta_condition(s: &Structure, omega: &Subuniverse, delta: &Subuniverse, v: &PartialMap) -> bool {
    let want: ElemSet = v.pairs().iter().filter(|(x, _)| delta.contains(s, *x)).map(|&(_, y)| y).collect();
    omega.filter(s, &v.image_set()) == want
}

fn sink_delta(s: &Structure, omega: &Subuniverse, delta: &Subuniverse, depth: usize, params: Value) -> Check {
    let mut check = Check::new("indep.sink.delta", params);
    let mut t = s.clone();
    match delta_embedding(&mut t, omega, delta, depth, SEARCH_BUDGET) {
        Ok(v) => {
            let covered = (0..depth as u64).all(|e| v.get(e).is_some());
            if !covered || !t.is_partial_iso(&v) || !delta_condition(&t, omega, delta, &v) {
                check.violation(json!({"v": v}));
            }
            check.with_stats(json!({"domain": v.len()}))
        }
        Err(e) => {
            budget_or_violation(&mut check, &e, e == OligoError::BudgetExceeded);
            check
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oligo::Kind;
    use crate::report::Status;

    fn set(xs: &[Elem]) -> ElemSet {
        xs.iter().copied().collect()
    }

    fn f2(dim: u64) -> Structure {
        Structure::with_size(Kind::VecFq { q: 2 }, dim, 0).unwrap()
    }

    /// acl by brute force over spans, for VecF2 only.
    fn span(xs: &[Elem]) -> ElemSet {
        let mut out: ElemSet = [0].into();
        for &x in xs {
            let more: Vec<Elem> = out.iter().map(|&y| y ^ x).collect();
            out.extend(more);
        }
        out
    }

    #[test]
    fn alg_indep_examples() {
        let s = f2(3);
        assert!(alg_indep(&s, &set(&[1]), &set(&[2]), &set(&[])));
        assert!(!alg_indep(&s, &set(&[1]), &set(&[3, 2]), &set(&[])));
        // A inside acl(C)
        assert!(alg_indep(&s, &set(&[3]), &set(&[5, 6]), &set(&[1, 2])));
    }

    #[test]
    fn alg_indep_matches_span_arithmetic() {
        let s = f2(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                for c in 0..8u64 {
                    let ac = span(&[a, c]);
                    let bc = span(&[b, c]);
                    let want = ac.intersection(&bc).copied().collect::<ElemSet>() == span(&[c]);
                    assert_eq!(alg_indep(&s, &set(&[a]), &set(&[b]), &set(&[c])), want, "{a} {b} {c}");
                }
            }
        }
    }

    fn statuses(checks: &[Check]) -> Vec<(String, Status)> {
        checks.iter().map(|c| (c.name.clone(), c.status)).collect()
    }

    #[test]
    fn algebraic_axioms_hold_where_expected() {
        let kinds = [Kind::VecFq { q: 2 }, Kind::PureSet, Kind::CopiesKn { n: 3 }];
        for kind in kinds {
            let s = Structure::new(kind, 0).unwrap();
            let checks = axiom_suite(&s, IndepRelation::Algebraic, 60, 3);
            for c in &checks {
                assert_eq!(c.status, Status::Ok, "{kind} {}: {:?}", c.name, c.witness);
            }
        }
    }

    #[test]
    fn always_true_breaks_anti_reflexivity() {
        let s = f2(3);
        let checks = axiom_suite(&s, IndepRelation::AlwaysTrue, 40, 1);
        let by: std::collections::BTreeMap<_, _> = statuses(&checks).into_iter().collect();
        assert_eq!(by["indep.axioms.always_true.anti_reflexivity"], Status::Violation);
        assert_eq!(by["indep.axioms.always_true.refines_algebraic"], Status::Violation);
        assert_eq!(by["indep.axioms.always_true.symmetry"], Status::Ok);
    }

    #[test]
    fn affine_space_fails_base_monotonicity() {
        // by hand: A = {e2, e1+e2} and D = {0, e1} are independent over
        // the empty set, but over C = {0} both closures contain e1
        let s = Structure::new(Kind::AffineFq { q: 2 }, 0).unwrap();
        let (a, c, d) = (set(&[2, 3]), set(&[0]), set(&[0, 1]));
        assert!(alg_indep(&s, &a, &d, &set(&[])));
        assert!(!alg_indep(&s, &a, &d, &c));
        let checks = axiom_suite(&s, IndepRelation::Algebraic, 300, 7);
        let bm = checks.iter().find(|c| c.name.ends_with("base_monotonicity")).unwrap();
        assert_eq!(bm.status, Status::Violation);
        let w = &bm.witness.as_ref().unwrap()["instance"];
        let get = |k: &str| -> ElemSet { serde_json::from_value(w[k].clone()).unwrap() };
        assert!(alg_indep(&s, &get("a"), &get("d"), &get("b")));
        assert!(!alg_indep(&s, &get("a"), &get("d"), &get("c")));
        assert_eq!(modularity_check(&s, 200, 1).status, Status::Violation);
    }

    #[test]
    fn modularity_and_exchange() {
        let s = f2(4);
        assert_eq!(modularity_check(&s, 200, 2).status, Status::Ok);
        assert_eq!(exchange_check(&s, 200, 2).status, Status::Ok);
        let k3 = Structure::new(Kind::CopiesKn { n: 3 }, 0).unwrap();
        assert_eq!(exchange_check(&k3, 200, 2).status, Status::Ok);
    }

    #[test]
    fn orbit_rep_search_agrees_with_full_enumeration() {
        // does some A′ ≡_C A meet B outside acl(C)? asked of both searches
        let mut r = crate::rng::rng(4);
        for kind in [Kind::VecFq { q: 2 }, Kind::PureSet, Kind::CopiesKn { n: 3 }] {
            let s0 = Structure::new(kind, 0).unwrap();
            for _ in 0..60 {
                let (a, b, c) = (random_set(&s0, &mut r, 1, 2), random_set(&s0, &mut r, 0, 2), random_set(&s0, &mut r, 0, 1));
                let mut s = s0.clone();
                let at: Vec<Elem> = a.difference(&c).copied().collect();
                s.make_room(&union(&union(&a, &b), &c), room(&s0, &at));
                let cl = s.acl(&c);
                let base = PartialMap::identity_on(c.iter().copied());
                let hit = |img: &[Elem]| img.iter().any(|y| b.contains(y) && !cl.contains(y));
                let mut budget = u64::MAX;
                let reps = s.search_reps(&base, &at, &union(&b, &c), &mut |_, m, n| {
                    n < at.len() || hit(&m.map_tuple(&at).unwrap())
                }, &mut budget);
                let mut budget = u64::MAX;
                let full = s.search_images(&base, &at, &mut |_, out| out.len() < at.len() || hit(out), &mut budget);
                assert_eq!(matches!(reps, Search::Found(_)), matches!(full, Search::Found(_)), "{kind} {a:?} {b:?} {c:?}");
            }
        }
    }

    #[test]
    fn narrowness() {
        let s = f2(4);
        let c = Chain::of_sets(&[span(&[1]), span(&[2])]);
        assert_eq!(check_narrowness(&s, IndepRelation::Algebraic, 1, &set(&[0]), &c), Ok(true));
        let same = Chain::of_sets(&[set(&[0]), set(&[0])]);
        assert_eq!(check_narrowness(&s, IndepRelation::Algebraic, 1, &set(&[0]), &same), Ok(true));
        // c_0 = <e1>, c_1 = <e2>, c_2 = <e1+e2>: consecutive meets are 0
        // but c_0 and c_2 are not independent over c_1
        let bad = Chain::of_sets(&[span(&[1]), span(&[2]), span(&[3])]);
        assert!(matches!(
            check_narrowness(&s, IndepRelation::Algebraic, 2, &set(&[0]), &bad),
            Err(ChainError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn absorbing_configurations() {
        let s = f2(4);
        let om = Subuniverse::EvenSpan;
        let z = vec![0];
        assert_eq!(absorbing_config_check(&s, &om, &z, &z, &[0, 1, 2, 3]), Ok(true));
        assert_eq!(absorbing_config_check(&s, &om, &[0, 1], &z, &z), Err(OligoError::PreconditionFailed("a1 is not contained in a2".into())));
        assert_eq!(absorbing_config_check(&s, &om, &[1], &[1], &z), Err(OligoError::NotAclClosed));
        // b = <e1 + e2> meets Ω′ = <e2, e4> in 0, a1 = <e2>: the span of
        // b and a1 contains e1, which is fine, but b ⫝ a1 over 0 holds
        let b: Vec<Elem> = span(&[3]).into_iter().collect();
        let a1: Vec<Elem> = span(&[2]).into_iter().collect();
        assert_eq!(absorbing_config_check(&s, &om, &a1, &a1, &b), Ok(true));
        // a1 = <e1+e2> = b: condition (b) fails since b ∩ Ω′ = 0
        assert_eq!(absorbing_config_check(&s, &om, &b, &b, &b), Ok(false));
    }

    #[test]
    fn absorb_examples() {
        let om = Subuniverse::EvenSpan;
        // already absorbed: identity
        let mut s = f2(4);
        let a: Vec<Elem> = span(&[2]).into_iter().collect();
        let (a1, a2) = absorb(&mut s, &om, &a, &a, &[0], 10_000).unwrap();
        assert_eq!((a1.clone(), a2), (a.clone(), a.clone()));
        // a1 = <e1>, a2 = <e1, e3> with b = 0
        let a1: Vec<Elem> = span(&[1]).into_iter().collect();
        let a2: Vec<Elem> = span(&[1, 4]).into_iter().collect();
        let (p1, p2) = absorb(&mut s, &om, &a1, &a2, &[0], 10_000).unwrap();
        assert!(p1.iter().all(|&e| om.contains(&s, e)));
        assert_eq!(om.filter(&s, &set(&p2)), set(&p1));
        assert!(s.orbit_eq(&concat(&[&p1, &p2]), &concat(&[&a1, &a2])).unwrap());
        // dense order with the dyadic rationals as Ω′
        let mut q = Structure::new(Kind::DenseOrder, 0).unwrap();
        let om = Subuniverse::Dyadic;
        let pts: Vec<Elem> = q.elements().take(3).collect();
        let a1 = vec![pts[0]];
        let a2 = pts.clone();
        let b = vec![];
        let (p1, p2) = absorb(&mut q, &om, &a1, &a2, &b, 100_000).unwrap();
        assert!(om.contains(&q, p1[0]));
        assert_eq!(om.filter(&q, &set(&p2)), set(&p1));
        assert!(q.orbit_eq(&p2, &a2).unwrap());
    }

    #[test]
    fn lovely_pairs_on_even_span() {
        let s = f2(4);
        for c in lovely_pair_check(&s, &Subuniverse::EvenSpan, 30, 5) {
            assert_eq!(c.status, Status::Ok, "{}: {}", c.name, c.stats);
            assert!(c.stats["passed"].as_u64().unwrap() > 0);
        }
    }

    #[test]
    fn sinks_on_even_span() {
        let s = f2(5);
        let delta = Subuniverse::Finite(set(&[0]));
        for c in sink_check(&s, &Subuniverse::EvenSpan, &delta, 1, 20, 10, 3) {
            assert_eq!(c.status, Status::Ok, "{}: {:?} {}", c.name, c.witness, c.stats);
        }
    }

    #[test]
    fn delta_everything_sends_into_omega() {
        let mut s = f2(3);
        let v = delta_embedding(&mut s, &Subuniverse::EvenSpan, &Subuniverse::Whole, 8, 100_000).unwrap();
        assert!(v.image().iter().all(|&y| Subuniverse::EvenSpan.contains(&s, y)));
    }

    #[test]
    fn chain_inside_omega_is_kept() {
        let mut s = f2(4);
        let c = Chain::of_sets(&[span(&[2]), span(&[8])]);
        let (w, _) = chain_into(&mut s, &Subuniverse::EvenSpan, &c, 10_000).unwrap();
        assert_eq!(w[1], c.tuples[1]);
    }
}
