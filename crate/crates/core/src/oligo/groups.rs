//! Whole automorphisms of a truncation: generators, random elements and
//! candidate central elements.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::linalg::{axpy, code, Echelon};
use super::{Elem, Kind, PartialMap, Structure};
use crate::rng::Rng;

/// A group element given by a formula, so it is defined everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Central {
    /// v ↦ c·v on a vector space
    Scalar(u64),
    /// the same permutation of {0..n} inside every copy of K_n
    UniformPerm(Vec<u64>),
}

impl Central {
    pub fn apply(&self, s: &Structure, e: Elem) -> Elem {
        match (self, s.kind()) {
            (Central::Scalar(c), Kind::VecFq { q }) => {
                code(q, &s.vector(e).iter().map(|d| d * c % q).collect::<Vec<_>>())
            }
            (Central::UniformPerm(p), Kind::CopiesKn { n }) => (e / n) * n + p[(e % n) as usize],
            _ => e,
        }
    }

    /// Is this a well-formed automorphism of `s`'s kind?
    pub fn is_valid(&self, s: &Structure) -> bool {
        match (self, s.kind()) {
            (Central::Scalar(c), Kind::VecFq { q }) => c % q != 0,
            (Central::UniformPerm(p), Kind::CopiesKn { n }) => {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                sorted == (0..n).collect::<Vec<_>>()
            }
            _ => false,
        }
    }

    pub fn power_apply(&self, s: &Structure, k: usize, mut e: Elem) -> Elem {
        for _ in 0..k {
            e = self.apply(s, e);
        }
        e
    }
}

fn total(s: &Structure, f: impl Fn(Elem) -> Elem) -> PartialMap {
    PartialMap::from_pairs(s.elements().map(|e| (e, f(e)))).expect("a permutation")
}

fn cycle_perm(n: u64) -> Vec<u64> {
    (0..n).map(|i| (i + 1) % n).collect()
}

impl Structure {
    /// Generators of the automorphism group of the finite truncation, each
    /// a total map. Only for kinds whose truncation is itself homogeneous.
    pub fn generators(&self) -> Vec<PartialMap> {
        let mut out = Vec::new();
        match self.kind() {
            Kind::VecFq { q } => {
                let d = self.dim() as usize;
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            // e_i ↦ e_i + e_j
                            out.push(total(self, |e| {
                                let mut v = self.vector(e);
                                v[j] = (v[j] + v[i]) % q;
                                code(q, &v)
                            }));
                        }
                    }
                }
                if d > 0 {
                    let g = (2..q).find(|&g| (1..q - 1).all(|k| (0..k).fold(1, |a, _| a * g % q) != 1)).unwrap_or(1);
                    if g != 1 {
                        out.push(total(self, |e| {
                            let mut v = self.vector(e);
                            v[0] = v[0] * g % q;
                            code(q, &v)
                        }));
                    }
                }
            }
            Kind::CopiesKn { n } => {
                let copies = self.len() / n;
                for c in 0..copies.saturating_sub(1) {
                    out.push(total(self, |e| match e / n {
                        x if x == c => e + n,
                        x if x == c + 1 => e - n,
                        _ => e,
                    }));
                }
                if copies > 0 && n > 1 {
                    let mut swap: Vec<u64> = (0..n).collect();
                    swap.swap(0, 1);
                    for p in [swap, cycle_perm(n)] {
                        out.push(total(self, |e| if e < n { p[e as usize] } else { e }));
                    }
                }
            }
            Kind::PureSet => {
                let n = self.len();
                if n > 1 {
                    out.push(total(self, |e| match e {
                        0 => 1,
                        1 => 0,
                        e => e,
                    }));
                    out.push(total(self, |e| (e + 1) % n));
                }
            }
            _ => {}
        }
        out
    }

    /// A uniformly random automorphism of the truncation, where that makes
    /// sense.
    pub fn random_automorphism(&self, rng: &mut Rng) -> Option<PartialMap> {
        match self.kind() {
            Kind::VecFq { q } => {
                let d = self.dim();
                let cols = loop {
                    let mut ech = Echelon::new(q, d);
                    let cols: Vec<Vec<u64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..q)).collect()).collect();
                    if cols.iter().all(|c| ech.insert(c).is_none()) {
                        break cols;
                    }
                };
                Some(total(self, |e| {
                    let mut y = vec![0; d as usize];
                    for (f, c) in self.vector(e).iter().zip(&cols) {
                        axpy(q, &mut y, *f, c);
                    }
                    code(q, &y)
                }))
            }
            Kind::CopiesKn { n } => {
                let copies = self.len() / n;
                let mut cp: Vec<u64> = (0..copies).collect();
                cp.shuffle(rng);
                let inner: Vec<Vec<u64>> = (0..copies)
                    .map(|_| {
                        let mut p: Vec<u64> = (0..n).collect();
                        p.shuffle(rng);
                        p
                    })
                    .collect();
                Some(total(self, |e| cp[(e / n) as usize] * n + inner[(e / n) as usize][(e % n) as usize]))
            }
            Kind::PureSet => {
                let mut p: Vec<u64> = self.elements().collect();
                p.shuffle(rng);
                Some(total(self, |e| p[e as usize]))
            }
            _ => None,
        }
    }

    /// First generator and element where `g γ ≠ γ g`, if any.
    pub fn centrality_violation(&self, gamma: &Central) -> Option<(usize, Elem)> {
        for (i, g) in self.generators().iter().enumerate() {
            for e in self.elements() {
                let lhs = g.get(gamma.apply(self, e));
                let rhs = g.get(e).map(|y| gamma.apply(self, y));
                if lhs != rhs {
                    return Some((i, e));
                }
            }
        }
        None
    }

    /// Candidate central elements (scalars, or uniform within-copy
    /// permutations) that commute with every generator.
    pub fn central_elements(&self) -> Vec<Central> {
        let cands: Vec<Central> = match self.kind() {
            Kind::VecFq { q } => (1..q).map(Central::Scalar).collect(),
            Kind::CopiesKn { n } if n <= 6 => permutations(n).into_iter().map(Central::UniformPerm).collect(),
            _ => Vec::new(),
        };
        cands.into_iter().filter(|c| self.centrality_violation(c).is_none()).collect()
    }
}

fn permutations(n: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}
