//! Finite metric spaces valued in a distance monoid.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::monoid::{Dist, MonoidKind, MonoidSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u32);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("glue map is not a partial isometry at ({0}, {1})")]
    GlueNotIsometric(PointId, PointId),
    #[error("glue map is empty")]
    EmptyGlue,
    #[error("spaces use different monoids")]
    MonoidMismatch,
    #[error("requested distance to {0} is zero")]
    ZeroDistance(PointId),
    #[error("Katetov condition fails at ({0}, {1})")]
    KatetovViolation(PointId, PointId),
    #[error("an empty base does not determine a new point in a nonempty space")]
    EmptyBase,
    #[error("malformed space: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Identity,
    Symmetry,
    Triangle,
    Carrier,
}

/// The first failure found by [`validate_space`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceViolation {
    pub points: Vec<PointId>,
    pub axiom: Axiom,
}

/// Finite metric space. `dist` is a full square matrix indexed by position in
/// `points`, so asymmetric or otherwise broken input can be represented and
/// then rejected by [`validate_space`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    monoid: MonoidSpec,
    points: Vec<PointId>,
    index: HashMap<PointId, usize>,
    dist: Vec<Vec<Dist>>,
}

impl Space {
    pub fn empty(monoid: MonoidSpec) -> Space {
        Space { monoid, points: Vec::new(), index: HashMap::new(), dist: Vec::new() }
    }

    pub fn from_matrix(monoid: MonoidSpec, points: Vec<PointId>, dist: Vec<Vec<Dist>>) -> Result<Space, MetricError> {
        if dist.len() != points.len() || dist.iter().any(|row| row.len() != points.len()) {
            return Err(MetricError::Malformed("distance matrix is not square over the points".into()));
        }
        let mut index = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(*p, i).is_some() {
                return Err(MetricError::Malformed(format!("duplicate point {p}")));
            }
        }
        Ok(Space { monoid, points, index, dist })
    }

    /// Points `0..n` with `d(i, j)` given by a closure.
    pub fn from_fn(monoid: MonoidSpec, n: usize, f: impl Fn(usize, usize) -> Dist) -> Space {
        let points = (0..n as u32).map(PointId).collect();
        let dist = (0..n).map(|i| (0..n).map(|j| if i == j { monoid.zero() } else { f(i.min(j), i.max(j)) }).collect()).collect();
        Space::from_matrix(monoid, points, dist).expect("square by construction")
    }

    pub fn monoid(&self) -> &MonoidSpec {
        &self.monoid
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.index.contains_key(&p)
    }

    pub fn position(&self, p: PointId) -> Option<usize> {
        self.index.get(&p).copied()
    }

    fn pos(&self, p: PointId) -> Result<usize, MetricError> {
        self.position(p).ok_or(MetricError::UnknownPoint(p))
    }

    /// Distance between two points; panics on unknown ids.
    pub fn d(&self, x: PointId, y: PointId) -> &Dist {
        &self.dist[self.index[&x]][self.index[&y]]
    }

    pub fn try_d(&self, x: PointId, y: PointId) -> Result<&Dist, MetricError> {
        Ok(&self.dist[self.pos(x)?][self.pos(y)?])
    }

    pub fn next_id(&self) -> PointId {
        PointId(self.points.iter().map(|p| p.0 + 1).max().unwrap_or(0))
    }

    pub fn rows(&self) -> &[Vec<Dist>] {
        &self.dist
    }

    /// Append a point with the given distances (one per existing point, in
    /// point order). No validation.
    pub fn push_raw(&mut self, id: PointId, row: Vec<Dist>) {
        assert_eq!(row.len(), self.points.len());
        assert!(!self.index.contains_key(&id), "duplicate point {id}");
        for (r, d) in self.dist.iter_mut().zip(row.iter()) {
            r.push(d.clone());
        }
        let mut own = row;
        own.push(self.monoid.zero());
        self.dist.push(own);
        self.index.insert(id, self.points.len());
        self.points.push(id);
    }

    /// Realize `req` in place: returns the existing base point when some
    /// requested distance is zero, otherwise appends a fresh point whose
    /// distances to non-base points follow the amalgam formula.
    pub fn extend_in_place(&mut self, req: &ExtensionRequest) -> Result<PointId, MetricError> {
        if let Some((z, _)) = req.base.iter().find(|(_, d)| d.is_zero()) {
            self.pos(*z)?;
            return Ok(*z);
        }
        if let Err(v) = check_katetov(self, req)? {
            return Err(MetricError::KatetovViolation(v.0, v.1));
        }
        if req.base.is_empty() && !self.is_empty() {
            return Err(MetricError::EmptyBase);
        }
        let row = self.extension_row(req)?;
        let id = self.next_id();
        self.push_raw(id, row);
        Ok(id)
    }

    fn extension_row(&self, req: &ExtensionRequest) -> Result<Vec<Dist>, MetricError> {
        let base: Vec<(usize, &Dist)> =
            req.base.iter().map(|(z, f)| self.pos(*z).map(|i| (i, f))).collect::<Result<_, _>>()?;
        let mut given: HashMap<usize, &Dist> = HashMap::new();
        for (i, f) in &base {
            given.insert(*i, *f);
        }
        let m = &self.monoid;
        Ok((0..self.points.len())
            .map(|w| match given.get(&w) {
                Some(f) => (*f).clone(),
                None => base
                    .iter()
                    .map(|(z, f)| m.sum(&self.dist[w][*z], f))
                    .min()
                    .expect("nonempty base"),
            })
            .collect())
    }

    /// Sub-space on the given points, in the given order.
    pub fn restrict(&self, pts: &[PointId]) -> Result<Space, MetricError> {
        let idx: Vec<usize> = pts.iter().map(|p| self.pos(*p)).collect::<Result<_, _>>()?;
        let dist = idx.iter().map(|&i| idx.iter().map(|&j| self.dist[i][j].clone()).collect()).collect();
        Space::from_matrix(self.monoid.clone(), pts.to_vec(), dist)
    }
}

/// A finite injective partial map between spaces, stored by source id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialIsometry {
    pub pairs: BTreeMap<PointId, PointId>,
}

impl PartialIsometry {
    pub fn new() -> PartialIsometry {
        PartialIsometry::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PointId, PointId)>) -> PartialIsometry {
        PartialIsometry { pairs: pairs.into_iter().collect() }
    }

    pub fn identity(pts: &[PointId]) -> PartialIsometry {
        PartialIsometry::from_pairs(pts.iter().map(|p| (*p, *p)))
    }

    pub fn get(&self, x: PointId) -> Option<PointId> {
        self.pairs.get(&x).copied()
    }

    pub fn domain(&self) -> Vec<PointId> {
        self.pairs.keys().copied().collect()
    }

    pub fn image(&self) -> Vec<PointId> {
        self.pairs.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn insert(&mut self, x: PointId, y: PointId) {
        self.pairs.insert(x, y);
    }
}

/// Desired distances from a new point to each base point, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionRequest {
    pub base: Vec<(PointId, Dist)>,
}

impl ExtensionRequest {
    pub fn new(base: Vec<(PointId, Dist)>) -> ExtensionRequest {
        ExtensionRequest { base }
    }

    pub fn single(z: PointId, d: Dist) -> ExtensionRequest {
        ExtensionRequest { base: vec![(z, d)] }
    }
}

/// Check identity, symmetry, carrier membership and the triangle inequality,
/// in that order, returning the first failure.
pub fn validate_space(s: &Space) -> Result<(), SpaceViolation> {
    let n = s.len();
    let m = &s.monoid;
    let p = &s.points;
    for i in 0..n {
        for j in 0..n {
            let d = &s.dist[i][j];
            if !m.in_carrier(d) {
                return Err(SpaceViolation { points: vec![p[i], p[j]], axiom: Axiom::Carrier });
            }
            if (i == j) != d.is_zero() {
                let pts = if i == j { vec![p[i]] } else { vec![p[i], p[j]] };
                return Err(SpaceViolation { points: pts, axiom: Axiom::Identity });
            }
            if d != &s.dist[j][i] {
                return Err(SpaceViolation { points: vec![p[i], p[j]], axiom: Axiom::Symmetry });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if s.dist[i][k] > m.sum(&s.dist[i][j], &s.dist[j][k]) {
                    return Err(SpaceViolation { points: vec![p[i], p[j], p[k]], axiom: Axiom::Triangle });
                }
            }
        }
    }
    Ok(())
}

/// `Ok(Ok(()))` when `phi` is injective and distance preserving,
/// `Ok(Err(pair))` with the first offending pair of sources otherwise.
pub fn check_partial_isometry(
    phi: &PartialIsometry,
    src: &Space,
    dst: &Space,
) -> Result<Result<(), (PointId, PointId)>, MetricError> {
    for (x, y) in &phi.pairs {
        src.pos(*x)?;
        dst.pos(*y)?;
    }
    let pairs: Vec<(PointId, PointId)> = phi.pairs.iter().map(|(a, b)| (*a, *b)).collect();
    for (i, (x1, y1)) in pairs.iter().enumerate() {
        for (x2, y2) in &pairs[i + 1..] {
            if y1 == y2 || src.d(*x1, *x2) != dst.d(*y1, *y2) {
                return Ok(Err((*x1, *x2)));
            }
        }
    }
    Ok(Ok(()))
}

/// Result of [`amalgam`]: the amalgamated space (the left factor keeps its
/// ids) and where each point of the right factor went.
#[derive(Debug, Clone)]
pub struct Amalgam {
    pub space: Space,
    pub right: BTreeMap<PointId, PointId>,
}

/// Independent amalgam of `a` and `b` over the common part identified by
/// `glue` (a partial isometry from `a` to `b`).
pub fn amalgam(a: &Space, b: &Space, glue: &PartialIsometry) -> Result<Amalgam, MetricError> {
    if a.monoid != b.monoid {
        return Err(MetricError::MonoidMismatch);
    }
    if glue.is_empty() {
        return Err(MetricError::EmptyGlue);
    }
    if let Err((x, y)) = check_partial_isometry(glue, a, b)? {
        return Err(MetricError::GlueNotIsometric(x, y));
    }
    let m = &a.monoid;
    let inverse: HashMap<PointId, PointId> = glue.pairs.iter().map(|(x, y)| (*y, *x)).collect();
    let glue_pairs: Vec<(usize, usize)> = glue.pairs.iter().map(|(x, y)| (a.index[x], b.index[y])).collect();

    let mut out = a.clone();
    let mut right = BTreeMap::new();
    for (y, x) in &inverse {
        right.insert(*y, *x);
    }
    let mut next = a.next_id().0;
    for (jb, y) in b.points.iter().enumerate() {
        if inverse.contains_key(y) {
            continue;
        }
        let mut row = Vec::with_capacity(out.len());
        for w in out.points.iter() {
            let d = if let Some(ia) = a.index.get(w) {
                glue_pairs.iter().map(|(za, zb)| m.sum(&a.dist[*ia][*za], &b.dist[*zb][jb])).min().expect("nonempty glue")
            } else {
                // w came from b earlier in this loop
                let src = right.iter().find(|(_, v)| *v == w).map(|(k, _)| *k).expect("placed right point");
                b.d(src, *y).clone()
            };
            row.push(d);
        }
        let id = PointId(next);
        next += 1;
        out.push_raw(id, row);
        right.insert(*y, id);
    }
    Ok(Amalgam { space: out, right })
}

/// `Ok(Ok(()))` when both Katetov inequalities hold on all ordered pairs of
/// the base, `Ok(Err((x, y)))` for the first failing ordered pair.
pub fn check_katetov(s: &Space, req: &ExtensionRequest) -> Result<Result<(), (PointId, PointId)>, MetricError> {
    let mut idx = Vec::with_capacity(req.base.len());
    for (z, f) in &req.base {
        let i = s.pos(*z)?;
        if f.is_zero() {
            return Err(MetricError::ZeroDistance(*z));
        }
        idx.push(i);
    }
    let m = &s.monoid;
    for (a, (x, fx)) in req.base.iter().enumerate() {
        for (b, (y, fy)) in req.base.iter().enumerate() {
            if a == b {
                continue;
            }
            let dxy = &s.dist[idx[a]][idx[b]];
            if fx > &m.sum(dxy, fy) || dxy > &m.sum(fx, fy) {
                return Ok(Err((*x, *y)));
            }
        }
    }
    Ok(Ok(()))
}

/// Pure version of [`Space::extend_in_place`].
pub fn extend_one_point(s: &Space, req: &ExtensionRequest) -> Result<(Space, PointId), MetricError> {
    let mut out = s.clone();
    let p = out.extend_in_place(req)?;
    Ok((out, p))
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    monoid: MonoidKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    top: Option<Dist>,
    points: Vec<PointId>,
    dist: Vec<Vec<Dist>>,
}

impl Serialize for Space {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let top = match self.monoid.kind {
            MonoidKind::TruncatedUnitRationals if self.monoid.top != Some(Dist::int(1)) => self.monoid.top.clone(),
            _ => None,
        };
        SpaceJson { monoid: self.monoid.kind, top, points: self.points.clone(), dist: self.dist.clone() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Space {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Space, D::Error> {
        let raw = SpaceJson::deserialize(de)?;
        let bound = raw.top.and_then(|d| d.scalar().cloned());
        let monoid = crate::monoid::make_monoid(raw.monoid, bound).map_err(serde::de::Error::custom)?;
        Space::from_matrix(monoid, raw.points, raw.dist).map_err(serde::de::Error::custom)
    }
}

/// Points of `s` in `pts` ordered by id; convenience for reports.
pub fn sorted_ids(pts: impl IntoIterator<Item = PointId>) -> Vec<PointId> {
    pts.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> MonoidSpec {
        MonoidSpec::new(MonoidKind::RationalsNonneg)
    }

    fn p(i: u32) -> PointId {
        PointId(i)
    }

    fn space(m: MonoidSpec, rows: &[&[i64]]) -> Space {
        let n = rows.len();
        let dist = rows.iter().map(|r| r.iter().map(|&x| Dist::int(x)).collect()).collect();
        Space::from_matrix(m, (0..n as u32).map(PointId).collect(), dist).unwrap()
    }

    #[test]
    fn validate_examples() {
        let bad = space(q(), &[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]);
        assert_eq!(
            validate_space(&bad),
            Err(SpaceViolation { points: vec![p(0), p(1), p(2)], axiom: Axiom::Triangle })
        );
        let zero = space(q(), &[&[0, 0], &[0, 0]]);
        assert_eq!(validate_space(&zero).unwrap_err().axiom, Axiom::Identity);
        let eq = space(q(), &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert!(validate_space(&eq).is_ok());
        let asym = space(q(), &[&[0, 1], &[2, 0]]);
        assert_eq!(validate_space(&asym).unwrap_err().axiom, Axiom::Symmetry);
    }

    #[test]
    fn partial_isometry_examples() {
        let eq = space(q(), &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        assert_eq!(check_partial_isometry(&PartialIsometry::new(), &eq, &eq).unwrap(), Ok(()));
        assert_eq!(check_partial_isometry(&PartialIsometry::identity(eq.points()), &eq, &eq).unwrap(), Ok(()));
        let collapse = PartialIsometry::from_pairs([(p(0), p(1)), (p(1), p(1))]);
        assert!(check_partial_isometry(&collapse, &eq, &eq).unwrap().is_err());
        let unknown = PartialIsometry::from_pairs([(p(9), p(1))]);
        assert_eq!(check_partial_isometry(&unknown, &eq, &eq), Err(MetricError::UnknownPoint(p(9))));
    }

    #[test]
    fn amalgam_single_glue() {
        let a = space(q(), &[&[0, 2], &[2, 0]]);
        let b = space(q(), &[&[0, 3], &[3, 0]]);
        let am = amalgam(&a, &b, &PartialIsometry::from_pairs([(p(0), p(0))])).unwrap();
        let y = am.right[&p(1)];
        assert_eq!(am.space.d(p(1), y), &Dist::int(5));
        assert!(validate_space(&am.space).is_ok());

        let t = MonoidSpec::new(MonoidKind::TruncatedUnitRationals);
        let a = Space::from_fn(t.clone(), 2, |_, _| Dist::frac(7, 10));
        let b = Space::from_fn(t, 2, |_, _| Dist::frac(6, 10));
        let am = amalgam(&a, &b, &PartialIsometry::from_pairs([(p(0), p(0))])).unwrap();
        assert_eq!(am.space.d(p(1), am.right[&p(1)]), &Dist::int(1));
    }

    #[test]
    fn amalgam_two_glue_points() {
        // A = {c1, c2, x}, B = {c1, c2, y}
        let a = space(q(), &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]]);
        let b = space(q(), &[&[0, 1, 4], &[1, 0, 1], &[4, 1, 0]]);
        let glue = PartialIsometry::from_pairs([(p(0), p(0)), (p(1), p(1))]);
        let am = amalgam(&a, &b, &glue).unwrap();
        // brute-force min over the glue: min(1+4, 2+1) = 3
        assert_eq!(am.space.d(p(2), am.right[&p(2)]), &Dist::int(3));
        assert!(validate_space(&am.space).is_ok());
    }

    #[test]
    fn amalgam_errors() {
        let a = space(q(), &[&[0, 2], &[2, 0]]);
        let b = space(q(), &[&[0, 3], &[3, 0]]);
        assert_eq!(amalgam(&a, &b, &PartialIsometry::new()).unwrap_err(), MetricError::EmptyGlue);
        let glue = PartialIsometry::from_pairs([(p(0), p(0)), (p(1), p(1))]);
        assert!(matches!(amalgam(&a, &b, &glue), Err(MetricError::GlueNotIsometric(..))));
    }

    #[test]
    fn katetov_examples() {
        let s = space(q(), &[&[0, 2], &[2, 0]]);
        let ok = ExtensionRequest::new(vec![(p(0), Dist::int(1)), (p(1), Dist::int(1))]);
        assert_eq!(check_katetov(&s, &ok).unwrap(), Ok(()));
        let bad = ExtensionRequest::new(vec![(p(0), Dist::int(1)), (p(1), Dist::int(4))]);
        assert_eq!(check_katetov(&s, &bad).unwrap(), Err((p(1), p(0))));
        assert_eq!(check_katetov(&s, &ExtensionRequest::single(p(0), Dist::int(9))).unwrap(), Ok(()));
        let zero = ExtensionRequest::single(p(0), Dist::int(0));
        assert_eq!(check_katetov(&s, &zero), Err(MetricError::ZeroDistance(p(0))));
    }

    #[test]
    fn extend_examples() {
        let s = space(q(), &[&[0, 2], &[2, 0]]);
        let (t, np) = extend_one_point(&s, &ExtensionRequest::single(p(0), Dist::int(1))).unwrap();
        assert_eq!(np, p(2));
        assert_eq!(t.d(np, p(1)), &Dist::int(3));
        assert!(validate_space(&t).is_ok());
        let (same, z) = extend_one_point(&s, &ExtensionRequest::single(p(1), Dist::int(0))).unwrap();
        assert_eq!((same.len(), z), (2, p(1)));
        let bad = ExtensionRequest::new(vec![(p(0), Dist::int(1)), (p(1), Dist::int(4))]);
        assert!(matches!(extend_one_point(&s, &bad), Err(MetricError::KatetovViolation(..))));
    }

    #[test]
    fn json_round_trip() {
        let s = space(q(), &[&[0, 2], &[2, 0]]);
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"monoid":"q_nonneg","points":[0,1],"dist":[["0","2"],["2","0"]]}"#);
        let back: Space = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
