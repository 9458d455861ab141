//! Finite prefixes of the countable Urysohn space of a distance monoid.
//!
//! The scheduler walks through one-point extension requests `(S, f)` in order
//! of a weight `max(S) + |S| + level(f)`, where `level(f)` is the largest
//! numerator or denominator appearing in `f`. There are finitely many
//! requests of each weight, so every request is reached after finitely many
//! steps. Requests that mention points which do not exist yet are parked and
//! served as soon as the prefix is long enough.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::metric::{check_katetov, ExtensionRequest, MetricError, PartialIsometry, PointId, Space};
use crate::monoid::{Dist, MonoidSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Request {
    base: Vec<PointId>,
    vals: Vec<Dist>,
}

impl Request {
    fn max_id(&self) -> Option<u32> {
        self.base.last().map(|p| p.0)
    }

    fn to_ext(&self) -> ExtensionRequest {
        ExtensionRequest::new(self.base.iter().copied().zip(self.vals.iter().cloned()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    /// Scheduler cursor at realization; `None` for on-demand realizations.
    pub cursor: Option<u64>,
    pub point: PointId,
    pub request: ExtensionRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Realized(PointId),
    AlreadyRealized,
    NotKatetov,
}

#[derive(Debug, Clone)]
pub struct Generator {
    space: Space,
    cursor: u64,
    weight: u64,
    queue: VecDeque<Request>,
    parked: BTreeMap<u32, VecDeque<Request>>,
    values: Vec<Dist>,
    values_level: u64,
    log: Vec<LogEntry>,
}

impl Generator {
    pub fn new(monoid: MonoidSpec) -> Generator {
        Generator::from_space(Space::empty(monoid))
    }

    /// Continue the construction from an arbitrary finite seed space whose
    /// points are `0..n`.
    pub fn from_space(space: Space) -> Generator {
        assert!(
            space.points().iter().enumerate().all(|(i, p)| p.0 as usize == i),
            "generator spaces use ids 0..n"
        );
        Generator {
            space,
            cursor: 0,
            weight: 0,
            queue: VecDeque::new(),
            parked: BTreeMap::new(),
            values: Vec::new(),
            values_level: 0,
            log: Vec::new(),
        }
    }

    /// Run the scheduler until the prefix has at least `n` points.
    pub fn with_points(monoid: MonoidSpec, n: usize) -> Generator {
        let mut g = Generator::new(monoid);
        while g.space.len() < n {
            g.step();
        }
        g
    }

    pub fn monoid(&self) -> &MonoidSpec {
        self.space.monoid()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn d(&self, x: PointId, y: PointId) -> &Dist {
        self.space.d(x, y)
    }

    /// Nonzero carrier values of level at most `level`, sorted by level.
    fn values_up_to(&mut self, level: u64) -> &[Dist] {
        if self.values_level < level {
            let m = self.space.monoid().clone();
            let mut v: Vec<Dist> = m.grid(level).into_iter().filter(|d| !d.is_zero()).collect();
            v.sort_by(|a, b| a.level().cmp(&b.level()).then(a.cmp(b)));
            self.values = v;
            self.values_level = level;
        }
        let end = self.values.partition_point(|d| d.level() <= level);
        &self.values[..end]
    }

    fn materialize(&mut self, w: u64) {
        if w == 0 {
            self.queue.push_back(Request { base: vec![], vals: vec![] });
            return;
        }
        // w = max + k + level with max ≥ k - 1 and level ≥ 1
        let mut out = Vec::new();
        let mut k = 1u64;
        while 2 * k <= w {
            let mut top = k - 1;
            while top + k < w {
                let level = w - top - k;
                let vals: Vec<Dist> = self.values_up_to(level).to_vec();
                if !vals.is_empty() && vals.last().map(|d| d.level()) == Some(level) {
                    for rest in subsets(top as u32, (k - 1) as usize) {
                        let mut base: Vec<PointId> = rest.into_iter().map(PointId).collect();
                        base.push(PointId(top as u32));
                        for_each_vector(&vals, k as usize, &mut |vec| {
                            if vec.iter().any(|d| d.level() == level) {
                                out.push(Request { base: base.clone(), vals: vec.to_vec() });
                            }
                        });
                    }
                }
                top += 1;
            }
            k += 1;
        }
        self.queue.extend(out);
    }

    fn next_request(&mut self) -> Request {
        let len = self.space.len() as u32;
        loop {
            if let Some((&key, _)) = self.parked.iter().next() {
                if key < len {
                    let q = self.parked.get_mut(&key).expect("present");
                    let r = q.pop_front().expect("nonempty parked queue");
                    if q.is_empty() {
                        self.parked.remove(&key);
                    }
                    return r;
                }
            }
            match self.queue.pop_front() {
                Some(r) => match r.max_id() {
                    Some(m) if m >= len => self.parked.entry(m).or_default().push_back(r),
                    _ => return r,
                },
                None => {
                    let w = self.weight;
                    self.weight += 1;
                    self.materialize(w);
                }
            }
        }
    }

    /// Whether some point realizes `req` (all requested distances nonzero).
    pub fn is_realized(&self, req: &ExtensionRequest) -> bool {
        if req.base.is_empty() {
            return !self.space.is_empty();
        }
        let idx: Vec<usize> = req.base.iter().map(|(z, _)| self.space.position(*z).expect("known point")).collect();
        let rows = self.space.rows();
        (0..self.space.len()).any(|p| req.base.iter().zip(&idx).all(|((_, f), &i)| &rows[p][i] == f))
    }

    /// Dequeue and serve one scheduled request.
    pub fn step(&mut self) -> StepOutcome {
        let r = self.next_request();
        self.cursor += 1;
        let req = r.to_ext();
        if self.is_realized(&req) {
            return StepOutcome::AlreadyRealized;
        }
        if !matches!(check_katetov(&self.space, &req), Ok(Ok(()))) {
            return StepOutcome::NotKatetov;
        }
        let p = self.space.extend_in_place(&req).expect("Katetov checked");
        self.log.push(LogEntry { cursor: Some(self.cursor), point: p, request: req });
        StepOutcome::Realized(p)
    }

    /// Step until the prefix gains a point.
    pub fn grow(&mut self) -> PointId {
        let n = self.space.len();
        while self.space.len() == n {
            self.step();
        }
        PointId(n as u32)
    }

    /// Append a point without consulting the schedule: the seed point when
    /// the prefix is empty, else a point at distance `unit` from the newest
    /// one. Used when a caller only needs the prefix to be longer; running
    /// the scheduler instead can be very slow once many points were added
    /// out of order.
    pub fn fresh_point(&mut self) -> PointId {
        if self.space.is_empty() {
            return self.grow();
        }
        let last = PointId(self.space.len() as u32 - 1);
        let unit = self.values_up_to(1)[0].clone();
        self.realize_type(&ExtensionRequest::single(last, unit)).expect("single-point requests are Katetov")
    }

    /// Realize a point out of schedule order.
    pub fn realize_type(&mut self, req: &ExtensionRequest) -> Result<PointId, MetricError> {
        let before = self.space.len();
        let p = self.space.extend_in_place(req)?;
        if self.space.len() > before {
            self.log.push(LogEntry { cursor: None, point: p, request: req.clone() });
        }
        Ok(p)
    }

    /// Extend `phi` (an isometry between subsets of the prefix) to `target`:
    /// the lowest-id point with the forced distances, else a fresh one.
    pub fn extend_partial_isometry(&mut self, phi: &mut PartialIsometry, target: PointId) -> Result<PointId, MetricError> {
        assert!(phi.get(target).is_none(), "target already in the domain");
        let forced: Vec<(PointId, Dist)> =
            phi.pairs.iter().map(|(x, y)| (*y, self.space.try_d(target, *x).cloned())).map(|(y, d)| d.map(|d| (y, d))).collect::<Result<_, _>>()?;
        let img = match self.lowest_match(&forced, &phi.image()) {
            Some(p) => p,
            None => self.realize_type(&ExtensionRequest::new(forced))?,
        };
        phi.insert(target, img);
        Ok(img)
    }

    /// Lowest-id point outside `exclude` at the given distances.
    pub fn lowest_match(&self, forced: &[(PointId, Dist)], exclude: &[PointId]) -> Option<PointId> {
        let idx: Vec<usize> = forced.iter().map(|(z, _)| self.space.position(*z).expect("known point")).collect();
        let rows = self.space.rows();
        self.space
            .points()
            .iter()
            .enumerate()
            .find(|(p, id)| !exclude.contains(id) && forced.iter().zip(&idx).all(|((_, f), &i)| &rows[*p][i] == f))
            .map(|(_, id)| *id)
    }

    /// All points outside `exclude` at the given distances, ascending.
    pub fn matches(&self, forced: &[(PointId, Dist)], exclude: &[PointId]) -> Vec<PointId> {
        let idx: Vec<usize> = forced.iter().map(|(z, _)| self.space.position(*z).expect("known point")).collect();
        let rows = self.space.rows();
        self.space
            .points()
            .iter()
            .enumerate()
            .filter(|(p, id)| !exclude.contains(id) && forced.iter().zip(&idx).all(|((_, f), &i)| &rows[*p][i] == f))
            .map(|(_, id)| *id)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.space).expect("serializable");
        v["log"] = serde_json::to_value(&self.log).expect("serializable");
        v["cursor"] = self.cursor.into();
        v
    }
}

/// `k`-element subsets of `0..n`, in lexicographic order.
pub fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if (n - i) as usize >= k - cur.len() {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn for_each_vector(vals: &[Dist], k: usize, f: &mut dyn FnMut(&[Dist])) {
    fn rec(vals: &[Dist], k: usize, cur: &mut Vec<Dist>, f: &mut dyn FnMut(&[Dist])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for v in vals {
            cur.push(v.clone());
            rec(vals, k, cur, f);
            cur.pop();
        }
    }
    rec(vals, k, &mut Vec::with_capacity(k), f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpEntry {
    pub request: ExtensionRequest,
    pub realized: Option<PointId>,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpReport {
    pub entries: Vec<EpEntry>,
}

impl EpReport {
    pub fn all_realized(&self) -> bool {
        self.entries.iter().all(|e| e.realized.is_some())
    }

    pub fn budget_exceeded(&self) -> usize {
        self.entries.iter().filter(|e| e.realized.is_none()).count()
    }
}

/// For every Katetov request over a subset (size 1 to 3) of the first
/// `base_bound` points with values from `grid(grid_level)`, run a copy of the
/// scheduler for at most `budget` steps and record whether the request got
/// realized by some point. The generator itself is not modified.
pub fn verify_extension_property(g: &Generator, base_bound: usize, grid_level: u64, budget: u64) -> EpReport {
    let mut work = g.clone();
    let mut entries = Vec::new();
    if base_bound == 0 {
        return EpReport { entries };
    }
    let mut spent = 0u64;
    while work.len() < base_bound && spent < budget {
        work.step();
        spent += 1;
    }
    let bound = base_bound.min(work.len()) as u32;
    let vals: Vec<Dist> = work.monoid().grid(grid_level).into_iter().filter(|d| !d.is_zero()).collect();
    for k in 1..=3usize {
        for sub in subsets(bound, k) {
            let base: Vec<PointId> = sub.into_iter().map(PointId).collect();
            for_each_vector(&vals, k, &mut |vec| {
                let req = ExtensionRequest::new(base.iter().copied().zip(vec.iter().cloned()).collect());
                if !matches!(check_katetov(work.space(), &req), Ok(Ok(()))) {
                    return;
                }
                let mut steps = 0;
                while !work.is_realized(&req) && steps < budget {
                    work.step();
                    steps += 1;
                }
                let realized = if work.is_realized(&req) {
                    let forced: Vec<(PointId, Dist)> = req.base.clone();
                    work.lowest_match(&forced, &[])
                } else {
                    None
                };
                entries.push(EpEntry { request: req, realized, steps });
            });
        }
    }
    if base_bound > work.len() {
        // the requested points never appeared within the budget
        entries.push(EpEntry { request: ExtensionRequest::new(vec![]), realized: None, steps: spent });
    }
    EpReport { entries }
}
