//! Exhaustive and randomized searches for subsets of size `p` that extremize
//! `ε`, with dihedral-symmetry pruning and incremental error updates.
//!
//! During a search every candidate has the same size `p`, so the metrics are
//! compared through an integer key equal to `p²` times the unnormalized sum;
//! the normalized variants only divide that key by constants.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combin::{binomial, Combinations};
use crate::epsilon::{self, ErrorReport};
use crate::lattice::{ClassTable, LatticeSpec, PairClass};
use crate::subset::{Point, PointSet};
use crate::{Error, Rational, Result};

/// Default cap on combinations walked by an exhaustive search.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Local-search sweeps per restart before giving up on convergence.
const MAX_SWEEPS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    ExactNormalized,
    #[default]
    ExactUnnormalized,
    PairEstimate,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::ExactNormalized, Metric::ExactUnnormalized, Metric::PairEstimate];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::ExactNormalized => "exact-normalized",
            Metric::ExactUnnormalized => "exact-unnormalized",
            Metric::PairEstimate => "pair-estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exhaustive,
    RandomRestart { iterations: u32, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchTask {
    pub spec: LatticeSpec,
    pub p: usize,
    pub objective: Objective,
    pub metric: Metric,
    pub mode: Mode,
    pub budget: u64,
}

impl SearchTask {
    /// Exhaustive maximization of the unnormalized exact error.
    pub fn new(spec: LatticeSpec, p: usize) -> Self {
        Self {
            spec,
            p,
            objective: Objective::Maximize,
            metric: Metric::default(),
            mode: Mode::Exhaustive,
            budget: DEFAULT_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        let max = self.spec.point_count();
        if self.p == 0 || self.p as u64 > max {
            return Err(Error::InvalidSubsetSize { p: self.p as u64, max });
        }
        if self.budget == 0 {
            return Err(Error::NotPositive("budget"));
        }
        if let Mode::RandomRestart { iterations: 0, .. } = self.mode {
            return Err(Error::NotPositive("iterations"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Lexicographically smallest member of its dihedral orbit.
    pub best: PointSet,
    pub value: Rational,
    /// Combinations walked (exhaustive) or moves evaluated (random restart).
    pub candidates_examined: u64,
    /// Candidates whose error was actually evaluated.
    pub canonical_evaluated: u64,
    pub symmetry_class_size: usize,
    /// False when the budget cut the search short.
    pub complete: bool,
}

/// The eight symmetries of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Identity,
    Rotate90,
    Rotate180,
    Rotate270,
    MirrorX,
    MirrorY,
    Transpose,
    AntiTranspose,
}

impl Symmetry {
    pub const ALL: [Symmetry; 8] = [
        Symmetry::Identity,
        Symmetry::Rotate90,
        Symmetry::Rotate180,
        Symmetry::Rotate270,
        Symmetry::MirrorX,
        Symmetry::MirrorY,
        Symmetry::Transpose,
        Symmetry::AntiTranspose,
    ];

    pub fn apply(self, p: Point, n: u32) -> Point {
        let m = n - 1;
        let (x, y) = (p.x, p.y);
        let (x, y) = match self {
            Symmetry::Identity => (x, y),
            Symmetry::Rotate90 => (y, m - x),
            Symmetry::Rotate180 => (m - x, m - y),
            Symmetry::Rotate270 => (m - y, x),
            Symmetry::MirrorX => (m - x, y),
            Symmetry::MirrorY => (x, m - y),
            Symmetry::Transpose => (y, x),
            Symmetry::AntiTranspose => (m - y, m - x),
        };
        Point::new(x, y)
    }
}

pub fn transform(set: &PointSet, g: Symmetry) -> PointSet {
    let n = set.spec().side();
    let mut pts: Vec<Point> = set.points().iter().map(|&p| g.apply(p, n)).collect();
    pts.sort_unstable();
    PointSet::from_sorted_unchecked(set.spec(), pts)
}

/// Lexicographically smallest of the eight images of `set`.
pub fn canonicalize(set: &PointSet) -> PointSet {
    Symmetry::ALL
        .iter()
        .map(|&g| transform(set, g))
        .min_by(|a, b| a.points().cmp(b.points()))
        .expect("eight images")
}

/// Number of distinct images of `set` under the symmetry group.
pub fn orbit_size(set: &PointSet) -> usize {
    let mut images: Vec<PointSet> = Symmetry::ALL.iter().map(|&g| transform(set, g)).collect();
    images.sort_unstable_by(|a, b| a.points().cmp(b.points()));
    images.dedup();
    images.len()
}

/// Orbit-minimality test for sorted point lists with a reusable buffer.
///
/// Points are compared through their row-major index, which orders them
/// like `Point`. Each image is compared element by element against the
/// sorted input, extracting its next-smallest index on demand, so most
/// images are rejected after one or two `O(p)` scans.
#[derive(Debug, Default)]
struct CanonicalCheck {
    original: Vec<u64>,
    image: Vec<u64>,
}

impl CanonicalCheck {
    /// True when no symmetry image of the sorted `points` is smaller.
    fn is_canonical(&mut self, points: &[Point], n: u32) -> bool {
        let key = |p: Point| u64::from(p.x) * u64::from(n) + u64::from(p.y);
        self.original.clear();
        self.original.extend(points.iter().map(|&p| key(p)));
        for &g in &Symmetry::ALL[1..] {
            self.image.clear();
            self.image.extend(points.iter().map(|&p| key(g.apply(p, n))));
            let mut prev: Option<u64> = None;
            for &want in &self.original {
                let next = self
                    .image
                    .iter()
                    .copied()
                    .filter(|&k| prev.is_none_or(|q| k > q))
                    .min()
                    .expect("images are distinct");
                match next.cmp(&want) {
                    Ordering::Less => return false,
                    Ordering::Greater => break,
                    Ordering::Equal => prev = Some(next),
                }
            }
        }
        true
    }
}

/// Per-class increments caused by adding `add` to `set`, `O(p)`.
pub fn incremental_epsilon(set: &PointSet, add: Point) -> Result<Vec<(PairClass, u64)>> {
    let n = set.spec().side();
    if add.x >= n || add.y >= n {
        return Err(Error::PointOutOfRange { x: add.x, y: add.y, n });
    }
    if set.contains(add) {
        return Err(Error::DuplicatePoint { x: add.x, y: add.y });
    }
    let mut deltas: Vec<(PairClass, u64)> = Vec::new();
    for q in set.points() {
        let class = add.class_to(q).expect("distinct points");
        match deltas.binary_search_by(|(c, _)| c.cmp(&class)) {
            Ok(i) => deltas[i].1 += 1,
            Err(i) => deltas.insert(i, (class, 1)),
        }
    }
    Ok(deltas)
}

/// Class and distance counts of a growing/shrinking subset, plus running
/// error sums for a fixed target size.
///
/// For target size `p` and distance frequency `L`, each distance contributes
/// `|N⁴·S − p²·L| − p²·L` on top of the empty-subset baseline `p²·C(N², 2)`,
/// so the sums change in `O(1)` per count update.
#[derive(Debug, Clone)]
pub struct IncrementalEvaluator<'t> {
    table: &'t ClassTable,
    n4: i128,
    p2: i128,
    points: Vec<Point>,
    class_counts: Vec<u64>,
    distance_counts: Vec<u64>,
    exact_delta: i128,
    pair_delta: i128,
}

impl<'t> IncrementalEvaluator<'t> {
    pub fn new(table: &'t ClassTable, target_p: usize) -> Self {
        let spec = table.spec();
        Self {
            table,
            n4: i128::from(spec.point_count()).pow(2),
            p2: (target_p as i128).pow(2),
            points: Vec::with_capacity(target_p),
            class_counts: alloc::vec![0; table.class_count()],
            distance_counts: alloc::vec![0; table.distance_count()],
            exact_delta: 0,
            pair_delta: 0,
        }
    }

    pub fn from_set(table: &'t ClassTable, set: &PointSet) -> Result<Self> {
        if set.spec() != table.spec() {
            return Err(Error::LatticeMismatch { expected: table.spec().side(), found: set.spec().side() });
        }
        let mut eval = Self::new(table, set.len());
        for &p in set.points() {
            eval.push_unchecked(p);
        }
        Ok(eval)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `S_{a,b}` indexed by [`PairClass::index`].
    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    pub fn add(&mut self, p: Point) -> Result<()> {
        let n = self.table.spec().side();
        if p.x >= n || p.y >= n {
            return Err(Error::PointOutOfRange { x: p.x, y: p.y, n });
        }
        if self.points.contains(&p) {
            return Err(Error::DuplicatePoint { x: p.x, y: p.y });
        }
        self.push_unchecked(p);
        Ok(())
    }

    pub fn remove(&mut self, p: Point) -> Result<()> {
        let idx = self
            .points
            .iter()
            .position(|&q| q == p)
            .ok_or(Error::MissingPoint { x: p.x, y: p.y })?;
        self.points.swap_remove(idx);
        self.unlink(p);
        Ok(())
    }

    /// Removes the most recently stored point.
    pub fn pop(&mut self) -> Option<Point> {
        let p = self.points.pop()?;
        self.unlink(p);
        Some(p)
    }

    fn push_unchecked(&mut self, p: Point) {
        for i in 0..self.points.len() {
            let q = self.points[i];
            self.bump(p.class_to(&q).expect("distinct points").index(), true);
        }
        self.points.push(p);
    }

    fn unlink(&mut self, p: Point) {
        for i in 0..self.points.len() {
            let q = self.points[i];
            self.bump(p.class_to(&q).expect("distinct points").index(), false);
        }
    }

    fn bump(&mut self, class_id: usize, up: bool) {
        let contribution = |n4: i128, p2: i128, s: u64, l: u64| {
            let target = p2 * i128::from(l);
            (n4 * i128::from(s) - target).abs() - target
        };
        let l = self.table.class_frequency(class_id);
        let s = self.class_counts[class_id];
        let s_new = if up { s + 1 } else { s - 1 };
        self.pair_delta += contribution(self.n4, self.p2, s_new, l) - contribution(self.n4, self.p2, s, l);
        self.class_counts[class_id] = s_new;

        let dist_id = self.table.class_distance(class_id);
        let l = self.table.distance_frequency(dist_id);
        let s = self.distance_counts[dist_id];
        let s_new = if up { s + 1 } else { s - 1 };
        self.exact_delta += contribution(self.n4, self.p2, s_new, l) - contribution(self.n4, self.p2, s, l);
        self.distance_counts[dist_id] = s_new;
    }

    /// `p²` times the unnormalized sum (distance-level or class-level) for the
    /// target size given at construction.
    pub fn scaled_key(&self, metric: Metric) -> i128 {
        let base = self.p2 * i128::from(self.table.spec().pair_count());
        match metric {
            Metric::ExactNormalized | Metric::ExactUnnormalized => base + self.exact_delta,
            Metric::PairEstimate => base + self.pair_delta,
        }
    }

    /// Full error report at the current size, from the maintained counts.
    pub fn report(&self) -> Result<ErrorReport> {
        if self.points.is_empty() {
            return Err(Error::EmptySubset);
        }
        epsilon::report_from_counts(self.table, &self.class_counts, self.points.len() as u64, false)
    }
}

/// Turns a scaled key into the metric value for subsets of size `p`.
pub fn metric_value(table: &ClassTable, metric: Metric, p: usize, key: i128) -> Rational {
    let p2 = (p as i128).pow(2);
    let den = match metric {
        Metric::ExactUnnormalized => p2,
        Metric::ExactNormalized => p2 * table.distance_count() as i128,
        Metric::PairEstimate => p2 * table.class_count() as i128,
    };
    Rational::new(BigInt::from(key), BigInt::from(den))
}

/// Metric value of an arbitrary nonempty subset.
pub fn evaluate(set: &PointSet, metric: Metric) -> Result<Rational> {
    let r = epsilon::epsilon(set)?;
    Ok(match metric {
        Metric::ExactNormalized => r.eps_exact_normalized,
        Metric::ExactUnnormalized => r.eps_exact_unnormalized,
        Metric::PairEstimate => r.eps_pair_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub key: i128,
    /// Canonical form, sorted.
    pub points: Vec<Point>,
}

impl Candidate {
    fn beats(&self, other: &Candidate, objective: Objective) -> bool {
        let by_key = match objective {
            Objective::Maximize => self.key.cmp(&other.key),
            Objective::Minimize => other.key.cmp(&self.key),
        };
        match by_key {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.points < other.points,
        }
    }
}

/// Best candidate of one slice of the search, mergeable in any order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partial {
    pub best: Option<Candidate>,
    pub examined: u64,
    pub evaluated: u64,
}

impl Partial {
    fn offer(&mut self, candidate: Candidate, objective: Objective) {
        match &self.best {
            Some(current) if !candidate.beats(current, objective) => {}
            _ => self.best = Some(candidate),
        }
    }

    /// Combines two slices; the result does not depend on merge order.
    pub fn merge(mut self, other: Partial, objective: Objective) -> Partial {
        self.examined += other.examined;
        self.evaluated += other.evaluated;
        if let Some(c) = other.best {
            self.offer(c, objective);
        }
        self
    }
}

/// Size of the exhaustive candidate space and the part the budget allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustivePlan {
    /// `C(N², p)`, saturating.
    pub total: u128,
    /// Ranks `0..limit` are walked.
    pub limit: u128,
}

impl ExhaustivePlan {
    pub fn complete(&self) -> bool {
        self.limit == self.total
    }
}

pub fn plan(task: &SearchTask) -> Result<ExhaustivePlan> {
    task.validate()?;
    let total = binomial(task.spec.point_count(), task.p as u64);
    Ok(ExhaustivePlan { total, limit: total.min(u128::from(task.budget)) })
}

fn point_at(index: u64, n: u32) -> Point {
    let n = u64::from(n);
    Point::new((index / n) as u32, (index % n) as u32)
}

/// Walks lexicographic ranks `ranks` of the `p`-subsets, evaluating the
/// canonical ones.
pub fn search_ranks(task: &SearchTask, table: &ClassTable, ranks: Range<u128>) -> Result<Partial> {
    task.validate()?;
    let n = task.spec.side();
    let mut out = Partial::default();
    if ranks.is_empty() {
        return Ok(out);
    }
    let mut combos = Combinations::from_rank(task.spec.point_count(), task.p, ranks.start);
    let Some(first) = combos.current() else {
        return Ok(out);
    };
    let mut eval = IncrementalEvaluator::new(table, task.p);
    for &i in first {
        eval.push_unchecked(point_at(i, n));
    }
    let mut check = CanonicalCheck::default();
    let mut rank = ranks.start;
    loop {
        out.examined += 1;
        if check.is_canonical(eval.points(), n) {
            out.evaluated += 1;
            let key = eval.scaled_key(task.metric);
            let wins = match &out.best {
                None => true,
                Some(best) => match task.objective {
                    Objective::Maximize => key >= best.key,
                    Objective::Minimize => key <= best.key,
                },
            };
            if wins {
                out.offer(Candidate { key, points: eval.points().to_vec() }, task.objective);
            }
        }
        rank += 1;
        if rank >= ranks.end {
            break;
        }
        let Some(pos) = combos.advance() else { break };
        while eval.len() > pos {
            eval.pop();
        }
        let current = combos.current().expect("advanced");
        for &i in &current[pos..] {
            eval.push_unchecked(point_at(i, n));
        }
    }
    Ok(out)
}

/// One restart of the randomized local search: a random start followed by
/// first-improvement swap moves until no swap helps.
pub fn random_restart(task: &SearchTask, table: &ClassTable, restart: u32) -> Result<Partial> {
    task.validate()?;
    let Mode::RandomRestart { seed, .. } = task.mode else {
        return Ok(Partial::default());
    };
    let n = task.spec.side();
    let n2 = task.spec.point_count() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(restart));

    let chosen = rand::seq::index::sample(&mut rng, n2, task.p).into_vec();
    let mut member = alloc::vec![false; n2];
    let mut eval = IncrementalEvaluator::new(table, task.p);
    for &i in &chosen {
        member[i] = true;
        eval.push_unchecked(point_at(i as u64, n));
    }
    let mut out = Partial { best: None, examined: 1, evaluated: 1 };
    let mut key = eval.scaled_key(task.metric);
    let improves = |new: i128, old: i128| match task.objective {
        Objective::Maximize => new > old,
        Objective::Minimize => new < old,
    };

    let mut sweeps = 0;
    'sweep: while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut inside: Vec<usize> = (0..n2).filter(|&i| member[i]).collect();
        let mut outside: Vec<usize> = (0..n2).filter(|&i| !member[i]).collect();
        inside.shuffle(&mut rng);
        outside.shuffle(&mut rng);
        for &i in &inside {
            let pi = point_at(i as u64, n);
            eval.remove(pi)?;
            for &j in &outside {
                if out.examined >= task.budget {
                    eval.push_unchecked(pi);
                    break 'sweep;
                }
                let pj = point_at(j as u64, n);
                eval.push_unchecked(pj);
                out.examined += 1;
                out.evaluated += 1;
                let candidate = eval.scaled_key(task.metric);
                if improves(candidate, key) {
                    key = candidate;
                    member[i] = false;
                    member[j] = true;
                    continue 'sweep;
                }
                eval.pop();
            }
            eval.push_unchecked(pi);
        }
        break;
    }

    let mut pts = eval.points().to_vec();
    pts.sort_unstable();
    let canonical = canonicalize(&PointSet::from_sorted_unchecked(task.spec, pts));
    out.best = Some(Candidate { key, points: canonical.points().to_vec() });
    Ok(out)
}

/// Converts merged partial results into a [`SearchResult`].
pub fn finish(task: &SearchTask, table: &ClassTable, partial: Partial, complete: bool) -> Result<SearchResult> {
    let best = partial.best.ok_or(Error::BudgetExhausted { budget: task.budget })?;
    let set = PointSet::from_sorted_unchecked(task.spec, best.points);
    Ok(SearchResult {
        value: metric_value(table, task.metric, task.p, best.key),
        symmetry_class_size: orbit_size(&set),
        best: set,
        candidates_examined: partial.examined,
        canonical_evaluated: partial.evaluated,
        complete,
    })
}

/// Runs the task on the calling thread.
pub fn run(task: &SearchTask) -> Result<SearchResult> {
    task.validate()?;
    let table = ClassTable::new(task.spec);
    match task.mode {
        Mode::Exhaustive => {
            let plan = plan(task)?;
            let partial = search_ranks(task, &table, 0..plan.limit)?;
            finish(task, &table, partial, plan.complete())
        }
        Mode::RandomRestart { iterations, .. } => {
            let mut merged = Partial::default();
            let mut complete = true;
            for restart in 0..iterations {
                let part = random_restart(task, &table, restart)?;
                if part.examined >= task.budget {
                    complete = false;
                }
                merged = merged.merge(part, task.objective);
            }
            finish(task, &table, merged, complete)
        }
    }
}
