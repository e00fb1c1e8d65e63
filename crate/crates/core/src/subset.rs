//! Subsets of the lattice, their distance distributions, the extremal
//! configuration generators and the exact checkerboard counts.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{DistanceDistribution, LatticeSpec, PairClass};
use crate::{Error, Result};

/// Largest subset accepted by [`subset_distribution`].
pub const DEFAULT_MAX_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn class_to(&self, other: &Point) -> Option<PairClass> {
        PairClass::from_displacement(self.x.abs_diff(other.x), self.y.abs_diff(other.y))
    }
}

/// A subset of `L_N`, stored sorted lexicographically without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    spec: LatticeSpec,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(spec: LatticeSpec, mut points: Vec<Point>) -> Result<Self> {
        let n = spec.side();
        if let Some(p) = points.iter().find(|p| p.x >= n || p.y >= n) {
            return Err(Error::PointOutOfRange { x: p.x, y: p.y, n });
        }
        points.sort_unstable();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint { x: w[0].x, y: w[0].y });
        }
        Ok(Self { spec, points })
    }

    /// Builds from points already known to be valid and sorted.
    pub(crate) fn from_sorted_unchecked(spec: LatticeSpec, points: Vec<Point>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Self { spec, points }
    }

    pub fn empty(spec: LatticeSpec) -> Self {
        Self { spec, points: Vec::new() }
    }

    /// The whole lattice as a subset.
    pub fn full(spec: LatticeSpec) -> Self {
        Self::filtered(spec, |_| true)
    }

    fn filtered(spec: LatticeSpec, keep: impl Fn(Point) -> bool) -> Self {
        let n = spec.side();
        let points = (0..n)
            .flat_map(|x| (0..n).map(move |y| Point::new(x, y)))
            .filter(|&p| keep(p))
            .collect();
        Self { spec, points }
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
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

    pub fn contains(&self, p: Point) -> bool {
        self.points.binary_search(&p).is_ok()
    }
}

/// Extremal configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigKind {
    /// The four corners, `p = 4`.
    Corners,
    /// Corners plus the centre, `p = 5`. Odd `N` only.
    CornersCenter,
    /// A 3x3 grid stretched to the full lattice, `p = 9`. Odd `N` only.
    Stretched3x3,
    /// The boundary, `p = 4(N−1)`.
    Perimeter,
    /// Everything within Chebyshev distance `m − 1` of the boundary.
    FilledPerimeter(u32),
    /// Points with `x + y` even, `p = ⌈N²/2⌉`.
    Checkerboard,
}

impl ConfigKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigKind::Corners => "corners",
            ConfigKind::CornersCenter => "corners-center",
            ConfigKind::Stretched3x3 => "stretched3x3",
            ConfigKind::Perimeter => "perimeter",
            ConfigKind::FilledPerimeter(_) => "filled-perimeter",
            ConfigKind::Checkerboard => "checkerboard",
        }
    }

    pub(crate) fn require_odd(&self, spec: LatticeSpec) -> Result<()> {
        if spec.side() % 2 == 1 {
            Ok(())
        } else {
            Err(Error::ParityViolation { kind: self.name(), n: spec.side() })
        }
    }
}

/// Maximum filled-perimeter depth, `⌈N/2⌉`.
pub fn max_depth(spec: LatticeSpec) -> u32 {
    spec.side().div_ceil(2)
}

pub fn generate(spec: LatticeSpec, kind: ConfigKind) -> Result<PointSet> {
    let n = spec.side();
    let last = n - 1;
    let set = match kind {
        ConfigKind::Corners => PointSet::filtered(spec, |p| {
            (p.x == 0 || p.x == last) && (p.y == 0 || p.y == last)
        }),
        ConfigKind::CornersCenter => {
            kind.require_odd(spec)?;
            let mid = last / 2;
            PointSet::filtered(spec, |p| {
                ((p.x == 0 || p.x == last) && (p.y == 0 || p.y == last)) || (p.x == mid && p.y == mid)
            })
        }
        ConfigKind::Stretched3x3 => {
            kind.require_odd(spec)?;
            let mid = last / 2;
            let on = |v: u32| v == 0 || v == mid || v == last;
            PointSet::filtered(spec, |p| on(p.x) && on(p.y))
        }
        ConfigKind::Perimeter => PointSet::filtered(spec, |p| boundary_distance(p, n) == 0),
        ConfigKind::FilledPerimeter(depth) => {
            let max = max_depth(spec);
            if depth == 0 || depth > max {
                return Err(Error::DepthOutOfRange { depth, max });
            }
            PointSet::filtered(spec, |p| boundary_distance(p, n) < depth)
        }
        ConfigKind::Checkerboard => PointSet::filtered(spec, |p| (p.x + p.y) % 2 == 0),
    };
    Ok(set)
}

fn boundary_distance(p: Point, n: u32) -> u32 {
    p.x.min(p.y).min(n - 1 - p.x).min(n - 1 - p.y)
}

/// `S_{a,b}` for every class at once, indexed by [`PairClass::index`].
pub fn class_counts(set: &PointSet) -> Vec<u64> {
    let mut counts = vec![0u64; set.spec().class_count() as usize];
    let pts = set.points();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if let Some(c) = p.class_to(q) {
                counts[c.index()] += 1;
            }
        }
    }
    counts
}

/// `S_{a,b}`: unordered pairs of the subset realizing `class`.
pub fn s_ab(set: &PointSet, class: PairClass) -> Result<u64> {
    class.validate(set.spec())?;
    let pts = set.points();
    let mut count = 0;
    for (i, p) in pts.iter().enumerate() {
        count += pts[i + 1..].iter().filter(|q| p.class_to(q) == Some(class)).count() as u64;
    }
    Ok(count)
}

pub fn subset_distribution(set: &PointSet) -> Result<DistanceDistribution> {
    subset_distribution_with_max(set, DEFAULT_MAX_POINTS)
}

pub fn subset_distribution_with_max(set: &PointSet, max_points: usize) -> Result<DistanceDistribution> {
    if set.len() > max_points {
        return Err(Error::SubsetTooLarge { p: set.len(), max: max_points });
    }
    let mut dist = DistanceDistribution::default();
    let counts = class_counts(set);
    for (class, count) in PairClass::all(set.spec()).zip(counts) {
        dist.add(class.squared_distance(), count);
    }
    Ok(dist)
}

/// `S_{a,0}` on the checkerboard: `N(N−a)` for even `N`, `N(N−a) + 1` for odd `N`.
pub fn checkerboard_axis_count(spec: LatticeSpec, a: u32) -> Result<u64> {
    let n = spec.side();
    if a == 0 || a >= n {
        return Err(Error::InvalidClass { a, b: 0, n });
    }
    if a % 2 == 1 {
        return Err(Error::OddAxisDistance(a));
    }
    let base = u64::from(n) * u64::from(n - a);
    Ok(if n.is_multiple_of(2) { base } else { base + 1 })
}

/// `S_{a,a}` on the checkerboard: `(N−a)² + 1` for odd `N` and even `a`,
/// `(N−a)²` otherwise.
pub fn checkerboard_diag_count(spec: LatticeSpec, a: u32) -> Result<u64> {
    let n = spec.side();
    if a == 0 || a >= n {
        return Err(Error::InvalidClass { a, b: a, n });
    }
    let gap = u64::from(n - a);
    Ok(gap * gap + u64::from(n % 2 == 1 && a.is_multiple_of(2)))
}
