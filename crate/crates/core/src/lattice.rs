//! The full lattice `L_N = {0..N−1}²`: per-class counts `L_{a,b}`, per-distance
//! counts `L_√d`, the distinct-distance set and its most common distance.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::numtheory::{self, R2Table};
use crate::{Error, Rational, Result};

/// Largest side accepted by [`full_distribution`].
pub const DEFAULT_MAX_SIDE: u32 = 2000;

/// Side length `N` of the lattice; coordinates run over `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    n: u32,
}

impl LatticeSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::LatticeTooSmall(n));
        }
        Ok(Self { n })
    }

    pub fn side(&self) -> u32 {
        self.n
    }

    pub fn point_count(&self) -> u64 {
        u64::from(self.n) * u64::from(self.n)
    }

    /// `C(N², 2)`, the number of point pairs.
    pub fn pair_count(&self) -> u64 {
        let m = self.point_count();
        m * (m - 1) / 2
    }

    /// `(N² + N − 2) / 2`, the number of pair classes.
    pub fn class_count(&self) -> u64 {
        let n = u64::from(self.n);
        (n * n + n - 2) / 2
    }
}

/// Displacement class `(a, b)` with `a ≥ b ≥ 0`, `(a, b) ≠ (0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairClass {
    a: u32,
    b: u32,
}

impl PairClass {
    pub fn new(a: u32, b: u32) -> Option<Self> {
        (a >= b && a > 0).then_some(Self { a, b })
    }

    /// Class of the displacement `(dx, dy)`, either orientation.
    pub fn from_displacement(dx: u32, dy: u32) -> Option<Self> {
        Self::new(dx.max(dy), dx.min(dy))
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn squared_distance(&self) -> u64 {
        let (a, b) = (u64::from(self.a), u64::from(self.b));
        a * a + b * b
    }

    /// Axis (`b = 0`) and diagonal (`a = b`) classes count each offset once;
    /// every other class pairs two mirror-image offsets.
    pub fn is_axis_or_diagonal(&self) -> bool {
        self.b == 0 || self.a == self.b
    }

    pub fn validate(&self, spec: LatticeSpec) -> Result<()> {
        if self.a < spec.side() {
            Ok(())
        } else {
            Err(Error::InvalidClass { a: self.a, b: self.b, n: spec.side() })
        }
    }

    /// Dense index in `0..class_count`.
    pub fn index(&self) -> usize {
        let a = self.a as usize;
        a * (a + 1) / 2 + self.b as usize - 1
    }

    /// All classes of the lattice, ordered by [`PairClass::index`].
    pub fn all(spec: LatticeSpec) -> impl Iterator<Item = PairClass> {
        (1..spec.side()).flat_map(|a| (0..=a).map(move |b| PairClass { a, b }))
    }
}

/// Exact distance distribution: squared distance `d` → frequency.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistanceDistribution {
    entries: BTreeMap<u64, u64>,
    total: u64,
}

impl DistanceDistribution {
    pub fn add(&mut self, d: u64, count: u64) {
        if count == 0 {
            return;
        }
        *self.entries.entry(d).or_insert(0) += count;
        self.total += count;
    }

    pub fn get(&self, d: u64) -> u64 {
        self.entries.get(&d).copied().unwrap_or(0)
    }

    /// `(d, frequency)` in ascending `d`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&d, &f)| (d, f))
    }

    /// Number of distinct distances.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_squared_distance(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }
}

/// `L_{a,b}`: `2(N−a)(N−b)` on axes and diagonals, `4(N−a)(N−b)` otherwise.
pub fn l_ab(spec: LatticeSpec, class: PairClass) -> Result<u64> {
    class.validate(spec)?;
    Ok(class_frequency(spec, class))
}

fn class_frequency(spec: LatticeSpec, class: PairClass) -> u64 {
    let n = u64::from(spec.side());
    let base = (n - u64::from(class.a)) * (n - u64::from(class.b));
    if class.is_axis_or_diagonal() {
        2 * base
    } else {
        4 * base
    }
}

/// `L_√d = Σ 2(N−a)(N−b)` over representations `a ≥ 1, b ≥ 0` that fit in the lattice.
pub fn l_sqrt_d(spec: LatticeSpec, d: u64) -> Result<u64> {
    let n = u64::from(spec.side());
    Ok(numtheory::representations(d)?
        .into_iter()
        .filter(|r| r.a < n && r.b < n)
        .map(|r| 2 * (n - r.a) * (n - r.b))
        .sum())
}

pub fn full_distribution(spec: LatticeSpec) -> Result<DistanceDistribution> {
    full_distribution_with_max(spec, DEFAULT_MAX_SIDE)
}

/// Builds the distribution by summing `L_{a,b}` over pair classes, `O(N²)`.
pub fn full_distribution_with_max(spec: LatticeSpec, max_side: u32) -> Result<DistanceDistribution> {
    if spec.side() > max_side {
        return Err(Error::LatticeTooLarge { n: spec.side(), max: max_side });
    }
    let mut dist = DistanceDistribution::default();
    for class in PairClass::all(spec) {
        dist.add(class.squared_distance(), class_frequency(spec, class));
    }
    Ok(dist)
}

/// `(d, F_N)`: the most frequent distance, smallest `d` on ties.
pub fn most_common(spec: LatticeSpec) -> Result<(u64, u64)> {
    let dist = full_distribution_with_max(spec, u32::MAX)?;
    Ok(most_common_in(&dist).expect("a lattice with N >= 2 has at least one distance"))
}

pub(crate) fn most_common_in(dist: &DistanceDistribution) -> Option<(u64, u64)> {
    dist.iter()
        .fold(None, |best: Option<(u64, u64)>, (d, f)| match best {
            Some((_, bf)) if bf >= f => best,
            _ => Some((d, f)),
        })
}

/// Curve index `r₂(d) / 4`; 0 means `d` is not a sum of two squares.
pub fn curve_index(d: u64) -> Result<u64> {
    Ok(numtheory::r2(d)? / 4)
}

/// Curve indices for every `d` of a distribution, from one sieve pass.
pub fn curve_indices(dist: &DistanceDistribution) -> BTreeMap<u64, u64> {
    let Some(max_d) = dist.max_squared_distance() else {
        return BTreeMap::new();
    };
    match u32::try_from(max_d) {
        Ok(limit) => {
            let table = R2Table::new(limit);
            dist.iter()
                .map(|(d, _)| (d, table.get(d).unwrap_or(0) / 4))
                .collect()
        }
        Err(_) => dist
            .iter()
            .map(|(d, _)| (d, curve_index(d).unwrap_or(0)))
            .collect(),
    }
}

fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Mean of `L_{a,b}` over axis/diagonal classes, `N(5N−1)/6`, and over the
/// remaining classes, `N(3N−1)/3`. Both closed forms are re-derived by
/// direct summation over the class sets; for `N = 2` the second set is
/// empty and only the closed form is available.
pub fn class_averages(spec: LatticeSpec) -> (Rational, Rational) {
    let n = i64::from(spec.side());
    let axis_diag = ratio(n * (5 * n - 1), 6);
    let generic = ratio(n * (3 * n - 1), 3);

    let (mut sum_ad, mut cnt_ad, mut sum_g, mut cnt_g) = (0i64, 0i64, 0i64, 0i64);
    for class in PairClass::all(spec) {
        let l = class_frequency(spec, class) as i64;
        if class.is_axis_or_diagonal() {
            sum_ad += l;
            cnt_ad += 1;
        } else {
            sum_g += l;
            cnt_g += 1;
        }
    }
    assert_eq!(ratio(sum_ad, cnt_ad), axis_diag);
    if cnt_g > 0 {
        assert_eq!(ratio(sum_g, cnt_g), generic);
    }
    (axis_diag, generic)
}

/// Fractions of classes that are axis/diagonal, `4/(N+2)`, and generic,
/// `(N−2)/(N+2)`, checked against a direct count.
pub fn class_fractions(spec: LatticeSpec) -> (Rational, Rational) {
    let n = i64::from(spec.side());
    let axis_diag = ratio(4, n + 2);
    let generic = ratio(n - 2, n + 2);

    let total = spec.class_count() as i64;
    let counted = PairClass::all(spec).filter(PairClass::is_axis_or_diagonal).count() as i64;
    assert_eq!(ratio(counted, total), axis_diag);
    assert_eq!(ratio(total - counted, total), generic);
    (axis_diag, generic)
}

/// Per-class and per-distance lookup tables for one lattice size.
///
/// Classes are indexed by [`PairClass::index`]; distances by their rank in
/// ascending `d`.
#[derive(Debug, Clone)]
pub struct ClassTable {
    spec: LatticeSpec,
    class_freq: Vec<u64>,
    class_distance: Vec<u32>,
    distances: Vec<u64>,
    distance_freq: Vec<u64>,
}

impl ClassTable {
    pub fn new(spec: LatticeSpec) -> Self {
        let classes: Vec<PairClass> = PairClass::all(spec).collect();
        let mut distances: Vec<u64> = classes.iter().map(PairClass::squared_distance).collect();
        distances.sort_unstable();
        distances.dedup();
        let mut distance_freq = alloc::vec![0u64; distances.len()];
        let mut class_freq = Vec::with_capacity(classes.len());
        let mut class_distance = Vec::with_capacity(classes.len());
        for class in &classes {
            let id = distances
                .binary_search(&class.squared_distance())
                .expect("every class distance is in the table");
            let l = class_frequency(spec, *class);
            class_freq.push(l);
            class_distance.push(id as u32);
            distance_freq[id] += l;
        }
        Self { spec, class_freq, class_distance, distances, distance_freq }
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn class_count(&self) -> usize {
        self.class_freq.len()
    }

    /// `|D_N|`.
    pub fn distance_count(&self) -> usize {
        self.distances.len()
    }

    pub fn class_frequency(&self, class_id: usize) -> u64 {
        self.class_freq[class_id]
    }

    pub fn class_distance(&self, class_id: usize) -> usize {
        self.class_distance[class_id] as usize
    }

    pub fn distance(&self, distance_id: usize) -> u64 {
        self.distances[distance_id]
    }

    pub fn distance_frequency(&self, distance_id: usize) -> u64 {
        self.distance_freq[distance_id]
    }

    pub fn distance_frequencies(&self) -> &[u64] {
        &self.distance_freq
    }

    pub fn class_frequencies(&self) -> &[u64] {
        &self.class_freq
    }
}
