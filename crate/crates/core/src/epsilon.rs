//! The subset-vs-lattice error metric `ε`, the closed-form error bounds for
//! the extremal configurations, and the rounded optimal distribution.
//!
//! With `p` points the subset frequencies are scaled by `N⁴/p²`. Working in
//! integers scaled by `p²` keeps every sum exact:
//! `p²·|N⁴/p²·S − L| = |N⁴·S − p²·L|`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::Zero;

use crate::lattice::{self, ClassTable, LatticeSpec, PairClass};
use crate::subset::{class_counts, ConfigKind, PointSet};
use crate::{Error, Rational, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassError {
    pub class: PairClass,
    pub subset: u64,
    pub lattice: u64,
    /// `ε_{a,b} = |N⁴/p²·S_{a,b} − L_{a,b}|`.
    pub error: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorReport {
    pub p: u64,
    /// `N⁴/p²`.
    pub scale: Rational,
    /// Sum over `D_N` divided by `|D_N|`.
    pub eps_exact_normalized: Rational,
    /// Sum over `D_N` of `|N⁴/p²·S_√d − L_√d|`.
    pub eps_exact_unnormalized: Rational,
    /// `Σ ε_{a,b}` over all pair classes.
    pub eps_pair_sum: Rational,
    /// `eps_pair_sum` divided by the class count `(N² + N − 2)/2`.
    pub eps_pair_estimate: Rational,
    pub per_class: Option<Vec<ClassError>>,
}

pub(crate) fn rational(num: i128, den: i128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `|N⁴·s − p²·l|`.
fn scaled_gap(n4: i128, p2: i128, s: u64, l: u64) -> Result<i128> {
    let lhs = n4.checked_mul(i128::from(s)).ok_or(Error::Overflow("N^4 * S"))?;
    let rhs = p2.checked_mul(i128::from(l)).ok_or(Error::Overflow("p^2 * L"))?;
    Ok((lhs - rhs).abs())
}

pub(crate) struct ScaledSums {
    pub exact: i128,
    pub pair: i128,
}

/// Distance-level and class-level sums, both multiplied by `p²`.
pub(crate) fn scaled_sums(table: &ClassTable, counts: &[u64], p: u64) -> Result<ScaledSums> {
    let n4 = i128::from(table.spec().point_count()).pow(2);
    let p2 = i128::from(p) * i128::from(p);
    let mut per_distance = vec![0u64; table.distance_count()];
    let mut pair = 0i128;
    for (id, &s) in counts.iter().enumerate() {
        per_distance[table.class_distance(id)] += s;
        pair = pair
            .checked_add(scaled_gap(n4, p2, s, table.class_frequency(id))?)
            .ok_or(Error::Overflow("pair error sum"))?;
    }
    let mut exact = 0i128;
    for (id, &s) in per_distance.iter().enumerate() {
        exact = exact
            .checked_add(scaled_gap(n4, p2, s, table.distance_frequency(id))?)
            .ok_or(Error::Overflow("exact error sum"))?;
    }
    Ok(ScaledSums { exact, pair })
}

pub fn epsilon(set: &PointSet) -> Result<ErrorReport> {
    report(set, false)
}

/// [`epsilon`] with the per-class breakdown filled in.
pub fn epsilon_detailed(set: &PointSet) -> Result<ErrorReport> {
    report(set, true)
}

fn report(set: &PointSet, detailed: bool) -> Result<ErrorReport> {
    if set.is_empty() {
        return Err(Error::EmptySubset);
    }
    let spec = set.spec();
    let table = ClassTable::new(spec);
    let counts = class_counts(set);
    report_from_counts(&table, &counts, set.len() as u64, detailed)
}

pub(crate) fn report_from_counts(
    table: &ClassTable,
    counts: &[u64],
    p: u64,
    detailed: bool,
) -> Result<ErrorReport> {
    let spec = table.spec();
    let sums = scaled_sums(table, counts, p)?;
    let p2 = i128::from(p) * i128::from(p);
    let n4 = i128::from(spec.point_count()).pow(2);
    let unnormalized = rational(sums.exact, p2);
    let pair_sum = rational(sums.pair, p2);

    let per_class = if detailed {
        let mut rows = Vec::with_capacity(counts.len());
        for (class, (&s, &l)) in PairClass::all(spec).zip(counts.iter().zip(table.class_frequencies())) {
            rows.push(ClassError {
                class,
                subset: s,
                lattice: l,
                error: rational(scaled_gap(n4, p2, s, l)?, p2),
            });
        }
        Some(rows)
    } else {
        None
    };

    Ok(ErrorReport {
        p,
        scale: rational(n4, p2),
        eps_exact_normalized: &unnormalized / int(table.distance_count() as i128),
        eps_exact_unnormalized: unnormalized,
        eps_pair_estimate: &pair_sum / int(table.class_count() as i128),
        eps_pair_sum: pair_sum,
        per_class,
    })
}

/// `C(N², 2)`: the error of the empty subset, i.e. the sum of all lattice
/// frequencies.
pub fn empty_subset_error(spec: LatticeSpec) -> u64 {
    spec.pair_count()
}

/// Mean class frequencies `A = N(5N−1)/6` (axis/diagonal) and `B = N(3N−1)/3`.
fn averages(n: i128) -> (Rational, Rational) {
    (rational(n * (5 * n - 1), 6), rational(n * (3 * n - 1), 3))
}

/// The final closed-form bound printed for each extremal configuration.
pub fn closed_form_bound(kind: ConfigKind, spec: LatticeSpec) -> Result<Rational> {
    let n = i128::from(spec.side());
    let q = rational;
    let value = match kind {
        ConfigKind::Corners => {
            q(5 * n * n, 2) - q(5 * n, 2) - q(15, 2 * (n - 1)) - q(16, n + 2) + q(13, 2)
        }
        ConfigKind::CornersCenter => {
            kind.require_odd(spec)?;
            q(17 * n * n, 5) - q(17 * n, 5) - q(6, n - 2) - q(56, 5 * (n - 1)) - q(124, 5 * (n + 2))
                - q(31, 3 * (2 * n - 5))
                + q(113, 15)
        }
        ConfigKind::Stretched3x3 => {
            kind.require_odd(spec)?;
            let m = n - 1;
            q(32 * n.pow(4), 243) - q(52 * n.pow(3), 243) + q(4 * n * n, 9) - q(220 * n, 243)
                - q(23044, 2187 * m)
                - q(14000, 2187 * (n + 2))
                - q(6200, 729 * m * m)
                + q(112, 27 * m.pow(3))
                + q(32, 9 * m.pow(4))
                + q(428, 243)
        }
        ConfigKind::Checkerboard => q(2 * n * n, 1) - q(n, 3) - q(2, 3 * (n + 2)) + q(1, 3),
        other => return Err(Error::UnsupportedKind(other.name())),
    };
    Ok(value)
}

/// The same bounds before simplification: class fractions times averaged
/// per-class errors, with nonzero subset counts taken equal to the lattice
/// counts for the stretched grid and the checkerboard.
pub fn closed_form_unsimplified(kind: ConfigKind, spec: LatticeSpec) -> Result<Rational> {
    let n = i128::from(spec.side());
    let q = rational;
    let (avg_ad, avg_g) = averages(n);
    let generic_part = q(n - 2, n + 2) * &avg_g;
    let value = match kind {
        ConfigKind::Corners => {
            let classes = n * n + n - 2;
            let special = q(3 * n.pow(4), 8) - int(2) - int(2 * n);
            q(4, classes) * special + q(4 * n - 8, classes) * q(5 * n * n + 4 * n + 3, 6) + generic_part
        }
        ConfigKind::CornersCenter => {
            kind.require_odd(spec)?;
            let special = (q(4 * n.pow(4), 25) - int(2 * n))
                + (q(2 * n.pow(4), 25) - int(2))
                + (q(4 * n.pow(4), 25) - int(n + 1));
            let new_avg = q(5 * n.pow(3) - 6 * n * n - 8 * n - 9, 3 * (2 * n - 5));
            (q(2, n - 1) - q(2, n + 2)) * special + (q(6, n + 2) - q(2, n - 1)) * new_avg + generic_part
        }
        ConfigKind::Stretched3x3 => {
            kind.require_odd(spec)?;
            let scale = q(n.pow(4), 81);
            let one = int(1);
            let f_ad = q(2, n - 1);
            let f_g = q(4, (n - 1) * (n - 1));
            let ad = &f_ad * (&scale * &avg_ad - &avg_ad) + (&one - &f_ad) * &avg_ad;
            let g = &f_g * (&scale * &avg_g - &avg_g) + (&one - &f_g) * &avg_g;
            q(4, n + 2) * ad + q(n - 2, n + 2) * g
        }
        ConfigKind::Checkerboard => {
            let four = int(4);
            let ad = q(3, 4) * (&four * &avg_ad - &avg_ad) + q(1, 4) * &avg_ad;
            let g = q(1, 2) * (&four * &avg_g - &avg_g) + q(1, 2) * &avg_g;
            q(4, n + 2) * ad + q(n - 2, n + 2) * g
        }
        other => return Err(Error::UnsupportedKind(other.name())),
    };
    Ok(value)
}

/// Rounded theoretical class frequencies `round(L_{a,b}·p²/N⁴)`, ties away
/// from zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalDistribution {
    spec: LatticeSpec,
    p: u64,
    entries: Vec<u64>,
}

impl OptimalDistribution {
    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn get(&self, class: PairClass) -> Option<u64> {
        self.entries.get(class.index()).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairClass, u64)> + '_ {
        PairClass::all(self.spec).zip(self.entries.iter().copied())
    }

    pub fn as_counts(&self) -> &[u64] {
        &self.entries
    }
}

fn check_size(spec: LatticeSpec, p: u64) -> Result<()> {
    let max = spec.point_count();
    if p == 0 || p > max {
        return Err(Error::InvalidSubsetSize { p, max });
    }
    Ok(())
}

pub fn optimal_distribution(spec: LatticeSpec, p: u64) -> Result<OptimalDistribution> {
    optimal_distribution_with(&ClassTable::new(spec), p)
}

pub fn optimal_distribution_with(table: &ClassTable, p: u64) -> Result<OptimalDistribution> {
    let spec = table.spec();
    check_size(spec, p)?;
    let n4 = u128::from(spec.point_count()).pow(2);
    let p2 = u128::from(p) * u128::from(p);
    let entries = table
        .class_frequencies()
        .iter()
        .map(|&l| ((2 * u128::from(l) * p2 + n4) / (2 * n4)) as u64)
        .collect();
    Ok(OptimalDistribution { spec, p, entries })
}

/// Error of the optimal distribution, at pair-class granularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalError {
    pub p: u64,
    /// `Σ_{a,b} |N⁴/p²·O_{a,b} − L_{a,b}|`.
    pub eps_unnormalized: Rational,
    /// Divided by `|D_N|`.
    pub eps_normalized: Rational,
    /// Divided by the class count.
    pub eps_pair_estimate: Rational,
}

pub fn epsilon_optimal(spec: LatticeSpec, p: u64) -> Result<OptimalError> {
    epsilon_optimal_with(&ClassTable::new(spec), p)
}

pub fn epsilon_optimal_with(table: &ClassTable, p: u64) -> Result<OptimalError> {
    let optimal = optimal_distribution_with(table, p)?;
    let n4 = i128::from(table.spec().point_count()).pow(2);
    let p2 = i128::from(p) * i128::from(p);
    let mut sum = 0i128;
    for (&o, &l) in optimal.as_counts().iter().zip(table.class_frequencies()) {
        sum = sum
            .checked_add(scaled_gap(n4, p2, o, l)?)
            .ok_or(Error::Overflow("optimal error sum"))?;
    }
    let unnormalized = rational(sum, p2);
    Ok(OptimalError {
        p,
        eps_normalized: &unnormalized / int(table.distance_count() as i128),
        eps_pair_estimate: &unnormalized / int(table.class_count() as i128),
        eps_unnormalized: unnormalized,
    })
}

/// `N²/√(2F_N)`: below it any subset is worse than the empty one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallPThreshold {
    pub f_n: u64,
    pub value: f64,
    /// Largest `p` with `2F_N·p² ≤ N⁴`.
    pub floor: u64,
}

pub fn small_p_threshold(spec: LatticeSpec) -> Result<SmallPThreshold> {
    let (_, f_n) = lattice::most_common(spec)?;
    let n2 = spec.point_count();
    let n4 = u128::from(n2) * u128::from(n2);
    let floor = (n4 / (2 * u128::from(f_n))).sqrt() as u64;
    Ok(SmallPThreshold {
        f_n,
        value: n2 as f64 / libm::sqrt(2.0 * f_n as f64),
        floor,
    })
}

impl ErrorReport {
    pub fn is_zero(&self) -> bool {
        self.eps_exact_unnormalized.is_zero()
            && self.eps_exact_normalized.is_zero()
            && self.eps_pair_estimate.is_zero()
    }
}
