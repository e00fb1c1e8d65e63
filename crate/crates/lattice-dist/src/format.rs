//! On-disk formats: distribution and sweep CSV, point-set and error-report
//! JSON, and JSON-lines search records.
//!
//! CSV always has a header row, `,` separators and `\n` line endings.
//! Rationals are written exactly: `num/den` (or just `num` for integers) in
//! CSV, and `{"num", "den", "float"}` with decimal strings in JSON.

use std::io::{Read, Write};
use std::str::FromStr;

use lattice_dist_core::epsilon::{ErrorReport, OptimalError};
use lattice_dist_core::lattice::{curve_indices, DistanceDistribution, LatticeSpec};
use lattice_dist_core::subset::{Point, PointSet};
use lattice_dist_core::Rational;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] lattice_dist_core::Error),
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

/// `printf("%.*g")`-style rendering: `digits` significant digits, trailing
/// zeros dropped, exponent form outside `1e-4 ≤ |x| < 10^digits`.
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits > 0);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let fail = || FormatError::Parse { what: "rational", input: s.to_string() };
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num = num_bigint_from(num).ok_or_else(fail)?;
    let den = num_bigint_from(den).ok_or_else(fail)?;
    if den.is_zero() {
        return Err(fail());
    }
    Ok(Rational::new(num, den))
}

fn num_bigint_from(s: &str) -> Option<BigInt> {
    BigInt::from_str(s.trim()).ok()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub d: u64,
    pub sqrt_d: String,
    pub frequency: u64,
    pub curve_index: u64,
}

pub fn distribution_rows(dist: &DistanceDistribution) -> Vec<DistributionRow> {
    let curve = curve_indices(dist);
    dist.iter()
        .map(|(d, frequency)| DistributionRow {
            d,
            sqrt_d: format_significant((d as f64).sqrt(), 12),
            frequency,
            curve_index: curve[&d],
        })
        .collect()
}

/// One row per distance, ascending. An empty distribution still gets a header.
pub fn write_distribution_csv<W: Write>(w: W, dist: &DistanceDistribution) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["d", "sqrt_d", "frequency", "curve_index"])?;
    for row in distribution_rows(dist) {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_distribution_csv<R: Read>(r: R) -> Result<Vec<DistributionRow>> {
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// One point of an error-versus-`p` sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub p: u64,
    pub eps_unnormalized: Rational,
    pub eps_normalized: Rational,
    pub eps_pair_estimate: Rational,
}

impl From<&OptimalError> for SweepRow {
    fn from(e: &OptimalError) -> Self {
        Self {
            p: e.p,
            eps_unnormalized: e.eps_unnormalized.clone(),
            eps_normalized: e.eps_normalized.clone(),
            eps_pair_estimate: e.eps_pair_estimate.clone(),
        }
    }
}

impl From<&ErrorReport> for SweepRow {
    fn from(r: &ErrorReport) -> Self {
        Self {
            p: r.p,
            eps_unnormalized: r.eps_exact_unnormalized.clone(),
            eps_normalized: r.eps_exact_normalized.clone(),
            eps_pair_estimate: r.eps_pair_estimate.clone(),
        }
    }
}

const SWEEP_HEADER: [&str; 4] = ["p", "eps_unnormalized", "eps_normalized", "eps_pair_estimate"];

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in rows {
        out.write_record([
            row.p.to_string(),
            rational_to_string(&row.eps_unnormalized),
            rational_to_string(&row.eps_normalized),
            rational_to_string(&row.eps_pair_estimate),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        rows.push(SweepRow {
            p: field(0)
                .parse()
                .map_err(|_| FormatError::Parse { what: "p", input: field(0).to_string() })?,
            eps_unnormalized: parse_rational(field(1))?,
            eps_normalized: parse_rational(field(2))?,
            eps_pair_estimate: parse_rational(field(3))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub float: f64,
}

impl From<&Rational> for RationalJson {
    fn from(r: &Rational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            float: r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl RationalJson {
    pub fn to_rational(&self) -> Result<Rational> {
        parse_rational(&format!("{}/{}", self.num, self.den))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub points: Vec<[u32; 2]>,
}

impl From<&PointSet> for PointSetJson {
    fn from(set: &PointSet) -> Self {
        Self {
            n: set.spec().side(),
            points: set.points().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl PointSetJson {
    pub fn to_point_set(&self) -> Result<PointSet> {
        let spec = LatticeSpec::new(self.n)?;
        let points = self.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
        Ok(PointSet::new(spec, points)?)
    }
}

pub fn read_point_set<R: Read>(r: R) -> Result<PointSet> {
    let json: PointSetJson = serde_json::from_reader(r)?;
    json.to_point_set()
}

pub fn write_point_set_json<W: Write>(mut w: W, set: &PointSet) -> Result<()> {
    serde_json::to_writer(&mut w, &PointSetJson::from(set))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_point_set_csv<W: Write>(w: W, set: &PointSet) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "y"])?;
    for p in set.points() {
        out.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassErrorJson {
    pub a: u32,
    pub b: u32,
    pub subset: u64,
    pub lattice: u64,
    pub error: RationalJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReportJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: u64,
    pub config: Option<String>,
    pub scale: RationalJson,
    pub eps_exact_normalized: RationalJson,
    pub eps_exact_unnormalized: RationalJson,
    pub eps_pair_sum: RationalJson,
    pub eps_pair_estimate: RationalJson,
    pub closed_form_bound: Option<RationalJson>,
    pub per_class: Vec<ClassErrorJson>,
}

impl ErrorReportJson {
    pub fn new(spec: LatticeSpec, report: &ErrorReport, config: Option<&str>, bound: Option<&Rational>) -> Self {
        let per_class = report
            .per_class
            .iter()
            .flatten()
            .map(|c| ClassErrorJson {
                a: c.class.a(),
                b: c.class.b(),
                subset: c.subset,
                lattice: c.lattice,
                error: (&c.error).into(),
            })
            .collect();
        Self {
            n: spec.side(),
            p: report.p,
            config: config.map(str::to_string),
            scale: (&report.scale).into(),
            eps_exact_normalized: (&report.eps_exact_normalized).into(),
            eps_exact_unnormalized: (&report.eps_exact_unnormalized).into(),
            eps_pair_sum: (&report.eps_pair_sum).into(),
            eps_pair_estimate: (&report.eps_pair_estimate).into(),
            closed_form_bound: bound.map(Into::into),
            per_class,
        }
    }
}

pub fn write_pretty_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: usize,
    pub objective: String,
    pub metric: String,
    pub mode: String,
    pub iterations: Option<u32>,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub config: String,
    pub config_value: RationalJson,
    pub same_orbit: bool,
    pub verified: bool,
}

/// One line of the search log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub task: TaskJson,
    pub seed: Option<u64>,
    pub timestamp: u64,
    pub best: PointSetJson,
    pub value: RationalJson,
    pub candidates_examined: u64,
    pub canonical_evaluated: u64,
    pub symmetry_class_size: usize,
    pub complete: bool,
    pub verify: Option<VerifyJson>,
}

pub fn write_json_line<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NkRow {
    pub k: u64,
    pub n_k: String,
    pub n_k_prime: String,
    pub primorial_lower: String,
    pub five_pow: String,
    pub agrees: String,
}

pub fn write_nk_csv<W: Write>(w: W, rows: &[NkRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["k", "n_k", "n_k_prime", "primorial_lower", "five_pow", "agrees"])?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
