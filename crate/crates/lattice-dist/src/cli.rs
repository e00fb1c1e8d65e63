//! The `lattice-dist` command line.
//!
//! Exit codes: 0 success, 1 I/O failure or `--verify-config` mismatch,
//! 2 usage or validation error, 3 budget exhausted or arithmetic overflow.

use std::ffi::OsString;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_dist_core::epsilon::{closed_form_bound, epsilon_detailed};
use lattice_dist_core::lattice::{full_distribution, LatticeSpec};
use lattice_dist_core::numtheory::{n_k, n_k_bounds, n_k_constructive_upper};
use lattice_dist_core::search::{self, canonicalize, Metric, Mode, Objective, SearchTask};
use lattice_dist_core::subset::{generate, max_depth, subset_distribution, ConfigKind, PointSet};
use lattice_dist_core::Error;

use crate::format::{self, FormatError, NkRow, SweepRow};
use crate::parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Largest `k` accepted by `nk`.
pub const MAX_K: u64 = 10;

#[derive(Debug, Parser)]
#[command(name = "lattice-dist", version, about = "Exact distance distributions of the N x N integer lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance distribution of the full lattice.
    Lattice(LatticeArgs),
    /// Distance distribution of a subset.
    SubsetDist(SubsetArgs),
    /// Error report of a subset against the lattice.
    Error(SubsetArgs),
    /// Error of the rounded optimal distribution over a grid of subset sizes.
    OptimalCurve(CurveArgs),
    /// Search for subsets that maximize or minimize the error.
    Search(SearchArgs),
    /// Smallest d with r2(d) = 4k, with its bounds.
    Nk(NkArgs),
    /// Emit a generated configuration as a point set.
    Config(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigName {
    Corners,
    CornersCenter,
    #[value(name = "stretched3x3")]
    Stretched3x3,
    Perimeter,
    FilledPerimeter,
    Checkerboard,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    ExactNormalized,
    ExactUnnormalized,
    PairEstimate,
}

impl From<MetricName> for Metric {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::ExactNormalized => Metric::ExactNormalized,
            MetricName::ExactUnnormalized => Metric::ExactUnnormalized,
            MetricName::PairEstimate => Metric::PairEstimate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveName {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Exhaustive,
    Random,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    /// Lattice side; optional when --subset is given.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_enum, conflicts_with = "subset", required_unless_present = "subset")]
    pub config: Option<ConfigName>,
    /// Point-set JSON file.
    #[arg(long)]
    pub subset: Option<PathBuf>,
    /// Depth of filled-perimeter.
    #[arg(long)]
    pub depth: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub n: u32,
    /// `start:end:step`, a comma list, or empty; every p in 1..=N² by default.
    #[arg(long)]
    pub p: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "max")]
    pub objective: ObjectiveName,
    #[arg(long, value_enum, default_value = "exact-unnormalized")]
    pub metric: MetricName,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeName,
    /// Restarts for random mode.
    #[arg(long, default_value_t = 32)]
    pub iterations: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on combinations walked (exhaustive) or moves per restart (random).
    #[arg(long, default_value_t = search::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Compare the optimum with a generated configuration.
    #[arg(long, value_enum)]
    pub verify_config: Option<ConfigName>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Search log; records are appended.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NkArgs {
    #[arg(long, default_value_t = 8)]
    pub kmax: u64,
    /// Largest d scanned per row.
    #[arg(long, default_value_t = 100_000_000)]
    pub budget: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub config: ConfigName,
    #[arg(long)]
    pub depth: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExhausted { .. } | Error::Overflow(_) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Core(e) => e.into(),
            FormatError::Parse { .. } | FormatError::Json(_) => Self::usage(e.to_string()),
            FormatError::Io(_) | FormatError::Csv(_) => Self { code: EXIT_MISMATCH, message: e.to_string() },
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        FormatError::Io(e).into()
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Lattice(args) => cmd_lattice(args),
        Command::SubsetDist(args) => cmd_subset_dist(args),
        Command::Error(args) => cmd_error(args),
        Command::OptimalCurve(args) => cmd_optimal_curve(args),
        Command::Search(args) => cmd_search(args),
        Command::Nk(args) => cmd_nk(args),
        Command::Config(args) => cmd_config(args),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8], append: bool) -> io::Result<()> {
    match out {
        None => io::stdout().lock().write_all(bytes),
        Some(path) => {
            let mut file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
            file.write_all(bytes)
        }
    }
}

fn config_kind(name: ConfigName, depth: Option<u32>) -> Result<Option<ConfigKind>, Failure> {
    Ok(Some(match name {
        ConfigName::Corners => ConfigKind::Corners,
        ConfigName::CornersCenter => ConfigKind::CornersCenter,
        ConfigName::Stretched3x3 => ConfigKind::Stretched3x3,
        ConfigName::Perimeter => ConfigKind::Perimeter,
        ConfigName::FilledPerimeter => {
            ConfigKind::FilledPerimeter(depth.ok_or_else(|| Failure::usage("filled-perimeter needs --depth"))?)
        }
        ConfigName::Checkerboard => ConfigKind::Checkerboard,
        ConfigName::Full => return Ok(None),
    }))
}

/// Builds a named configuration; `None` kind means the whole lattice.
pub fn build_config(spec: LatticeSpec, kind: Option<ConfigKind>) -> lattice_dist_core::Result<PointSet> {
    match kind {
        Some(kind) => generate(spec, kind),
        None => Ok(PointSet::full(spec)),
    }
}

fn config_label(name: ConfigName, kind: Option<ConfigKind>) -> String {
    match kind {
        Some(ConfigKind::FilledPerimeter(m)) => format!("filled-perimeter:{m}"),
        Some(kind) => kind.name().to_string(),
        None => name.to_possible_value().expect("named").get_name().to_string(),
    }
}

/// The subset named by `--config` or read from `--subset`, with its label.
fn load_subset(args: &SubsetArgs) -> Result<(PointSet, Option<ConfigKind>, Option<String>), Failure> {
    if let Some(path) = &args.subset {
        let set = format::read_point_set(File::open(path)?)?;
        if let Some(n) = args.n {
            if n != set.spec().side() {
                return Err(Error::LatticeMismatch { expected: n, found: set.spec().side() }.into());
            }
        }
        return Ok((set, None, None));
    }
    let name = args.config.expect("clap requires --config or --subset");
    let n = args.n.ok_or_else(|| Failure::usage("--n is required with --config"))?;
    let spec = LatticeSpec::new(n)?;
    let kind = config_kind(name, args.depth)?;
    let set = build_config(spec, kind)?;
    Ok((set, kind, Some(config_label(name, kind))))
}

fn cmd_lattice(args: LatticeArgs) -> Result<i32, Failure> {
    let spec = LatticeSpec::new(args.n)?;
    let dist = full_distribution(spec)?;
    write_distribution(&args.output, &dist)
}

fn write_distribution(output: &Output, dist: &lattice_dist_core::lattice::DistanceDistribution) -> Result<i32, Failure> {
    let mut buf = Vec::new();
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => format::write_distribution_csv(&mut buf, dist)?,
        Format::Json => format::write_pretty_json(&mut buf, &format::distribution_rows(dist))?,
    }
    emit(output.out.as_deref(), &buf, false)?;
    Ok(EXIT_OK)
}

fn cmd_subset_dist(args: SubsetArgs) -> Result<i32, Failure> {
    let (set, _, _) = load_subset(&args)?;
    let dist = subset_distribution(&set)?;
    write_distribution(&args.output, &dist)
}

fn cmd_error(args: SubsetArgs) -> Result<i32, Failure> {
    let (set, kind, label) = load_subset(&args)?;
    let report = epsilon_detailed(&set)?;
    let bound = match kind {
        Some(kind) => match closed_form_bound(kind, set.spec()) {
            Ok(b) => Some(b),
            Err(Error::UnsupportedKind(_)) => None,
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let mut buf = Vec::new();
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let json = format::ErrorReportJson::new(set.spec(), &report, label.as_deref(), bound.as_ref());
            format::write_pretty_json(&mut buf, &json)?;
        }
        Format::Csv => format::write_sweep_csv(&mut buf, &[SweepRow::from(&report)])?,
    }
    emit(args.output.out.as_deref(), &buf, false)?;
    Ok(EXIT_OK)
}

/// Parses `start:end:step` (inclusive end), `a,b,c`, a single value, or the
/// empty string.
pub fn parse_grid(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("invalid grid value {t:?}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, step] = match parts.as_slice() {
            [a, b] => [num(a)?, num(b)?, 1],
            [a, b, c] => [num(a)?, num(b)?, num(c)?],
            _ => return Err(format!("invalid range {s:?}")),
        };
        if step == 0 {
            return Err("grid step must be positive".into());
        }
        return Ok((start..=end).step_by(step as usize).collect());
    }
    s.split(',').map(num).collect()
}

fn cmd_optimal_curve(args: CurveArgs) -> Result<i32, Failure> {
    let spec = LatticeSpec::new(args.n)?;
    let max = spec.point_count();
    let grid = match &args.p {
        Some(g) => parse_grid(g).map_err(Failure::usage)?,
        None => (1..=max).collect(),
    };
    if let Some(&bad) = grid.iter().find(|&&p| p == 0 || p > max) {
        return Err(Error::InvalidSubsetSize { p: bad, max }.into());
    }
    let rows: Vec<SweepRow> = parallel::optimal_sweep(spec, &grid)?.iter().map(SweepRow::from).collect();
    let mut buf = Vec::new();
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => format::write_sweep_csv(&mut buf, &rows)?,
        Format::Json => {
            let json: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "p": r.p,
                        "eps_unnormalized": format::RationalJson::from(&r.eps_unnormalized),
                        "eps_normalized": format::RationalJson::from(&r.eps_normalized),
                        "eps_pair_estimate": format::RationalJson::from(&r.eps_pair_estimate),
                    })
                })
                .collect();
            format::write_pretty_json(&mut buf, &json)?;
        }
    }
    emit(args.output.out.as_deref(), &buf, false)?;
    Ok(EXIT_OK)
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the current Unix time.
fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn cmd_search(args: SearchArgs) -> Result<i32, Failure> {
    let spec = LatticeSpec::new(args.n)?;
    let mode = match args.mode {
        ModeName::Exhaustive => Mode::Exhaustive,
        ModeName::Random => Mode::RandomRestart { iterations: args.iterations, seed: args.seed },
    };
    let task = SearchTask {
        spec,
        p: args.p,
        objective: match args.objective {
            ObjectiveName::Max => Objective::Maximize,
            ObjectiveName::Min => Objective::Minimize,
        },
        metric: args.metric.into(),
        mode,
        budget: args.budget,
    };
    let verify_kind = args.verify_config.map(|name| config_kind(name, args.depth).map(|k| (name, k))).transpose()?;
    let result = parallel::search(&task)?;

    let verify = match verify_kind {
        Some((name, kind)) => {
            let config = build_config(spec, kind)?;
            let config_value = search::evaluate(&config, task.metric)?;
            let same_orbit = canonicalize(&config) == result.best;
            Some(format::VerifyJson {
                config: config_label(name, kind),
                config_value: (&config_value).into(),
                same_orbit,
                verified: config.len() == task.p && (same_orbit || config_value == result.value),
            })
        }
        None => None,
    };
    let record = format::SearchRecord {
        task: format::TaskJson {
            n: spec.side(),
            p: task.p,
            objective: match task.objective {
                Objective::Maximize => "max",
                Objective::Minimize => "min",
            }
            .into(),
            metric: task.metric.name().into(),
            mode: match args.mode {
                ModeName::Exhaustive => "exhaustive",
                ModeName::Random => "random",
            }
            .into(),
            iterations: matches!(mode, Mode::RandomRestart { .. }).then_some(args.iterations),
            budget: task.budget,
        },
        seed: matches!(mode, Mode::RandomRestart { .. }).then_some(args.seed),
        timestamp: timestamp(),
        best: (&result.best).into(),
        value: (&result.value).into(),
        candidates_examined: result.candidates_examined,
        canonical_evaluated: result.canonical_evaluated,
        symmetry_class_size: result.symmetry_class_size,
        complete: result.complete,
        verify,
    };
    let mut buf = Vec::new();
    format::write_json_line(&mut buf, &record)?;
    emit(args.out.as_deref(), &buf, true)?;

    if !result.complete {
        eprintln!("error: budget of {} candidates exhausted; partial result reported", task.budget);
        return Ok(EXIT_BUDGET);
    }
    if let Some(v) = &record.verify {
        if !v.verified {
            eprintln!("error: search optimum differs from {}", v.config);
            return Ok(EXIT_MISMATCH);
        }
    }
    Ok(EXIT_OK)
}

fn cell(r: lattice_dist_core::Result<impl ToString>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(Error::BudgetExhausted { .. }) => "budget".into(),
        Err(_) => "overflow".into(),
    }
}

/// Rows `1..=kmax` of the `n_k` table.
pub fn nk_rows(kmax: u64, budget: u64) -> Vec<NkRow> {
    (1..=kmax)
        .map(|k| {
            let nk = n_k(k, budget);
            let prime = n_k_constructive_upper(k);
            let bounds = n_k_bounds(k);
            let agrees = match (&nk, &prime) {
                (Ok(a), Ok(b)) => (u128::from(*a) == *b).to_string(),
                _ => "unknown".into(),
            };
            NkRow {
                k,
                n_k: cell(nk),
                n_k_prime: cell(prime),
                primorial_lower: cell(bounds.map(|b| b.primorial_lower)),
                five_pow: cell(5u128.checked_pow((k - 1) as u32).ok_or(Error::Overflow("5^(k-1)"))),
                agrees,
            }
        })
        .collect()
}

fn cmd_nk(args: NkArgs) -> Result<i32, Failure> {
    if args.kmax == 0 || args.kmax > MAX_K {
        return Err(Failure::usage(format!("--kmax must be in 1..={MAX_K}")));
    }
    let rows = nk_rows(args.kmax, args.budget);
    let mut buf = Vec::new();
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => format::write_nk_csv(&mut buf, &rows)?,
        Format::Json => format::write_pretty_json(&mut buf, &rows)?,
    }
    emit(args.output.out.as_deref(), &buf, false)?;
    Ok(EXIT_OK)
}

fn cmd_config(args: ConfigArgs) -> Result<i32, Failure> {
    let spec = LatticeSpec::new(args.n)?;
    let kind = config_kind(args.config, args.depth)?;
    if let Some(ConfigKind::FilledPerimeter(m)) = kind {
        if m == 0 || m > max_depth(spec) {
            return Err(Error::DepthOutOfRange { depth: m, max: max_depth(spec) }.into());
        }
    }
    let set = build_config(spec, kind)?;
    let mut buf = Vec::new();
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => format::write_point_set_json(&mut buf, &set)?,
        Format::Csv => format::write_point_set_csv(&mut buf, &set)?,
    }
    emit(args.output.out.as_deref(), &buf, false)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_grid("5").unwrap(), vec![5]);
        assert_eq!(parse_grid("1,4, 9").unwrap(), vec![1, 4, 9]);
        assert_eq!(parse_grid("1:10:3").unwrap(), vec![1, 4, 7, 10]);
        assert_eq!(parse_grid("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_grid("1:10000:100").unwrap().len(), 100);
        assert!(parse_grid("1:5:0").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn nk_table_head() {
        let rows = nk_rows(4, 1_000_000);
        let t = |r: &NkRow| {
            (r.k, r.n_k.clone(), r.n_k_prime.clone(), r.primorial_lower.clone(), r.five_pow.clone())
        };
        assert_eq!(t(&rows[0]), (1, "1".into(), "1".into(), "1".into(), "1".into()));
        assert_eq!(t(&rows[1]), (2, "5".into(), "5".into(), "5".into(), "5".into()));
        assert_eq!(rows[3].n_k, "65");
        assert_eq!(rows[3].n_k_prime, "65");
        assert_eq!(rows[3].agrees, "true");
    }
}
