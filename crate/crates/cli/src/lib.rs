//! Command-line front end for `momentlab`.
//!
//! Every verb produces a human-readable report and a CSV table. With
//! `--out PATH` the CSV goes to the file and the report to stdout; without
//! it the CSV goes to stdout and the report to stderr.

pub mod parse;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use momentlab::measure::MultiIndex;
use momentlab::moments::DEFAULT_TOL;
use momentlab::reconstruction::MOMENT_MATCH_TOL;
use momentlab::{
    brute_force_nonneg_oracle, check_s0_nonneg, determinacy_radius, extension_interval, f_volume,
    is_f_continuous_interval, representing_measure, spectrum_report, taylor_remainder_check,
    weak_convergence_check, DeterminacyVerdict, DistributionFunction, FeasibilityStatus,
    MeasureRep, OracleConfig, OracleVerdict, SupportSet,
};

use parse::{parse_box, parse_family_spec, parse_grid, parse_ks, parse_measure_spec, parse_moment_sequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Spec { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Analysis(#[from] momentlab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use momentlab::Error as E;
        match self {
            CliError::Analysis(
                E::Infeasible { .. }
                | E::Indefinite { .. }
                | E::NodeOutsideSupport { .. }
                | E::MomentMismatch { .. }
                | E::NotIntegrable(_),
            ) => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "momentlab", version, about = "Moment sequences, measures and their convergence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the CSV table here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the sequence a moment sequence of a measure on the support set?
    CheckFeasible {
        #[arg(long, value_name = "PATH")]
        seq: PathBuf,
        #[arg(long, default_value = "line", value_parser = support)]
        support: SupportSet,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Seed for the random polynomial cross-check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Admissible values of the next moment.
    Extend {
        #[arg(long, value_name = "PATH")]
        seq: PathBuf,
        #[arg(long, default_value = "line", value_parser = support)]
        support: SupportSet,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Candidate next moment; its margin to the interval is reported.
        #[arg(long, allow_hyphen_values = true)]
        value: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Ratio test |n!/m_n|^{1/n} for determinacy.
    Determinacy {
        #[arg(long, value_name = "PATH")]
        seq: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Atomic representing measure from Gauss quadrature.
    Reconstruct {
        #[arg(long, value_name = "PATH")]
        seq: PathBuf,
        #[arg(long, default_value = "line", value_parser = support)]
        support: SupportSet,
        /// Relative moment-matching tolerance.
        #[arg(long, default_value_t = MOMENT_MATCH_TOL)]
        tol: f64,
        /// Also write the moment verification table as CSV.
        #[arg(long, value_name = "PATH")]
        checks: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Moments of a measure spec up to a total order.
    Moments {
        #[arg(long, value_name = "PATH")]
        measure: PathBuf,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Mass of the half-open box (a, b] via the distribution function.
    Fvolume {
        #[arg(long, value_name = "PATH")]
        measure: PathBuf,
        /// `a1,...,ad:b1,...,bd`
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: String,
        /// Boundary mass tolerated by the continuity test for densities.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Taylor remainder bound for the characteristic function.
    TaylorCheck {
        #[arg(long, value_name = "PATH")]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
        #[arg(long, allow_hyphen_values = true)]
        step: f64,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Moment gaps and cdf distances of a family against its limit.
    Converge {
        #[arg(long, value_name = "PATH")]
        family: PathBuf,
        #[arg(long, default_value = "50,100,200")]
        ks: String,
        #[arg(long, default_value_t = 6)]
        order: usize,
        /// `half:lo,hi`, `lin:a,b,n` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

fn support(s: &str) -> Result<SupportSet, String> {
    s.parse().map_err(|e: momentlab::Error| e.to_string())
}

/// Result of one verb before any I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub csv: String,
    /// Additional CSV files requested by flags.
    pub extra: Vec<(PathBuf, String)>,
}

impl Command {
    pub fn out_path(&self) -> Option<&PathBuf> {
        match self {
            Command::CheckFeasible { output, .. }
            | Command::Extend { output, .. }
            | Command::Determinacy { output, .. }
            | Command::Reconstruct { output, .. }
            | Command::Moments { output, .. }
            | Command::Fvolume { output, .. }
            | Command::TaylorCheck { output, .. }
            | Command::Converge { output, .. } => output.out.as_ref(),
        }
    }
}

/// Shortest round-trip representation; `inf`, `-inf` and `NaN` as Rust prints them.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.iter().map(|h| h.as_ref())).expect("in-memory write");
        Self { w }
    }

    fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.w.write_record(cells.iter().map(|c| c.as_ref())).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::CheckFeasible {
            seq,
            support,
            tol,
            seed,
            trials,
            ..
        } => check_feasible(seq, *support, *tol, *seed, *trials),
        Command::Extend {
            seq,
            support,
            tol,
            value,
            ..
        } => extend(seq, *support, *tol, *value),
        Command::Determinacy { seq, window, .. } => determinacy(seq, *window),
        Command::Reconstruct {
            seq,
            support,
            tol,
            checks,
            ..
        } => reconstruct(seq, *support, *tol, checks.clone()),
        Command::Moments { measure, order, .. } => moments(measure, *order),
        Command::Fvolume { measure, bx, tol, .. } => fvolume(measure, bx, *tol),
        Command::TaylorCheck {
            measure,
            at,
            step,
            order,
            ..
        } => taylor(measure, *at, *step, *order),
        Command::Converge {
            family,
            ks,
            order,
            grid,
            ..
        } => converge(family, ks, *order, grid.as_deref()),
    }
}

fn check_feasible(
    path: &Path,
    s0: SupportSet,
    tol: f64,
    seed: u64,
    trials: usize,
) -> Result<Outcome, CliError> {
    let seq = parse_moment_sequence(path)?;
    let verdict = check_s0_nonneg(&seq, s0, tol)?;
    let mut report = String::new();
    writeln!(report, "support: {s0}").unwrap();
    writeln!(report, "order: {}", seq.order()).unwrap();
    writeln!(report, "status: {}", verdict.status).unwrap();
    if verdict.conditioning_warning {
        writeln!(report, "warning: order above 30, Hankel blocks are badly conditioned").unwrap();
    }
    let mut table = Table::new(&["block", "shift", "size", "min_eigen", "norm"]);
    for b in &verdict.blocks {
        writeln!(
            report,
            "block {} (shift {}, size {}): min eigenvalue {:e}",
            b.kind.name(),
            b.shift,
            b.size,
            b.min_eigen
        )
        .unwrap();
        table.row(&[
            b.kind.name().to_string(),
            b.shift.to_string(),
            b.size.to_string(),
            fmt_num(b.min_eigen),
            fmt_num(b.norm),
        ]);
    }
    let certificate = verdict.certificate();
    if let (Some(q), Some(p)) = (&verdict.witness, &certificate) {
        writeln!(report, "witness Q: {q}").unwrap();
        writeln!(report, "certificate L*Q^2: {p}").unwrap();
    }
    let config = OracleConfig {
        max_degree: seq.order(),
        trials,
        tol,
        seed,
    };
    let oracle = brute_force_nonneg_oracle(&seq, s0, &config, certificate.as_slice())?;
    match &oracle {
        OracleVerdict::Pass { checked } => {
            writeln!(report, "oracle: pass ({checked} polynomials, seed {seed})").unwrap()
        }
        OracleVerdict::Violation { polynomial, value } => {
            writeln!(report, "oracle: violation, mu({polynomial}) = {value:e}").unwrap()
        }
    }
    let agree = matches!(
        (verdict.status, &oracle),
        (FeasibilityStatus::Feasible, OracleVerdict::Pass { .. })
            | (FeasibilityStatus::Infeasible, OracleVerdict::Violation { .. })
            | (FeasibilityStatus::Marginal, _)
    );
    if !agree {
        writeln!(report, "warning: oracle disagrees with the block test").unwrap();
    }
    let code = if verdict.status == FeasibilityStatus::Feasible && oracle.is_pass() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    Ok(Outcome {
        code,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

fn extend(path: &Path, s0: SupportSet, tol: f64, value: Option<f64>) -> Result<Outcome, CliError> {
    let seq = parse_moment_sequence(path)?;
    let iv = extension_interval(&seq, s0, tol)?;
    let mut report = String::new();
    writeln!(report, "support: {s0}").unwrap();
    writeln!(report, "m_{} in [{}, {}]", iv.order, iv.c1, iv.c2).unwrap();
    writeln!(report, "width: {}", iv.width()).unwrap();
    writeln!(report, "degenerate: {}", iv.degenerate).unwrap();
    let mut header = vec!["order", "c1", "c2", "width", "degenerate"];
    let mut row = vec![
        iv.order.to_string(),
        fmt_num(iv.c1),
        fmt_num(iv.c2),
        fmt_num(iv.width()),
        iv.degenerate.to_string(),
    ];
    let mut code = EXIT_OK;
    if let Some(t) = value {
        let inside = iv.contains(t, tol);
        writeln!(report, "value {t}: margin {}, {}", iv.margin(t), if inside { "inside" } else { "outside" })
            .unwrap();
        header.extend(["value", "margin", "inside"]);
        row.extend([fmt_num(t), fmt_num(iv.margin(t)), inside.to_string()]);
        if !inside {
            code = EXIT_NEGATIVE;
        }
    }
    let mut table = Table::new(&header);
    table.row(&row);
    Ok(Outcome {
        code,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

fn determinacy(path: &Path, window: usize) -> Result<Outcome, CliError> {
    let seq = parse_moment_sequence(path)?;
    let r = determinacy_radius(&seq, window)?;
    let mut report = String::new();
    writeln!(report, "verdict: {}", r.verdict).unwrap();
    writeln!(report, "window minimum (last {window}): {:e}", r.window_min).unwrap();
    let mut table = Table::new(&["n", "ratio"]);
    for (n, ratio) in &r.ratios {
        table.row(&[n.to_string(), fmt_num(*ratio)]);
    }
    let code = match r.verdict {
        DeterminacyVerdict::CriterionSatisfied => EXIT_OK,
        DeterminacyVerdict::Inconclusive => EXIT_NEGATIVE,
    };
    Ok(Outcome {
        code,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

fn reconstruct(path: &Path, s0: SupportSet, tol: f64, checks: Option<PathBuf>) -> Result<Outcome, CliError> {
    let seq = parse_moment_sequence(path)?;
    let rec = representing_measure(&seq, s0, tol)?;
    let mut report = String::new();
    writeln!(report, "support: {s0}").unwrap();
    writeln!(report, "atoms: {}", rec.quadrature.len()).unwrap();
    let mut table = Table::new(&["node", "weight"]);
    for (x, w) in rec.quadrature.nodes.iter().zip(&rec.quadrature.weights) {
        writeln!(report, "  {x:>24.16e}  {w:>24.16e}").unwrap();
        table.row(&[fmt_num(*x), fmt_num(*w)]);
    }
    if !rec.clamped.is_empty() {
        writeln!(report, "clamped nodes: {:?}", rec.clamped).unwrap();
    }
    writeln!(report, "verification (order, target, achieved, relative error):").unwrap();
    let mut check_table = Table::new(&["order", "target", "achieved", "rel_error"]);
    for c in &rec.checks {
        writeln!(report, "  {:>3}  {:e}  {:e}  {:e}", c.order, c.target, c.achieved, c.rel_error).unwrap();
        check_table.row(&[c.order.to_string(), fmt_num(c.target), fmt_num(c.achieved), fmt_num(c.rel_error)]);
    }
    writeln!(report, "max relative error: {:e}", rec.max_rel_error()).unwrap();
    let extra = checks.map(|p| (p, check_table.finish())).into_iter().collect();
    Ok(Outcome {
        code: EXIT_OK,
        report,
        csv: table.finish(),
        extra,
    })
}

/// All α with |α| ≤ order, graded then lexicographic with the first axis slowest.
fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, dim: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in (0..=left).rev() {
            prefix.push(i);
            fill(prefix, dim, left - i, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for level in 0..=order {
        fill(&mut Vec::new(), dim, level, &mut out);
    }
    out
}

fn moments(path: &Path, order: usize) -> Result<Outcome, CliError> {
    let m = parse_measure_spec(path)?;
    let dim = m.dim();
    let mut header: Vec<String> = if dim == 1 {
        vec!["order".into()]
    } else {
        (1..=dim).map(|i| format!("a{i}")).collect()
    };
    header.push("moment".into());
    let mut table = Table::new(&header);
    let mut report = String::new();
    writeln!(report, "dimension: {dim}").unwrap();
    for alpha in multi_indices(dim, order) {
        let v = m.moment(&MultiIndex(alpha.clone()))?;
        let mut row: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
        writeln!(report, "m{:?} = {v}", alpha).unwrap();
        row.push(fmt_num(v));
        table.row(&row);
    }
    Ok(Outcome {
        code: EXIT_OK,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

fn fvolume(path: &Path, bx: &str, tol: f64) -> Result<Outcome, CliError> {
    let m = parse_measure_spec(path)?;
    let region = parse_box(bx).map_err(CliError::Usage)?;
    if region.dim() != m.dim() {
        return Err(momentlab::Error::DimensionMismatch {
            expected: m.dim(),
            got: region.dim(),
        }
        .into());
    }
    let f = DistributionFunction::from_measure(m.clone());
    let volume = if region.is_bounded() {
        f_volume(&f, &region)?
    } else {
        unbounded_volume(&m, &region)?
    };
    let continuous = if region.is_bounded() {
        Some(is_f_continuous_interval(&m, &region, tol)?)
    } else {
        None
    };
    let mut report = String::new();
    writeln!(report, "box: ({:?}, {:?}]", region.a(), region.b()).unwrap();
    writeln!(report, "volume: {volume}").unwrap();
    if let Some(c) = continuous {
        writeln!(report, "F-continuous: {c}").unwrap();
    }
    let mut table = Table::new(&["volume", "f_continuous"]);
    table.row(&[fmt_num(volume), continuous.map_or(String::new(), |c| c.to_string())]);
    Ok(Outcome {
        code: EXIT_OK,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

/// Inclusion–exclusion with F(−∞) = 0 and F(+∞) taken as the marginal limit.
fn unbounded_volume(m: &MeasureRep, region: &momentlab::BoxRegion) -> Result<f64, CliError> {
    let mut total = 0.0;
    for (corner, sign) in region.corners() {
        if corner.contains(&f64::NEG_INFINITY) {
            continue;
        }
        let clipped: Vec<f64> = corner.iter().map(|c| if c.is_infinite() { f64::MAX } else { *c }).collect();
        total += sign * momentlab::cdf(m, &clipped)?;
    }
    Ok(total)
}

fn taylor(path: &Path, t: f64, h: f64, n: usize) -> Result<Outcome, CliError> {
    let m = parse_measure_spec(path)?;
    let c = taylor_remainder_check(&m, t, h, n)?;
    let mut report = String::new();
    writeln!(report, "remainder: {:e}", c.remainder).unwrap();
    writeln!(report, "bound: {:e}", c.bound).unwrap();
    writeln!(report, "slack: {:e}", c.slack).unwrap();
    writeln!(report, "holds: {}", c.holds).unwrap();
    let mut table = Table::new(&["t", "h", "n", "remainder", "bound", "slack", "holds"]);
    table.row(&[
        fmt_num(t),
        fmt_num(h),
        n.to_string(),
        fmt_num(c.remainder),
        fmt_num(c.bound),
        fmt_num(c.slack),
        c.holds.to_string(),
    ]);
    Ok(Outcome {
        code: if c.holds { EXIT_OK } else { EXIT_NEGATIVE },
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

/// Half-integers around the atoms of an atomic limit; otherwise 101 evenly
/// spaced points over the support, with infinite ends replaced by mean ± 8 sd.
fn default_grid(limit: &MeasureRep) -> Result<Vec<f64>, CliError> {
    let spectrum = spectrum_report(limit);
    if limit.is_atomic() {
        let xs: Vec<f64> = spectrum.point_spectrum.iter().map(|p| p[0]).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min).floor() as i64 - 1;
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + 1;
        return Ok(momentlab::convergence::half_integer_grid(lo, hi));
    }
    let m = limit.moments_1d(2)?;
    let sd = (m[2] - m[1] * m[1]).max(0.0).sqrt();
    let lo = spectrum.support.iter().map(|b| b.lo[0]).fold(f64::INFINITY, f64::min);
    let hi = spectrum.support.iter().map(|b| b.hi[0]).fold(f64::NEG_INFINITY, f64::max);
    let lo = if lo.is_finite() { lo } else { m[1] - 8.0 * sd };
    let hi = if hi.is_finite() { hi } else { m[1] + 8.0 * sd };
    let atoms = spectrum.point_spectrum;
    Ok((0..101)
        .map(|i| lo + (hi - lo) * i as f64 / 100.0)
        .filter(|x| !atoms.iter().any(|a| a[0] == *x))
        .collect())
}

fn converge(path: &Path, ks: &str, order: usize, grid: Option<&str>) -> Result<Outcome, CliError> {
    let fam = parse_family_spec(path)?;
    let ks = parse_ks(ks).map_err(CliError::Usage)?;
    let grid = match grid {
        Some(g) => parse_grid(g).map_err(CliError::Usage)?,
        None => default_grid(fam.limit())?,
    };
    let r = weak_convergence_check(&fam, &grid, &ks, order)?;
    let mut report = String::new();
    writeln!(report, "family: {}", fam.label()).unwrap();
    writeln!(report, "grid: {} points in [{}, {}]", grid.len(), grid[0], grid[grid.len() - 1]).unwrap();
    match &r.determinacy {
        Some(d) => writeln!(report, "limit determinacy: {} (window minimum {:e})", d.verdict, d.window_min).unwrap(),
        None => writeln!(report, "limit determinacy: point mass at the origin").unwrap(),
    }
    let mut header = vec!["k".to_string()];
    header.extend((1..=order).map(|n| format!("gap_{n}")));
    header.push("sup_cdf".into());
    let mut table = Table::new(&header);
    for (i, &k) in ks.iter().enumerate() {
        writeln!(
            report,
            "k = {k}: max moment gap {:e}, sup cdf distance {:e}",
            r.moments.max_gap(i),
            r.sup_distance[i]
        )
        .unwrap();
        let mut row = vec![k.to_string()];
        row.extend(r.moments.gaps[i].iter().map(|g| fmt_num(*g)));
        row.push(fmt_num(r.sup_distance[i]));
        table.row(&row);
    }
    Ok(Outcome {
        code: EXIT_OK,
        report,
        csv: table.finish(),
        extra: vec![],
    })
}

/// Runs a parsed command line and performs the output I/O; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let write = |path: &Path, body: &str| {
        std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))
    };
    for (path, body) in &outcome.extra {
        if let Err(e) = write(path, body) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    match cli.command.out_path() {
        Some(path) => {
            if let Err(e) = write(path, &outcome.csv) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            print!("{}", outcome.report);
        }
        None => {
            eprint!("{}", outcome.report);
            print!("{}", outcome.csv);
        }
    }
    outcome.code
}
