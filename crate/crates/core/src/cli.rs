//! Command-line front end: flag and config-file parsing, dispatch, and
//! artifact output.
//!
//! Flags and a JSON config file both produce a [`RunConfig`]; the two are
//! merged field by field with flags winning, validated into a [`Job`], and
//! only then executed. `MEMS_LAB_SEED` is reserved and ignored: every
//! computation is deterministic.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::closed_forms::{bc_singular_solution, cone_solution, mems_singular_solution, residual, ClosedFormSolution};
use crate::error::{Error, Result};
use crate::gelfand::{
    branch_upper_center, default_grid, minimal_branch_at, shoot_radius, sweep, SweepOptions, UnitBallSolution,
};
use crate::io::{format_float, write_diagram_csv, write_json, write_profile_csv};
use crate::nonlinearity::{crandall_rabinowitz_estimate, Nonlinearity, NonlinearitySpec};
use crate::radial::{Node, SolverOptions};
use crate::stability::{
    disconjugacy_test, linearized_potential, principal_eigenvalue_traced, BisectionStep, StabilityReport,
};
use crate::theorems::{run_suite, Suite, SuiteSettings, TheoremReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable reserved for a random seed. Nothing reads it.
pub const SEED_ENV: &str = "MEMS_LAB_SEED";

const DEFAULT_M_RANGE: Span<f64> = Span { lo: 1e-3, hi: 1.0 - 1e-4 };
const DEFAULT_POINTS: usize = 400;
/// Coarse grid used to locate the end of the minimal branch for `--lambda`.
const BRANCH_SCAN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Sweep,
    Stability,
    Verify,
    Examples,
    Gamma,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CommandKind::Solve => "solve",
            CommandKind::Sweep => "sweep",
            CommandKind::Stability => "stability",
            CommandKind::Verify => "verify",
            CommandKind::Examples => "examples",
            CommandKind::Gamma => "gamma",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Disconjugacy,
    Eigenvalue,
    #[default]
    Both,
}

/// Inclusive range written `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "String",
    into = "String",
    bound(serialize = "T: fmt::Display + Clone", deserialize = "T: FromStr + PartialOrd")
)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: fmt::Display> fmt::Display for Span<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl<T: FromStr + PartialOrd> FromStr for Span<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("range `{s}` is not of the form lo..hi"));
        let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        if !(lo <= hi) {
            return Err(Error::Parse(format!("range `{s}` has lo > hi")));
        }
        Ok(Span { lo, hi })
    }
}

impl<T: FromStr + PartialOrd> TryFrom<String> for Span<T> {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl<T: fmt::Display> From<Span<T>> for String {
    fn from(span: Span<T>) -> String {
        span.to_string()
    }
}

/// Everything a run can be configured with. Every field is optional so that
/// flags and a config file can each supply part of it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `mems`, `power`, `cone` or `bc` (completed by `a`, `p`, `n`), or a
    /// full spec such as `power:1:2` or `cone:7`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<Span<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<Span<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_blow: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! merge_fields {
    ($primary:expr, $fallback:expr; $($field:ident),*) => {
        RunConfig { $($field: $primary.$field.or($fallback.$field)),* }
    };
}

impl RunConfig {
    /// Field-wise merge; values set in `self` win.
    pub fn merged_over(self, fallback: RunConfig) -> RunConfig {
        merge_fields!(self, fallback; command, n, family, a, p, m, m_range, points, lambda, method, suite,
            n_range, workers, rtol, atol, eps_blow, r_max, out, format)
    }

    pub fn from_json_file(path: &Path) -> Result<RunConfig> {
        let file = File::open(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_reader(io::BufReader::new(file))
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    fn supplied(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        let mut note = |set: bool, name| {
            if set {
                names.push(name);
            }
        };
        note(self.n.is_some(), "n");
        note(self.family.is_some(), "family");
        note(self.a.is_some(), "a");
        note(self.p.is_some(), "p");
        note(self.m.is_some(), "m");
        note(self.m_range.is_some(), "m_range");
        note(self.points.is_some(), "points");
        note(self.lambda.is_some(), "lambda");
        note(self.method.is_some(), "method");
        note(self.suite.is_some(), "suite");
        note(self.n_range.is_some(), "n_range");
        note(self.workers.is_some(), "workers");
        note(self.rtol.is_some(), "rtol");
        note(self.atol.is_some(), "atol");
        note(self.eps_blow.is_some(), "eps_blow");
        note(self.r_max.is_some(), "r_max");
        note(self.out.is_some(), "out");
        note(self.format.is_some(), "format");
        names
    }

    fn solver(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions::default();
        let positive = |name: &str, v: Option<f64>, slot: &mut f64| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(usage(format!("{name} must be positive and finite, got {x}"))),
            Some(x) => {
                *slot = x;
                Ok(())
            }
            None => Ok(()),
        };
        positive("rtol", self.rtol, &mut opts.rtol)?;
        positive("atol", self.atol, &mut opts.atol)?;
        positive("eps_blow", self.eps_blow, &mut opts.eps_blow)?;
        positive("r_max", self.r_max, &mut opts.r_max)?;
        Ok(opts)
    }

    fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        let family = self.family.as_deref().ok_or_else(|| usage("missing --family"))?;
        let number = |name: &str, v: Option<f64>| v.ok_or_else(|| usage(format!("--family {family} needs --{name}")));
        let dim = || self.n.ok_or_else(|| usage(format!("--family {family} needs --n")));
        let spec = match family {
            "mems" => Ok(NonlinearitySpec::mems()),
            "power" => NonlinearitySpec::power(self.a.unwrap_or(1.0), number("p", self.p)?),
            "cone" => NonlinearitySpec::cone(dim()?),
            "bc" => NonlinearitySpec::bruera_cabre(dim()?, number("p", self.p)?),
            full => {
                if self.a.is_some() || self.p.is_some() {
                    return Err(usage(format!("--a/--p only combine with a bare family name, not `{full}`")));
                }
                full.parse()
            }
        };
        spec.map_err(|e| usage(e.to_string()))
    }

    /// Checks the combination of fields and resolves it into a job.
    pub fn validate(&self) -> Result<Job> {
        let command = self
            .command
            .ok_or_else(|| usage("no command given (use a subcommand or set \"command\" in the config)"))?;
        let allowed: &[&str] = match command {
            CommandKind::Solve => &["n", "family", "a", "p", "m", "lambda", "rtol", "atol", "eps_blow", "r_max", "out", "format"],
            CommandKind::Sweep => &[
                "n", "family", "a", "p", "m_range", "points", "workers", "rtol", "atol", "eps_blow", "r_max", "out",
                "format",
            ],
            CommandKind::Stability => &[
                "n", "family", "a", "p", "m", "lambda", "method", "rtol", "atol", "eps_blow", "r_max", "out", "format",
            ],
            CommandKind::Verify => &["suite", "n_range", "workers", "rtol", "atol", "eps_blow", "r_max", "out", "format"],
            CommandKind::Examples => &["out", "format"],
            CommandKind::Gamma => &["n", "family", "a", "p", "out", "format"],
        };
        if let Some(name) = self.supplied().into_iter().find(|name| !allowed.contains(name)) {
            return Err(usage(format!("`{name}` is not used by `{command}`")));
        }

        let output = Output {
            path: self.out.clone(),
            format: self.format,
        };
        let solver = self.solver()?;
        let dimension = || -> Result<usize> {
            match self.n {
                Some(n) if n >= 2 => Ok(n),
                Some(n) => Err(usage(format!("--n must be at least 2, got {n}"))),
                None => Err(usage("missing --n")),
            }
        };
        let center = || -> Result<Target> {
            match (self.m, self.lambda) {
                (Some(m), None) if m > 0.0 && m < 1.0 => Ok(Target::Center(m)),
                (Some(m), None) => Err(usage(format!("--m must lie in (0, 1), got {m}"))),
                (None, Some(l)) if l > 0.0 && l.is_finite() => Ok(Target::Lambda(l)),
                (None, Some(l)) => Err(usage(format!("--lambda must be positive, got {l}"))),
                (Some(_), Some(_)) => Err(usage("give either --m or --lambda, not both")),
                (None, None) => Err(usage("missing --m or --lambda")),
            }
        };

        let job = match command {
            CommandKind::Solve => Job::Solve {
                n: dimension()?,
                f: self.nonlinearity()?,
                target: center()?,
                solver,
                output,
            },
            CommandKind::Sweep => {
                let range = self.m_range.unwrap_or(DEFAULT_M_RANGE);
                let points = self.points.unwrap_or(DEFAULT_POINTS);
                let grid = default_grid(points, range.lo, range.hi).map_err(|e| usage(e.to_string()))?;
                Job::Sweep {
                    n: dimension()?,
                    f: self.nonlinearity()?,
                    grid,
                    opts: SweepOptions {
                        solver,
                        workers: self.workers.unwrap_or(0),
                    },
                    output,
                }
            }
            CommandKind::Stability => Job::Stability {
                n: dimension()?,
                f: self.nonlinearity()?,
                target: center()?,
                method: self.method.unwrap_or_default(),
                solver,
                output,
            },
            CommandKind::Verify => {
                let suite: Suite = self
                    .suite
                    .as_deref()
                    .unwrap_or("all")
                    .parse()
                    .map_err(|e: Error| usage(e.to_string()))?;
                let mut settings = SuiteSettings {
                    solver,
                    ..SuiteSettings::default()
                };
                if let Some(range) = self.n_range {
                    if range.lo < 2 {
                        return Err(usage(format!("--n-range must start at 2 or above, got {range}")));
                    }
                    settings.n_range = (range.lo, range.hi);
                }
                Job::Verify {
                    suite,
                    settings,
                    workers: self.workers.unwrap_or(0),
                    output,
                }
            }
            CommandKind::Examples => Job::Examples { output },
            CommandKind::Gamma => Job::Gamma {
                f: self.nonlinearity()?,
                output,
            },
        };
        Ok(job)
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Where and how an artifact is written. Without a path the artifact goes
/// to stdout and the summary line to stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Output {
    /// The format, inferred from the file extension when not given.
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or_else(|| {
            match self.path.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
                Some("json") => Format::Json,
                Some("csv") => Format::Csv,
                _ => default,
            }
        })
    }

    fn write(&self, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match &self.path {
            Some(path) => {
                let mut file = BufWriter::new(File::create(path)?);
                body(&mut file)?;
                file.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock)?;
                lock.flush()?;
            }
        }
        Ok(())
    }

    fn summary(&self, line: &str) {
        match &self.path {
            Some(path) => println!("{line} -> {}", path.display()),
            None => eprintln!("{line}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Center(f64),
    /// Solution on the minimal branch with this `λ`.
    Lambda(f64),
}

/// A validated run.
#[derive(Debug, Clone)]
pub enum Job {
    Solve {
        n: usize,
        f: NonlinearitySpec,
        target: Target,
        solver: SolverOptions,
        output: Output,
    },
    Sweep {
        n: usize,
        f: NonlinearitySpec,
        grid: Vec<f64>,
        opts: SweepOptions,
        output: Output,
    },
    Stability {
        n: usize,
        f: NonlinearitySpec,
        target: Target,
        method: MethodChoice,
        solver: SolverOptions,
        output: Output,
    },
    Verify {
        suite: Suite,
        settings: SuiteSettings,
        workers: usize,
        output: Output,
    },
    Examples {
        output: Output,
    },
    Gamma {
        f: NonlinearitySpec,
        output: Output,
    },
}

/// Outcome of a job that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub n: usize,
    pub nonlinearity: String,
    pub m: f64,
    pub lambda: f64,
    /// First zero of the free solution before rescaling.
    pub radius: f64,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityOutput {
    pub n: usize,
    pub nonlinearity: String,
    pub m: f64,
    pub lambda: f64,
    pub reports: Vec<StabilityReport>,
    /// Evaluations of the eigenvalue bisection, empty when it did not run.
    pub trace: Vec<BisectionStep>,
}

/// One closed-form singular solution with its Hardy verdict and its
/// residual against its own nonlinearity at `r = k/100`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub solution: ClosedFormSolution,
    pub hardy: StabilityReport,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaOutput {
    pub nonlinearity: String,
    pub gamma_estimate: f64,
    pub gamma_exact: f64,
}

fn solve_target(n: usize, f: &NonlinearitySpec, target: Target, solver: &SolverOptions) -> Result<UnitBallSolution> {
    match target {
        Target::Center(m) => shoot_radius(n, f, m, solver),
        Target::Lambda(lambda) => {
            let m_upper = branch_upper_center(n, f, BRANCH_SCAN_POINTS, solver)?;
            minimal_branch_at(n, f, lambda, m_upper, solver)
        }
    }
}

impl Job {
    pub fn execute(&self) -> Result<Outcome> {
        match self {
            Job::Solve {
                n,
                f,
                target,
                solver,
                output,
            } => {
                let sol = solve_target(*n, f, *target, solver)?;
                let nodes = sol.profile.node_list();
                let ur1 = nodes.last().map_or(f64::NAN, |node| node.ur);
                match output.format_or(Format::Csv) {
                    Format::Csv => output.write(|w| write_profile_csv(w, nodes))?,
                    Format::Json => output.write(|w| {
                        write_json(
                            w,
                            &SolveOutput {
                                n: *n,
                                nonlinearity: f.label(),
                                m: sol.profile.m(),
                                lambda: sol.lambda,
                                radius: sol.radius,
                                nodes: nodes.to_vec(),
                            },
                        )
                    })?,
                }
                output.summary(&format!(
                    "solve n={n} {}: m={} lambda={} ur(1)={} ({} nodes)",
                    f.label(),
                    format_float(sol.profile.m()),
                    format_float(sol.lambda),
                    format_float(ur1),
                    nodes.len()
                ));
                Ok(Outcome::Success)
            }
            Job::Sweep { n, f, grid, opts, output } => {
                let diagram = sweep(*n, f, grid, opts)?;
                match output.format_or(Format::Csv) {
                    Format::Csv => output.write(|w| write_diagram_csv(w, &diagram.records))?,
                    Format::Json => output.write(|w| write_json(w, &diagram))?,
                }
                let fold = diagram
                    .m_fold
                    .map_or_else(|| "no interior fold".to_string(), |m| format!("fold near m={}", format_float(m)));
                output.summary(&format!(
                    "sweep n={n} {}: {} of {} records, lambda*~{}, {fold}",
                    f.label(),
                    diagram.records.len(),
                    grid.len(),
                    format_float(diagram.lambda_star_estimate)
                ));
                Ok(Outcome::Success)
            }
            Job::Stability {
                n,
                f,
                target,
                method,
                solver,
                output,
            } => {
                let sol = solve_target(*n, f, *target, solver)?;
                let potential = linearized_potential(f, sol.lambda);
                let mut reports = Vec::new();
                let mut trace = Vec::new();
                if matches!(method, MethodChoice::Disconjugacy | MethodChoice::Both) {
                    reports.push(disconjugacy_test(&sol.profile, &potential, solver)?);
                }
                if matches!(method, MethodChoice::Eigenvalue | MethodChoice::Both) {
                    let (report, steps) = principal_eigenvalue_traced(&sol.profile, &potential, solver)?;
                    reports.push(report);
                    trace = steps;
                }
                let result = StabilityOutput {
                    n: *n,
                    nonlinearity: f.label(),
                    m: sol.profile.m(),
                    lambda: sol.lambda,
                    reports,
                    trace,
                };
                match output.format_or(Format::Json) {
                    Format::Json => output.write(|w| write_json(w, &result))?,
                    Format::Csv => output.write(|w| write_trace_csv(w, &result.trace))?,
                }
                let verdicts: Vec<String> = result
                    .reports
                    .iter()
                    .map(|r| match r.mu1 {
                        Some(mu1) => format!("{:?}={:?} (mu1={})", r.method, r.verdict, format_float(mu1)),
                        None => format!("{:?}={:?}", r.method, r.verdict),
                    })
                    .collect();
                output.summary(&format!(
                    "stability n={n} {} m={} lambda={}: {}",
                    f.label(),
                    format_float(result.m),
                    format_float(result.lambda),
                    verdicts.join(", ")
                ));
                Ok(Outcome::Success)
            }
            Job::Verify {
                suite,
                settings,
                workers,
                output,
            } => {
                let report = if *workers > 0 {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(*workers)
                        .build()
                        .map_err(|e| usage(format!("cannot start {workers} workers: {e}")))?
                        .install(|| run_suite(*suite, settings))?
                } else {
                    run_suite(*suite, settings)?
                };
                match output.format_or(Format::Json) {
                    Format::Json => output.write(|w| write_json(w, &report))?,
                    Format::Csv => output.write(|w| write_checks_csv(w, &report))?,
                }
                let s = report.summary;
                output.summary(&format!(
                    "verify {suite}: {} checks, {} passed, {} failed, {} skipped; {} of {} negative controls passing",
                    s.checks, s.passed, s.failed, s.skipped, s.negative_controls_passing, s.negative_controls
                ));
                for failure in report.failures() {
                    eprintln!(
                        "FAILED {} n={} [{}]: lhs={} rhs={} margin={}",
                        failure.name,
                        failure.n,
                        failure.params,
                        format_float(failure.lhs),
                        format_float(failure.rhs),
                        format_float(failure.margin)
                    );
                }
                Ok(if report.accepted() {
                    Outcome::Success
                } else {
                    Outcome::ChecksFailed
                })
            }
            Job::Examples { output } => {
                let rows = example_rows()?;
                match output.format_or(Format::Json) {
                    Format::Json => output.write(|w| write_json(w, &rows))?,
                    Format::Csv => output.write(|w| write_examples_csv(w, &rows))?,
                }
                output.summary(&format!("examples: {} closed-form singular solutions", rows.len()));
                Ok(Outcome::Success)
            }
            Job::Gamma { f, output } => {
                let result = GammaOutput {
                    nonlinearity: f.label(),
                    gamma_estimate: crandall_rabinowitz_estimate(f),
                    gamma_exact: f.gamma_exact(),
                };
                match output.format {
                    Some(Format::Json) => output.write(|w| write_json(w, &result))?,
                    Some(Format::Csv) => output.write(|w| {
                        let mut csv = csv::Writer::from_writer(w);
                        csv.write_record(["nonlinearity", "gamma_estimate", "gamma_exact"])?;
                        csv.write_record([
                            result.nonlinearity.clone(),
                            format_float(result.gamma_estimate),
                            format_float(result.gamma_exact),
                        ])?;
                        csv.flush()?;
                        Ok(())
                    })?,
                    None => output.write(|w| Ok(writeln!(w, "{}", fixed_decimal(result.gamma_estimate, 9))?))?,
                }
                if output.path.is_some() {
                    output.summary(&format!("gamma {}: {}", result.nonlinearity, format_float(result.gamma_estimate)));
                }
                Ok(Outcome::Success)
            }
        }
    }
}

/// `x` with `digits` decimals and trailing zeros removed, which strips
/// sampling noise from the printed estimate.
fn fixed_decimal(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format_float(x);
    }
    let s = format!("{x:.digits$}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn write_trace_csv(w: &mut dyn Write, trace: &[BisectionStep]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["mu", "first_zero"])?;
    for step in trace {
        let zero = step.first_zero.map_or_else(|| "none".to_string(), format_float);
        csv.write_record([format_float(step.mu), zero])?;
    }
    csv.flush()?;
    Ok(())
}

fn write_checks_csv(w: &mut dyn Write, report: &TheoremReport) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["name", "n", "params", "kind", "lhs", "rhs", "margin", "tolerance", "pass"])?;
    for c in &report.results {
        let kind = serde_json::to_value(c.kind)?;
        csv.write_record([
            c.name.clone(),
            c.n.to_string(),
            c.params.clone(),
            kind.as_str().unwrap_or_default().to_string(),
            format_float(c.lhs),
            format_float(c.rhs),
            format_float(c.margin),
            format_float(c.tolerance),
            c.pass.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn write_examples_csv(w: &mut dyn Write, rows: &[ExampleRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "kind",
        "n",
        "p",
        "amplitude",
        "kappa",
        "hardy_constant",
        "lambda_s",
        "verdict",
        "residual",
        "F1_finite",
    ])?;
    for row in rows {
        let s = &row.solution;
        csv.write_record([
            format!("{:?}", s.kind),
            s.n.to_string(),
            format_float(s.p),
            format_float(s.amplitude),
            format_float(s.kappa),
            format_float(s.hardy_constant()),
            s.lambda_s.map_or_else(String::new, format_float),
            format!("{:?}", row.hardy.verdict),
            format_float(row.residual),
            s.f1_finite.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// The cone and MEMS singular solutions for `n = 2..=12` and the
/// Bruera–Cabré family for `n = 3..=12`, `p in {1/2, 1, 2}`.
pub fn example_rows() -> Result<Vec<ExampleRow>> {
    let mut solutions: Vec<ClosedFormSolution> = Vec::new();
    for n in 2..=12 {
        solutions.push(cone_solution(n)?);
        solutions.push(mems_singular_solution(n)?);
    }
    for n in 3..=12 {
        for p in [0.5, 1.0, 2.0] {
            solutions.push(bc_singular_solution(n, p)?);
        }
    }
    let radii: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
    solutions
        .into_iter()
        .map(|solution| {
            let res = residual(&solution, &solution.nonlinearity(), 1.0, &radii)?;
            Ok(ExampleRow {
                hardy: solution.hardy_report(),
                residual: res.max_abs,
                solution,
            })
        })
        .collect()
}

// ---- clap surface ----

#[derive(Debug, Parser)]
#[command(name = "mems-lab", version, about = "Radial solutions of -Δu = λ f(u) on the unit ball")]
pub struct Cli {
    /// JSON config file; flags given on the command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shoot one profile and write its nodes.
    Solve(SolveArgs),
    /// Bifurcation diagram lambda(m) over a grid of center values.
    Sweep(SweepArgs),
    /// Stability of one profile by disconjugacy and eigenvalue shooting.
    Stability(StabilityArgs),
    /// Run the theorem suite and write the report.
    Verify(VerifyArgs),
    /// Closed-form singular solutions with their Hardy verdicts.
    Examples(OutputArgs),
    /// Estimate gamma = liminf f f''/f'^2 near the blow-up level.
    Gamma(GammaArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// mems, power, cone, bc, or a full spec like power:1:2 or cone:7.
    #[arg(long)]
    pub family: Option<String>,
    /// Amplitude `a` of a (1 - t)^(-p).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Exponent `p` of a (1 - t)^(-p).
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rtol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub atol: Option<f64>,
    /// Blow-up threshold on 1 - u.
    #[arg(long, allow_negative_numbers = true)]
    pub eps_blow: Option<f64>,
    /// Largest radius to integrate to.
    #[arg(long, allow_negative_numbers = true)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Center value u(0).
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Solve on the minimal branch at this lambda instead.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Center values, e.g. 0.001..0.9999.
    #[arg(long)]
    pub m_range: Option<Span<f64>>,
    /// Grid size.
    #[arg(long)]
    pub points: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// profiles, closed-forms, scan, sweeps or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Dimensions for the profile and sweep checks, e.g. 2..8.
    #[arg(long)]
    pub n_range: Option<Span<usize>>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl RunConfig {
    fn with_family(mut self, args: FamilyArgs) -> Self {
        self.n = args.n;
        self.family = args.family;
        self.a = args.a;
        self.p = args.p;
        self
    }

    fn with_solver(mut self, args: SolverArgs) -> Self {
        self.rtol = args.rtol;
        self.atol = args.atol;
        self.eps_blow = args.eps_blow;
        self.r_max = args.r_max;
        self
    }

    fn with_output(mut self, args: OutputArgs) -> Self {
        self.out = args.out;
        self.format = args.format;
        self
    }
}

impl From<Command> for RunConfig {
    fn from(command: Command) -> Self {
        let base = |kind| RunConfig {
            command: Some(kind),
            ..RunConfig::default()
        };
        match command {
            Command::Solve(args) => RunConfig {
                m: args.m,
                lambda: args.lambda,
                ..base(CommandKind::Solve)
            }
            .with_family(args.family)
            .with_solver(args.solver)
            .with_output(args.output),
            Command::Sweep(args) => RunConfig {
                m_range: args.m_range,
                points: args.points,
                workers: args.workers,
                ..base(CommandKind::Sweep)
            }
            .with_family(args.family)
            .with_solver(args.solver)
            .with_output(args.output),
            Command::Stability(args) => RunConfig {
                m: args.m,
                lambda: args.lambda,
                method: args.method,
                ..base(CommandKind::Stability)
            }
            .with_family(args.family)
            .with_solver(args.solver)
            .with_output(args.output),
            Command::Verify(args) => RunConfig {
                suite: args.suite,
                n_range: args.n_range,
                workers: args.workers,
                ..base(CommandKind::Verify)
            }
            .with_solver(args.solver)
            .with_output(args.output),
            Command::Examples(args) => base(CommandKind::Examples).with_output(args),
            Command::Gamma(args) => base(CommandKind::Gamma).with_family(args.family).with_output(args.output),
        }
    }
}

/// Parses `args` (including the program name), runs the job and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let job = match resolve(cli) {
        Ok(job) => job,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match job.execute() {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::ChecksFailed) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            EXIT_FAILURE
        }
    }
}

/// Merges flags over the config file and validates the result.
pub fn resolve(cli: Cli) -> Result<Job> {
    let flags = cli.command.map(RunConfig::from).unwrap_or_default();
    let file = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    if let (Some(a), Some(b)) = (flags.command, file.command) {
        if a != b {
            return Err(usage(format!("config file is for `{b}` but the subcommand is `{a}`")));
        }
    }
    flags.merged_over(file).validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Job> {
        let cli = Cli::try_parse_from(std::iter::once("mems-lab").chain(args.iter().copied())).unwrap();
        resolve(cli)
    }

    #[test]
    fn config_round_trips() {
        let config = RunConfig {
            command: Some(CommandKind::Sweep),
            n: Some(3),
            family: Some("mems".into()),
            m_range: Some(Span { lo: 0.01, hi: 0.99 }),
            n_range: Some(Span { lo: 2, hi: 8 }),
            workers: Some(4),
            format: Some(Format::Json),
            ..RunConfig::default()
        };
        let json = serde_json::to_string(&config).unwrap();
        assert!(json.contains(r#""m_range":"0.01..0.99""#), "{json}");
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn flags_win_over_config() {
        let file = RunConfig {
            n: Some(3),
            m: Some(0.2),
            family: Some("mems".into()),
            ..RunConfig::default()
        };
        let flags = RunConfig {
            command: Some(CommandKind::Solve),
            m: Some(0.7),
            ..RunConfig::default()
        };
        let merged = flags.merged_over(file);
        assert_eq!((merged.n, merged.m), (Some(3), Some(0.7)));
        assert!(matches!(merged.validate().unwrap(), Job::Solve { target: Target::Center(m), .. } if m == 0.7));
    }

    #[test]
    fn invalid_combinations_rejected() {
        assert!(parse(&["solve", "--n", "3", "--family", "mems"]).is_err());
        assert!(parse(&["solve", "--n", "3", "--family", "mems", "--m", "0.5", "--lambda", "1"]).is_err());
        assert!(parse(&["solve", "--n", "1", "--family", "mems", "--m", "0.5"]).is_err());
        assert!(parse(&["solve", "--n", "3", "--family", "mems", "--m", "1.5"]).is_err());
        assert!(parse(&["solve", "--n", "3", "--family", "power", "--m", "0.5"]).is_err());
        assert!(parse(&["sweep", "--n", "3", "--family", "mems", "--points", "2"]).is_err());
        assert!(parse(&["verify", "--suite", "everything"]).is_err());
        assert!(parse(&["verify", "--n-range", "1..4"]).is_err());
        assert!(parse(&["solve", "--n", "3", "--family", "mems", "--m", "0.5", "--rtol", "-1"]).is_err());
        assert!(Cli::try_parse_from(["mems-lab", "verify", "--n-range", "8..2"]).is_err());
    }

    #[test]
    fn config_rejects_unused_fields() {
        let config = RunConfig {
            command: Some(CommandKind::Sweep),
            n: Some(3),
            family: Some("mems".into()),
            lambda: Some(1.0),
            ..RunConfig::default()
        };
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
    }

    #[test]
    fn family_resolution() {
        let config = |family: &str, n: Option<usize>, p: Option<f64>| RunConfig {
            family: Some(family.into()),
            n,
            p,
            ..RunConfig::default()
        };
        assert_eq!(config("mems", None, None).nonlinearity().unwrap(), NonlinearitySpec::mems());
        assert_eq!(
            config("power", None, Some(2.0)).nonlinearity().unwrap(),
            NonlinearitySpec::mems()
        );
        assert_eq!(
            config("cone", Some(7), None).nonlinearity().unwrap(),
            NonlinearitySpec::cone(7).unwrap()
        );
        assert_eq!(
            config("power:1:2", None, None).nonlinearity().unwrap(),
            NonlinearitySpec::mems()
        );
        assert!(config("power:1:2", None, Some(3.0)).nonlinearity().is_err());
        assert!(config("bc", Some(3), None).nonlinearity().is_err());
    }

    #[test]
    fn spans_parse() {
        let s: Span<usize> = "2..8".parse().unwrap();
        assert_eq!((s.lo, s.hi), (2, 8));
        assert!("2-8".parse::<Span<usize>>().is_err());
        assert!("0.9..0.1".parse::<Span<f64>>().is_err());
    }

    #[test]
    fn printed_decimals() {
        assert_eq!(fixed_decimal(1.5000000000000002, 9), "1.5");
        assert_eq!(fixed_decimal(2.0, 9), "2");
        assert_eq!(fixed_decimal(-1e-12, 9), "0");
        assert_eq!(fixed_decimal(f64::INFINITY, 9), "inf");
    }
}
