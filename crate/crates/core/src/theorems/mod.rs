//! Mechanical verification of the identities and inequalities satisfied by
//! radial solutions, assembled into a deterministic JSON report.

mod baseline;
mod check;
mod checks;

pub use baseline::{
    baseline_families, max_sandwich_ratio, measure_sandwich_constants, sandwich_baseline, SandwichBaseline,
    BASELINE_VERSION, REGRESSION_FACTOR,
};
pub use check::{CheckKind, CheckResult};
pub use checks::{
    check_closed_form_identity, check_closed_form_residual, check_decay, check_energy_bound, check_flux_monotonicity,
    check_identity, check_profile_residual, check_psi_concavity, check_sandwich, check_ur1_bound, citation,
    decay_exponent, half_annulus_constant, integrability_margin, Subject,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closed_forms::{bc_singular_solution, cone_solution, mems_singular_solution};
use crate::error::{Error, Result};
use crate::gelfand::{default_grid, shoot_radius, sweep, SweepOptions};
use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
use crate::radial::{Node, NodeProfile, SolverOptions};
use crate::stability::{hardy_constant, linearized_potential, principal_eigenvalue, MU_BAND};

const SCAN_LIMITS: (usize, usize) = (2, 12);
/// Center value of the solved profile used by the dimension scan; stable for
/// every family and dimension the scan covers.
const SCAN_CENTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Profiles,
    ClosedForms,
    Scan,
    Sweeps,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["profiles", "closed-forms", "scan", "sweeps", "all"];

    fn includes(self, part: Suite) -> bool {
        self == Suite::All || self == part
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Profiles => "profiles",
            Suite::ClosedForms => "closed-forms",
            Suite::Scan => "scan",
            Suite::Sweeps => "sweeps",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "profiles" => Ok(Suite::Profiles),
            "closed-forms" => Ok(Suite::ClosedForms),
            "scan" => Ok(Suite::Scan),
            "sweeps" => Ok(Suite::Sweeps),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!(
                "unknown suite {other:?}; expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

/// Everything that determines a report's content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteSettings {
    pub solver: SolverOptions,
    /// Dimensions for the profile and sweep checks (inclusive).
    pub n_range: (usize, usize),
    /// Dimensions for the closed-form and threshold scan (inclusive).
    pub scan_range: (usize, usize),
    pub m_values: Vec<f64>,
    /// Exponents `p` of `(1 - u)^(-p)` for the profile checks.
    pub exponents: Vec<f64>,
    pub sweep_points: usize,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            n_range: (2, 6),
            scan_range: SCAN_LIMITS,
            m_values: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            exponents: vec![1.0, 2.0, 3.0],
            sweep_points: 400,
        }
    }
}

impl SuiteSettings {
    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("settings serialize");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.n_range;
        if lo < 2 || hi < lo {
            return Err(Error::InvalidGrid(format!("dimension range {lo}..{hi} must satisfy 2 <= lo <= hi")));
        }
        let (slo, shi) = self.scan_range;
        if slo < SCAN_LIMITS.0 || shi > SCAN_LIMITS.1 || shi < slo {
            return Err(Error::DimensionOutOfRange {
                check: "dimension_scan",
                n: if slo < SCAN_LIMITS.0 { slo } else { shi },
                lo: SCAN_LIMITS.0,
                hi: SCAN_LIMITS.1,
            });
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
            return Err(Error::InvalidCenter(m));
        }
        Ok(())
    }
}

/// A check that could not run on a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCheck {
    pub name: String,
    pub n: usize,
    pub params: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub negative_controls: usize,
    /// Negative controls that passed; must be zero.
    pub negative_controls_passing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub suite: String,
    pub timestamp: String,
    pub settings_fingerprint: String,
    pub settings: SuiteSettings,
    pub summary: Summary,
    pub results: Vec<CheckResult>,
    pub skipped: Vec<SkippedCheck>,
    /// Fabricated inputs every check must reject.
    pub negative_controls: Vec<CheckResult>,
}

impl TheoremReport {
    fn assemble(
        suite: String,
        settings: &SuiteSettings,
        mut results: Vec<CheckResult>,
        mut skipped: Vec<SkippedCheck>,
        negative_controls: Vec<CheckResult>,
    ) -> Self {
        let key = |c: &CheckResult| (c.name.clone(), c.n, c.params.clone());
        results.sort_by_key(key);
        skipped.sort_by(|a, b| (&a.name, a.n, &a.params).cmp(&(&b.name, b.n, &b.params)));
        let passed = results.iter().filter(|c| c.pass).count();
        let summary = Summary {
            checks: results.len(),
            passed,
            failed: results.len() - passed,
            skipped: skipped.len(),
            negative_controls: negative_controls.len(),
            negative_controls_passing: negative_controls.iter().filter(|c| c.pass).count(),
        };
        Self {
            suite,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            settings_fingerprint: settings.fingerprint(),
            settings: settings.clone(),
            summary,
            results,
            skipped,
            negative_controls,
        }
    }

    /// Every check passed and every negative control failed.
    pub fn accepted(&self) -> bool {
        self.summary.failed == 0 && self.summary.negative_controls_passing == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|c| !c.pass)
    }

    /// The report with its timestamp blanked, for byte comparisons.
    pub fn without_timestamp(&self) -> Self {
        Self {
            timestamp: String::new(),
            ..self.clone()
        }
    }
}

#[derive(Default)]
struct Collector {
    results: Vec<CheckResult>,
    skipped: Vec<SkippedCheck>,
}

impl Collector {
    fn push(&mut self, check: CheckResult) {
        self.results.push(check);
    }

    /// Keeps the checks, records `NotApplicable` and `DimensionOutOfRange`
    /// as skipped, and propagates every other error.
    fn take(&mut self, name: &str, n: usize, params: &str, outcome: Result<Vec<CheckResult>>) -> Result<()> {
        match outcome {
            Ok(checks) => self.results.extend(checks),
            Err(e @ (Error::NotApplicable { .. } | Error::DimensionOutOfRange { .. })) => self.skip(name, n, params, e.to_string()),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn skip(&mut self, name: &str, n: usize, params: &str, reason: String) {
        self.skipped.push(SkippedCheck {
            name: name.to_string(),
            n,
            params: params.to_string(),
            reason,
        });
    }

    fn extend(&mut self, other: Collector) {
        self.results.extend(other.results);
        self.skipped.extend(other.skipped);
    }
}

fn power(p: f64) -> Result<NonlinearitySpec> {
    NonlinearitySpec::power(1.0, p)
}

/// All checks on the solved profile with center `m`.
fn profile_checks(n: usize, f: &NonlinearitySpec, m: f64, settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let solver = &settings.solver;
    let sol = shoot_radius(n, f, m, solver)?;
    let subject = Subject::new(&sol.profile, f, sol.lambda);
    let label = subject.label.clone();
    let mut out = Collector::default();

    out.push(check_identity(&subject)?);
    out.push(check_energy_bound(&subject)?);
    out.push(check_profile_residual(&subject)?);
    out.results.extend(check_flux_monotonicity(&subject));

    let potential = linearized_potential(f, sol.lambda);
    let mu1 = principal_eigenvalue(&sol.profile, &potential, solver)?.mu1.unwrap_or(f64::NAN);
    if mu1 >= -MU_BAND {
        out.take("ur1_bound", n, &label, check_ur1_bound(&subject, f.flags()))?;
        out.take("sandwich", n, &label, check_sandwich(&subject, baseline))?;
        out.take("decay", n, &label, check_decay(&subject))?;
    } else {
        let reason = format!("profile is unstable (mu1 = {mu1:e})");
        for name in ["ur1_bound", "sandwich", "decay"] {
            out.skip(name, n, &label, reason.clone());
        }
    }
    Ok(out)
}

fn run_profiles(settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let mut cases = Vec::new();
    for n in settings.n_range.0..=settings.n_range.1 {
        for &p in &settings.exponents {
            for &m in &settings.m_values {
                cases.push((n, p, m));
            }
        }
    }
    let parts: Vec<Result<Collector>> = cases
        .par_iter()
        .map(|&(n, p, m)| profile_checks(n, &power(p)?, m, settings, baseline))
        .collect();
    let mut out = Collector::default();
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

fn run_closed_forms(settings: &SuiteSettings) -> Result<Collector> {
    let (lo, hi) = settings.scan_range;
    let mut out = Collector::default();
    let mems = NonlinearitySpec::mems();
    for n in lo..=hi {
        let cone = cone_solution(n)?;
        let f = cone.nonlinearity();
        let subject = Subject::closed_form(&cone, &f);
        out.push(check_closed_form_residual(&subject)?);
        out.push(check_closed_form_identity(&cone));
        out.push(check_identity(&subject)?);
        out.push(check_energy_bound(&subject)?);
        out.results.extend(check_flux_monotonicity(&subject));
        if cone.hardy_report().verdict.is_stable() {
            out.take("ur1_bound", n, &subject.label, check_ur1_bound(&subject, f.flags()))?;
            out.take("decay", n, &subject.label, check_decay(&subject))?;
        }

        let singular = mems_singular_solution(n)?;
        let lambda_s = singular.lambda_s.unwrap_or(f64::NAN);
        let subject = Subject::new(&singular, &mems, lambda_s);
        out.push(check_closed_form_residual(&subject)?);
        out.push(check_identity(&subject)?);
    }
    for n in lo.max(3)..=hi {
        for p in [0.04, 0.5, 2.0] {
            let bc = bc_singular_solution(n, p)?;
            let f = bc.nonlinearity();
            let subject = Subject::closed_form(&bc, &f);
            out.push(check_closed_form_residual(&subject)?);
            out.push(check_closed_form_identity(&bc));
            out.push(check_identity(&subject)?);
            out.results.extend(check_flux_monotonicity(&subject));
        }
    }
    Ok(out)
}

/// Hardy thresholds, integrability margins and, for `2 <= n <= 6`, the full
/// sandwich on a solved MEMS profile.
fn scan_checks(n: usize, settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let mut out = Collector::default();
    let h = hardy_constant(n);
    let expect = |stable: bool| if stable { "expect stable" } else { "expect unstable" };

    // stable iff kappa <= H, written so that the expected side passes
    let threshold = |name: &str, kappa: f64, stable: bool, params: &str| {
        let params = format!("{params} {}", expect(stable));
        if stable {
            CheckResult::le(name, citation::HARDY, n, params, kappa, h, 0.0)
        } else {
            CheckResult::le(name, citation::HARDY, n, params, h, kappa, 0.0)
        }
    };
    let cone = cone_solution(n)?;
    out.push(threshold("cone_hardy_threshold", cone.kappa, n >= 7, "cone"));
    let singular = mems_singular_solution(n)?;
    out.push(threshold("mems_singular_hardy_threshold", singular.kappa, n >= 8, "mems singular"));

    let margin = integrability_margin(n);
    out.push(if n <= 6 {
        CheckResult::le("integrability_margin", citation::INTEGRABILITY, n, "expect positive", 0.0, margin, 0.0)
    } else {
        CheckResult::le("integrability_margin", citation::INTEGRABILITY, n, "expect negative", margin, 0.0, 0.0)
    });

    if (2..=6).contains(&n) {
        let f = NonlinearitySpec::mems();
        let sol = shoot_radius(n, &f, SCAN_CENTER, &settings.solver)?;
        let subject = Subject::new(&sol.profile, &f, sol.lambda);
        out.take("sandwich", n, &subject.label, check_sandwich(&subject, baseline))?;
    }
    Ok(out)
}

/// Per-dimension threshold report over `n_lo..=n_hi` (within `2..=12`).
pub fn dimension_scan(n_lo: usize, n_hi: usize, settings: &SuiteSettings) -> Result<TheoremReport> {
    let settings = SuiteSettings {
        scan_range: (n_lo, n_hi),
        ..settings.clone()
    };
    settings.validate()?;
    let out = run_scan(&settings, &sandwich_baseline())?;
    Ok(TheoremReport::assemble("scan".into(), &settings, out.results, out.skipped, Vec::new()))
}

fn run_scan(settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let mut out = Collector::default();
    for n in settings.scan_range.0..=settings.scan_range.1 {
        out.extend(scan_checks(n, settings, baseline)?);
    }
    Ok(out)
}

/// Most adverse check per name across a set of results.
fn worst_per_name(checks: Vec<CheckResult>) -> Vec<CheckResult> {
    let mut worst: Vec<CheckResult> = Vec::new();
    for c in checks {
        let slack = |c: &CheckResult| match c.kind {
            CheckKind::RelEq => -c.margin,
            _ => c.margin,
        };
        match worst.iter_mut().find(|w| w.name == c.name) {
            Some(w) if slack(&c) < slack(w) || (!c.pass && w.pass) => *w = c,
            Some(_) => {}
            None => worst.push(c),
        }
    }
    worst
}

/// Bounds over every stable record of the standard sweeps, aggregated per
/// (check, dimension, family), plus the baseline regression check.
fn sweep_checks(n: usize, f: &NonlinearitySpec, settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let grid = default_grid(settings.sweep_points, 1e-3, 1.0 - 1e-4)?;
    let opts = SweepOptions {
        solver: settings.solver,
        workers: 0,
    };
    let diagram = sweep(n, f, &grid, &opts)?;
    let stable: Vec<f64> = diagram.records.iter().filter(|r| r.stable).map(|r| r.m).collect();

    let per_record: Vec<Result<Collector>> = stable
        .par_iter()
        .map(|&m| {
            let sol = shoot_radius(n, f, m, &settings.solver)?;
            let subject = Subject::new(&sol.profile, f, sol.lambda);
            let mut part = Collector::default();
            part.take("ur1_bound", n, &subject.label, check_ur1_bound(&subject, f.flags()))?;
            part.take("sandwich", n, &subject.label, check_sandwich(&subject, baseline))?;
            Ok(part)
        })
        .collect();
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for part in per_record {
        let part = part?;
        checks.extend(part.results);
        skipped.extend(part.skipped);
    }

    let family = format!("{} sweep, {} stable of {} records", f.label(), stable.len(), diagram.records.len());
    let mut out = Collector::default();
    for mut c in worst_per_name(checks) {
        c.name = format!("sweep_{}", c.name);
        c.params = format!("{family}; worst at {}", c.params);
        out.push(c);
    }
    if let Some(s) = skipped.into_iter().next() {
        out.skip(&format!("sweep_{}", s.name), n, &family, s.reason);
    }
    if let Some(limit) = baseline.regression_limit(n) {
        let ratio = diagram
            .records
            .iter()
            .filter(|r| r.stable)
            .map(|r| r.f_m / (r.ur1 * r.ur1))
            .fold(0.0, f64::max);
        out.push(CheckResult::le(
            "sandwich_baseline_regression",
            "max lambda F(m)/u_r(1)^2 stays within 5% of the recorded constant",
            n,
            family,
            ratio,
            limit,
            0.0,
        ));
    }
    Ok(out)
}

fn run_sweeps(settings: &SuiteSettings, baseline: &SandwichBaseline) -> Result<Collector> {
    let mut out = Collector::default();
    for n in settings.n_range.0..=settings.n_range.1 {
        for f in baseline_families() {
            out.extend(sweep_checks(n, &f, settings, baseline)?);
        }
    }
    Ok(out)
}

/// Fabricated inputs that each check must reject.
pub fn negative_controls(settings: &SuiteSettings) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // a solved profile with one slope sign flipped
    let mems = NonlinearitySpec::mems();
    let sol = shoot_radius(3, &mems, 0.5, &settings.solver)?;
    let mut nodes: Vec<Node> = sol.profile.node_list().to_vec();
    let mid = nodes.len() / 2;
    nodes[mid].ur = -nodes[mid].ur;
    let fabricated = NodeProfile::new(3, nodes)?.with_lambda(sol.lambda);
    let subject = Subject::new(&fabricated, &mems, sol.lambda);
    out.extend(
        check_flux_monotonicity(&subject)
            .into_iter()
            .filter(|c| c.name == "flux_monotone"),
    );

    // a convex Psi grid
    let convex: Vec<f64> = (1..=64).map(|k| (k as f64 / 64.0).powi(2)).collect();
    out.push(check_psi_concavity(3, "fabricated convex grid s^2", &convex));

    // the cone is not a MEMS solution
    let cone = cone_solution(5)?;
    out.push(check_closed_form_residual(&Subject::new(&cone, &mems, 1.0))?);

    // the Hardy certificate just above the optimal constant
    let h = hardy_constant(7);
    out.push(CheckResult::le(
        "hardy_above_constant",
        citation::HARDY,
        7,
        "kappa = (n-2)^2/4 + 1e-13",
        h + 1e-13,
        h,
        0.0,
    ));

    // the identity with a perturbed lambda
    let subject = Subject::new(&sol.profile, &mems, sol.lambda * 1.01);
    out.push(check_identity(&subject)?);

    Ok(out)
}

/// Runs `suite` with `settings`.
pub fn run_suite(suite: Suite, settings: &SuiteSettings) -> Result<TheoremReport> {
    settings.validate()?;
    let baseline = sandwich_baseline();
    let mut out = Collector::default();
    if suite.includes(Suite::Profiles) {
        out.extend(run_profiles(settings, &baseline)?);
    }
    if suite.includes(Suite::ClosedForms) {
        out.extend(run_closed_forms(settings)?);
    }
    if suite.includes(Suite::Scan) {
        out.extend(run_scan(settings, &baseline)?);
    }
    if suite.includes(Suite::Sweeps) {
        out.extend(run_sweeps(settings, &baseline)?);
    }
    let controls = negative_controls(settings)?;
    Ok(TheoremReport::assemble(suite.to_string(), settings, out.results, out.skipped, controls))
}

