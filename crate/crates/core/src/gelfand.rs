//! The Gelfand shooting map `m ↦ λ(m)`.
//!
//! A free solution `v` with `v(0) = m` and first zero `R` gives the unit-ball
//! solution `u(r) = v(R r)` of `-Δu = λ f(u)` with `λ = R^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::radial::{integrate, RadialProfile, ShootStatus, SolverOptions};
use crate::stability::{linearized_potential, principal_eigenvalue, MU_BAND};

/// Relative margin by which an interior maximum must beat both neighbours
/// to count as a fold; below it differences are shooting noise.
pub const FOLD_NOISE: f64 = 1e-9;
const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 1.0 - 1e-4;
const GOLDEN_TOL: f64 = 1e-7;
const BRANCH_TOL: f64 = 1e-13;

/// Unit-ball solution produced by [`shoot_radius`].
#[derive(Debug, Clone)]
pub struct UnitBallSolution {
    /// First zero of the free solution.
    pub radius: f64,
    pub lambda: f64,
    pub profile: RadialProfile,
}

/// Shoots from the center value `m` and rescales to the unit ball.
pub fn shoot_radius(n: usize, f: &dyn Nonlinearity, m: f64, opts: &SolverOptions) -> Result<UnitBallSolution> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidCenter(m));
    }
    let shot = integrate(n, f, m, opts)?;
    match shot.status {
        ShootStatus::HitZero { radius } => Ok(UnitBallSolution {
            radius,
            lambda: radius * radius,
            profile: shot.profile.rescaled_to_unit_ball(),
        }),
        status => Err(Error::NoZeroCrossing {
            m,
            status: status.name(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRecord {
    pub m: f64,
    pub lambda: f64,
    pub ur1: f64,
    /// `λ F(m)`.
    #[serde(rename = "F_m", with = "crate::io::lenient_float")]
    pub f_m: f64,
    #[serde(with = "crate::io::lenient_float")]
    pub mu1: f64,
    pub stable: bool,
}

/// Shoots at `m` and classifies the resulting solution.
pub fn record_at(n: usize, f: &dyn Nonlinearity, m: f64, opts: &SolverOptions) -> Result<BifurcationRecord> {
    let sol = shoot_radius(n, f, m, opts)?;
    let potential = linearized_potential(f, sol.lambda);
    let report = principal_eigenvalue(&sol.profile, &potential, opts)?;
    let mu1 = report.mu1.unwrap_or(f64::NAN);
    Ok(BifurcationRecord {
        m,
        lambda: sol.lambda,
        ur1: sol.profile.node_list().last().map_or(f64::NAN, |node| node.ur),
        f_m: sol.lambda * f.primitive(m),
        mu1,
        stable: mu1 >= -MU_BAND,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepDiagnostics {
    pub grid_size: usize,
    /// Center values whose shot or stability analysis failed.
    pub failed_m: Vec<f64>,
    /// Error name for each entry of `failed_m`.
    pub failures: Vec<String>,
    /// Adjacent records whose relative `λ` jump exceeds `10 Δm / m`.
    pub rough_steps: usize,
    /// `λ* - λ` at the last stable record in `m` order.
    pub stable_gap: Option<f64>,
    pub fold_noise: f64,
    pub mu_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub nonlinearity: String,
    pub n: usize,
    pub records: Vec<BifurcationRecord>,
    pub lambda_star_estimate: f64,
    pub m_fold: Option<f64>,
    pub diagnostics: SweepDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

/// `points` center values in `[lo, hi]` clustered at both ends: the first
/// half is log-spaced in `m` up to 1/2, the second log-spaced in `1 - m`.
pub fn default_grid(points: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < 0.5 && hi > 0.5 && hi < 1.0) || points < 4 {
        return Err(Error::InvalidGrid(format!(
            "need 0 < lo < 1/2 < hi < 1 and at least 4 points (got lo = {lo}, hi = {hi}, points = {points})"
        )));
    }
    let low = points / 2;
    let high = points - low;
    let logspace = |a: f64, b: f64, k: usize, i: usize| (a.ln() + (b.ln() - a.ln()) * i as f64 / k as f64).exp();
    let mut grid: Vec<f64> = (0..low).map(|i| logspace(lo, 0.5, low, i)).collect();
    grid.extend((0..high).map(|i| 1.0 - logspace(0.5, 1.0 - hi, high - 1, i)));
    Ok(grid)
}

/// The standard 400-point grid on `[1e-3, 1 - 1e-4]`.
pub fn standard_grid() -> Vec<f64> {
    default_grid(400, GRID_LO, GRID_HI).expect("standard grid bounds are valid")
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(&m) = grid.iter().find(|&&m| !(m > 0.0 && m < 1.0)) {
        return Err(Error::InvalidGrid(format!("center value {m} outside (0, 1)")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("center values must be strictly increasing".into()));
    }
    Ok(())
}

/// Shoots every grid value (in parallel) and assembles the diagram in grid order.
pub fn sweep(n: usize, f: &dyn Nonlinearity, grid: &[f64], opts: &SweepOptions) -> Result<BifurcationDiagram> {
    validate_grid(grid)?;
    let solver = opts.solver;
    let run = || -> Vec<Result<BifurcationRecord>> {
        grid.par_iter().map(|&m| record_at(n, f, m, &solver)).collect()
    };
    let outcomes = if opts.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Parse(format!("cannot start {} workers: {e}", opts.workers)))?
            .install(run)
    } else {
        run()
    };

    let mut diagnostics = SweepDiagnostics {
        grid_size: grid.len(),
        fold_noise: FOLD_NOISE,
        mu_band: MU_BAND,
        ..SweepDiagnostics::default()
    };
    let mut records = Vec::with_capacity(grid.len());
    for (&m, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => {
                diagnostics.failed_m.push(m);
                diagnostics.failures.push(e.name().to_string());
            }
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyDiagram);
    }
    diagnostics.rough_steps = records
        .windows(2)
        .filter(|w| {
            let dm = w[1].m - w[0].m;
            let jump = (w[1].lambda - w[0].lambda).abs() / w[0].lambda;
            jump > 10.0 * dm / w[0].m
        })
        .count();

    let mut diagram = BifurcationDiagram {
        nonlinearity: f.label(),
        n,
        records,
        lambda_star_estimate: f64::NAN,
        m_fold: None,
        diagnostics,
    };
    let (lambda_star, m_fold) = estimate_lambda_star(&diagram);
    diagram.lambda_star_estimate = lambda_star;
    diagram.m_fold = m_fold;
    diagram.diagnostics.stable_gap = diagram
        .records
        .iter()
        .rev()
        .find(|r| r.stable)
        .map(|r| lambda_star - r.lambda);
    Ok(diagram)
}

/// `λ*` as the largest `λ` over stable records (over all records when none
/// is stable), and the center value of the first fold when the largest `λ`
/// of the diagram is an interior maximum.
pub fn estimate_lambda_star(diagram: &BifurcationDiagram) -> (f64, Option<f64>) {
    let records = &diagram.records;
    let max_over = |stable_only: bool| {
        records
            .iter()
            .filter(|r| r.stable || !stable_only)
            .map(|r| r.lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut lambda_star = max_over(true);
    if !lambda_star.is_finite() {
        lambda_star = max_over(false);
    }

    let argmax = records
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
        .map(|(i, _)| i);
    let m_fold = argmax.and_then(|i| {
        if i == 0 || i + 1 >= records.len() {
            return None;
        }
        let peak = records[i].lambda;
        let margin = FOLD_NOISE * peak;
        (peak - records[i - 1].lambda > margin && peak - records[i + 1].lambda > margin).then_some(records[i].m)
    });
    (lambda_star, m_fold)
}

/// Refined turning point of `λ(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub m: f64,
    pub lambda: f64,
    pub mu1: f64,
}

/// Golden-section maximization of `λ(m)` on `[m_lo, m_hi]`, followed by the
/// principal eigenvalue at the maximizer.
pub fn refine_fold(
    n: usize,
    f: &dyn Nonlinearity,
    m_lo: f64,
    m_hi: f64,
    opts: &SolverOptions,
) -> Result<FoldPoint> {
    if !(m_lo > 0.0 && m_lo < m_hi && m_hi < 1.0) {
        return Err(Error::InvalidGrid(format!("fold bracket [{m_lo}, {m_hi}] is not inside (0, 1)")));
    }
    let lambda = |m: f64| shoot_radius(n, f, m, opts).map(|s| s.lambda);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (m_lo, m_hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (lambda(c)?, lambda(d)?);
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = lambda(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = lambda(d)?;
        }
    }
    let m = 0.5 * (a + b);
    let sol = shoot_radius(n, f, m, opts)?;
    let potential = linearized_potential(f, sol.lambda);
    let report = principal_eigenvalue(&sol.profile, &potential, opts)?;
    Ok(FoldPoint {
        m,
        lambda: sol.lambda,
        mu1: report.mu1.unwrap_or(f64::NAN),
    })
}

/// Solution on the branch `m in (0, m_upper]` with `λ(m) = lambda`, found by
/// bisection on `m`. `m_upper` should not exceed the first fold.
///
/// The lower end of the bracket uses `λ(m) <= 2 n m / f(0)`, which holds for
/// nondecreasing `f`.
pub fn minimal_branch_at(
    n: usize,
    f: &dyn Nonlinearity,
    lambda: f64,
    m_upper: f64,
    opts: &SolverOptions,
) -> Result<UnitBallSolution> {
    let not_bracketed = || Error::NotBracketed { lambda, m_upper };
    if !(lambda > 0.0 && lambda.is_finite()) || !(m_upper > 0.0 && m_upper < 1.0) {
        return Err(not_bracketed());
    }
    let f0 = f.f(0.0);
    if !(f0 > 0.0) {
        return Err(not_bracketed());
    }
    let mut lo = (lambda * f0 / (4.0 * n as f64)).min(0.5 * m_upper);
    let mut hi = m_upper;
    if shoot_radius(n, f, lo, opts)?.lambda > lambda || shoot_radius(n, f, hi, opts)?.lambda < lambda {
        return Err(not_bracketed());
    }
    while hi - lo > BRANCH_TOL * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shoot_radius(n, f, mid, opts)?.lambda < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shoot_radius(n, f, 0.5 * (lo + hi), opts)
}

/// Upper end of the minimal branch located on a coarse `points`-point grid:
/// the first center value where `λ` stops increasing, or the last grid
/// value when `λ` increases throughout. Shots that fail end the scan.
pub fn branch_upper_center(n: usize, f: &dyn Nonlinearity, points: usize, opts: &SolverOptions) -> Result<f64> {
    let grid = default_grid(points, GRID_LO, GRID_HI)?;
    let mut best: Option<(f64, f64)> = None;
    for &m in &grid {
        let Ok(sol) = shoot_radius(n, f, m, opts) else { break };
        match best {
            Some((_, lambda)) if sol.lambda <= lambda => break,
            _ => best = Some((m, sol.lambda)),
        }
    }
    best.map(|(m, _)| m).ok_or(Error::EmptyDiagram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{Constant, NonlinearitySpec};
    use approx::assert_relative_eq;

    #[test]
    fn constant_source_radius() {
        let sol = shoot_radius(2, &Constant(1.0), 0.5, &SolverOptions::default()).unwrap();
        assert_relative_eq!(sol.radius, 2f64.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(sol.lambda, 2.0, max_relative = 1e-10);
        assert_eq!(sol.profile.r_end(), 1.0);
        let (u1, _) = sol.profile.eval_profile(1.0).unwrap();
        assert!(u1.abs() <= 1e-10);
    }

    #[test]
    fn small_amplitude_slope() {
        let opts = SolverOptions::default();
        for n in [2, 3, 4] {
            let sol = shoot_radius(n, &NonlinearitySpec::mems(), 1e-3, &opts).unwrap();
            let law = 2.0 * n as f64 * 1e-3;
            assert!((sol.lambda / law - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn grid_shape() {
        let grid = standard_grid();
        assert_eq!(grid.len(), 400);
        assert_relative_eq!(grid[0], 1e-3, max_relative = 1e-14);
        assert_relative_eq!(grid[399], 1.0 - 1e-4, max_relative = 1e-14);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(validate_grid(&[0.2, 0.1]).is_err());
        assert!(validate_grid(&[0.2, 1.0]).is_err());
    }

    fn toy(lambdas: &[f64], stable: &[bool]) -> BifurcationDiagram {
        let records = lambdas
            .iter()
            .zip(stable)
            .enumerate()
            .map(|(i, (&lambda, &stable))| BifurcationRecord {
                m: (i + 1) as f64 / (lambdas.len() + 1) as f64,
                lambda,
                ur1: -1.0,
                f_m: 1.0,
                mu1: if stable { 1.0 } else { -1.0 },
                stable,
            })
            .collect();
        BifurcationDiagram {
            nonlinearity: "toy".into(),
            n: 2,
            records,
            lambda_star_estimate: 0.0,
            m_fold: None,
            diagnostics: SweepDiagnostics::default(),
        }
    }

    #[test]
    fn lambda_star_estimates() {
        let monotone = toy(&[0.1, 0.2, 0.3, 0.4], &[true; 4]);
        assert_eq!(estimate_lambda_star(&monotone), (0.4, None));

        let peaked = toy(&[0.1, 0.3, 0.5, 0.45, 0.4], &[true, true, true, false, false]);
        assert_eq!(estimate_lambda_star(&peaked), (0.5, Some(0.5)));

        let flat_tail = toy(&[0.1, 0.2, 0.3, 0.3 + 1e-12, 0.3], &[true; 5]);
        assert_eq!(estimate_lambda_star(&flat_tail).1, None);
    }

    #[test]
    fn minimal_branch_round_trip() {
        let opts = SolverOptions::default();
        let f = NonlinearitySpec::mems();
        let m0 = 0.2;
        let lambda = shoot_radius(2, &f, m0, &opts).unwrap().lambda;
        let sol = minimal_branch_at(2, &f, lambda, 0.35, &opts).unwrap();
        assert!((sol.profile.m() - m0).abs() <= 1e-8);
        assert!(matches!(
            minimal_branch_at(2, &f, 10.0, 0.35, &opts),
            Err(Error::NotBracketed { .. })
        ));
    }
}
