//! Stability of unit-ball profiles through the linearized radial equation
//! `φ'' + ((n-1)/r) φ' + (q(r) + μ) φ = 0`, `q = λ f'(u(r))`, `φ` regular at 0.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{bisect_root, Stepper};
use crate::nonlinearity::Nonlinearity;
use crate::radial::{RadialProfile, SolverOptions, EVENT_BISECTIONS};

/// Marginal band on the first-zero location.
pub const FIRST_ZERO_BAND: f64 = 1e-6;
/// Marginal band on `μ1`.
pub const MU_BAND: f64 = 1e-8;
/// Marginal band on the Hardy margin.
pub const HARDY_BAND: f64 = 1e-12;
/// Bisection stops once the `μ` bracket is narrower than
/// `max(MU_TOL, MU_REL_TOL |μ|)`.
const MU_TOL: f64 = 1e-9;
const MU_REL_TOL: f64 = 1e-12;
const RENORMALIZE_ABOVE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityMethod {
    Disconjugacy,
    EigenvalueShooting,
    HardyCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    /// `true` for `Stable` and `Marginal`: no sign claim of instability.
    pub fn is_stable(self) -> bool {
        !matches!(self, Verdict::Unstable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub method: StabilityMethod,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardy_constant: Option<f64>,
}

impl StabilityReport {
    fn new(method: StabilityMethod, verdict: Verdict) -> Self {
        Self {
            method,
            verdict,
            first_zero: None,
            mu1: None,
            kappa: None,
            hardy_constant: None,
        }
    }
}

/// One evaluation of the bisection on `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub mu: f64,
    /// First zero of `φ`, `None` when `φ` stays positive on `(0, 1]`.
    pub first_zero: Option<f64>,
}

/// `u ↦ λ f'(u)`.
pub fn linearized_potential(f: &dyn Nonlinearity, lambda: f64) -> impl Fn(f64) -> f64 + '_ {
    move |u| lambda * f.fprime(u)
}

/// Optimal Hardy constant `(n-2)^2/4`.
pub fn hardy_constant(n: usize) -> f64 {
    let d = n as f64 - 2.0;
    d * d / 4.0
}

/// Exact verdict for the potential `κ/r^2` through the Hardy inequality.
pub fn hardy_certificate(kappa: f64, n: usize) -> StabilityReport {
    let h = hardy_constant(n);
    let margin = h - kappa;
    let verdict = if margin.abs() <= HARDY_BAND {
        Verdict::Marginal
    } else if margin > 0.0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    StabilityReport {
        kappa: Some(kappa),
        hardy_constant: Some(h),
        ..StabilityReport::new(StabilityMethod::HardyCertificate, verdict)
    }
}

/// Outcome of one shot of `φ` across the profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiShot {
    /// `φ` vanishes at this radius in `(r0, 1]`.
    Zero(f64),
    /// No zero; `φ(1)` and `φ'(1)` up to a positive factor.
    Positive { value: f64, slope: f64 },
}

/// Shoots `φ` with `φ(r0) = scale (1 - (q(m) + μ) r0^2/(2n))` across a
/// unit-ball profile and reports its first zero.
pub fn shoot_phi(
    profile: &RadialProfile,
    potential: &dyn Fn(f64) -> f64,
    mu: f64,
    scale: f64,
    opts: &SolverOptions,
) -> Result<PhiShot> {
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Domain {
            what: "phi scale",
            value: scale,
            expected: "finite and nonzero",
        });
    }
    let n = profile.n() as f64;
    let r0 = profile.r0();
    let c0 = potential(profile.m()) + mu;
    let phi0 = 1.0 - c0 * r0 * r0 / (2.0 * n);
    if phi0 <= 0.0 {
        return Ok(PhiShot::Zero((2.0 * n / c0).sqrt()));
    }
    // the equation is linear: only the sign of the normalization survives,
    // its magnitude would only distort the absolute error control
    let sign = scale.signum();
    let y0 = [phi0 * sign, -c0 * r0 / n * sign];

    let nodes = profile.node_list();
    // largest potential on [r_i, 1], sampled at the nodes
    let mut tail_sup: Vec<f64> = nodes.iter().map(|node| potential(node.u)).collect();
    for i in (0..tail_sup.len().saturating_sub(1)).rev() {
        tail_sup[i] = tail_sup[i].max(tail_sup[i + 1]);
    }
    let segment = Cell::new(0usize);
    let nm1 = n - 1.0;
    let rhs = |r: f64, y: &[f64; 2]| {
        let u = profile.u_in_segment(segment.get(), r);
        [y[1], -nm1 / r * y[1] - (potential(u) + mu) * y[0]]
    };
    let mut stepper = Stepper::new(rhs, r0, y0, opts.tolerances(), Some(r0));
    let mut steps = 0usize;
    for (i, node) in nodes.iter().enumerate().skip(1) {
        segment.set(i - 1);
        // once q + μ <= 0 on the rest of the interval, (r^(n-1) φ')' has the
        // sign of φ, so a nonvanishing φ moving away from zero never returns
        let [phi, dphi] = stepper.y();
        if tail_sup[i - 1] + mu <= 0.0 && sign * dphi >= 0.0 && sign * phi > 0.0 {
            let value = sign * phi;
            return Ok(PhiShot::Positive {
                value: 1.0,
                slope: sign * dphi / value,
            });
        }
        let target = node.r;
        while stepper.t() < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepBudgetExhausted(opts.max_steps));
            }
            let step = stepper.step(target, f64::INFINITY)?;
            let [phi, _] = step.end();
            if sign * phi <= 0.0 {
                let z = bisect_root(step.t0, step.t1(), |r| step.component(0, r), EVENT_BISECTIONS);
                return Ok(PhiShot::Zero(z));
            }
            let [a, b] = stepper.y();
            let size = a.abs().max(b.abs());
            if !(1.0 / RENORMALIZE_ABOVE..=RENORMALIZE_ABOVE).contains(&size) {
                stepper.rescale_state(1.0 / size);
            }
        }
    }
    let [value, slope] = stepper.y();
    Ok(PhiShot::Positive {
        value: sign * value,
        slope: sign * slope,
    })
}

/// First zero of `φ` in `(r0, 1]`, `None` when there is none.
pub fn first_zero(
    profile: &RadialProfile,
    potential: &dyn Fn(f64) -> f64,
    mu: f64,
    opts: &SolverOptions,
) -> Result<Option<f64>> {
    Ok(match shoot_phi(profile, potential, mu, 1.0, opts)? {
        PhiShot::Zero(z) => Some(z),
        PhiShot::Positive { .. } => None,
    })
}

fn check_unit_ball(profile: &RadialProfile) -> Result<()> {
    let end = profile.r_end();
    if (end - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfRange { r: 1.0, lo: profile.r0(), hi: end });
    }
    Ok(())
}

/// Sturm test: the profile is stable iff `φ` (with `μ = 0`) has no zero in `(0, 1)`.
pub fn disconjugacy_test(
    profile: &RadialProfile,
    potential: &dyn Fn(f64) -> f64,
    opts: &SolverOptions,
) -> Result<StabilityReport> {
    check_unit_ball(profile)?;
    let report = |verdict, first_zero| StabilityReport {
        first_zero,
        ..StabilityReport::new(StabilityMethod::Disconjugacy, verdict)
    };
    Ok(match shoot_phi(profile, potential, 0.0, 1.0, opts)? {
        PhiShot::Zero(z) if 1.0 - z <= FIRST_ZERO_BAND => report(Verdict::Marginal, Some(z)),
        PhiShot::Zero(z) => report(Verdict::Unstable, Some(z)),
        PhiShot::Positive { value, slope } => {
            // a zero just beyond r = 1 is as marginal as one just inside
            let beyond = if slope < 0.0 { -value / slope } else { f64::INFINITY };
            if beyond <= FIRST_ZERO_BAND {
                report(Verdict::Marginal, None)
            } else {
                report(Verdict::Stable, None)
            }
        }
    })
}

/// Principal Dirichlet eigenvalue `μ1` of `-Δ - q` on the unit ball (radial).
pub fn principal_eigenvalue(
    profile: &RadialProfile,
    potential: &dyn Fn(f64) -> f64,
    opts: &SolverOptions,
) -> Result<StabilityReport> {
    principal_eigenvalue_traced(profile, potential, opts).map(|(report, _)| report)
}

/// [`principal_eigenvalue`] together with every `(μ, z(μ))` it evaluated.
///
/// `z(μ)` is nonincreasing: a larger `μ` raises the potential and moves
/// the first zero inward. `μ1` is the threshold where `z` crosses 1.
pub fn principal_eigenvalue_traced(
    profile: &RadialProfile,
    potential: &dyn Fn(f64) -> f64,
    opts: &SolverOptions,
) -> Result<(StabilityReport, Vec<BisectionStep>)> {
    check_unit_ball(profile)?;
    let sup_q = profile
        .node_list()
        .iter()
        .map(|node| potential(node.u).abs())
        .chain(std::iter::once(potential(profile.m()).abs()))
        .fold(0.0, f64::max);
    // μ1 lies in [-sup q, λ_D], with λ_D = j²_{n/2-1,1} < (n + 4)^2 the
    // Dirichlet eigenvalue of the ball
    let n = profile.n() as f64;
    let limit = 10.0 * (1.0 + sup_q) + (n + 4.0).powi(2);

    let mut trace = Vec::new();
    let mut has_zero = |mu: f64| -> Result<bool> {
        let z = first_zero(profile, potential, mu, opts)?;
        trace.push(BisectionStep { mu, first_zero: z });
        Ok(z.is_some())
    };

    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut lo_clear = false;
    while !has_zero(hi)? {
        if hi >= limit {
            return Err(Error::BracketExhausted { limit });
        }
        lo = hi;
        lo_clear = true;
        hi = (2.0 * hi + 1.0).min(limit);
    }
    while !lo_clear && has_zero(lo)? {
        if lo <= -limit {
            return Err(Error::BracketExhausted { limit });
        }
        hi = lo;
        lo = (2.0 * lo - 1.0).max(-limit);
    }
    while hi - lo > MU_TOL.max(MU_REL_TOL * lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_zero(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu1 = 0.5 * (lo + hi);
    let verdict = if mu1.abs() <= MU_BAND {
        Verdict::Marginal
    } else if mu1 > 0.0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    let report = StabilityReport {
        mu1: Some(mu1),
        ..StabilityReport::new(StabilityMethod::EigenvalueShooting, verdict)
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Constant;
    use crate::radial::integrate;

    /// Unit-ball profile of `-Δu = 2n` (u = 1 - r^2), only used as a carrier
    /// for the radius grid.
    fn carrier(n: usize) -> RadialProfile {
        let opts = SolverOptions::default();
        let shot = integrate(n, &Constant(2.0 * n as f64), 0.5, &opts).unwrap();
        shot.profile.rescaled_to_unit_ball()
    }

    #[test]
    fn zero_potential_eigenvalue_in_three_dimensions() {
        let profile = carrier(3);
        let zero = |_: f64| 0.0;
        let report = principal_eigenvalue(&profile, &zero, &SolverOptions::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((report.mu1.unwrap() - pi2).abs() <= 1e-6, "{report:?}");
        assert_eq!(report.verdict, Verdict::Stable);

        let d = disconjugacy_test(&profile, &zero, &SolverOptions::default()).unwrap();
        assert_eq!(d.verdict, Verdict::Stable);
        assert_eq!(d.first_zero, None);
    }

    #[test]
    fn constant_potential_shifts_the_eigenvalue() {
        let profile = carrier(3);
        let opts = SolverOptions::default();
        let c = 4.0;
        let shifted = |_: f64| c;
        let report = principal_eigenvalue(&profile, &shifted, &opts).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((report.mu1.unwrap() - (pi2 - c)).abs() <= 1e-6);

        let strong = |_: f64| 12.0;
        assert_eq!(principal_eigenvalue(&profile, &strong, &opts).unwrap().verdict, Verdict::Unstable);
        assert_eq!(disconjugacy_test(&profile, &strong, &opts).unwrap().verdict, Verdict::Unstable);
    }

    #[test]
    fn first_zero_is_monotone_along_the_bisection() {
        let profile = carrier(4);
        let q = |_: f64| 3.0;
        let (_, trace) = principal_eigenvalue_traced(&profile, &q, &SolverOptions::default()).unwrap();
        let mut sorted = trace.clone();
        sorted.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        let z = |s: &BisectionStep| s.first_zero.unwrap_or(f64::INFINITY);
        for w in sorted.windows(2) {
            assert!(z(&w[1]) <= z(&w[0]), "{w:?}");
        }
    }

    #[test]
    fn first_zero_ignores_normalization() {
        let profile = carrier(3);
        let q = |_: f64| 15.0;
        let opts = SolverOptions::default();
        let reference = match shoot_phi(&profile, &q, 0.0, 1.0, &opts).unwrap() {
            PhiShot::Zero(z) => z,
            other => panic!("{other:?}"),
        };
        for c in [-3.0, 1e-50, 1e50, 0.25] {
            match shoot_phi(&profile, &q, 0.0, c, &opts).unwrap() {
                PhiShot::Zero(z) => assert!((z - reference).abs() <= 1e-10),
                other => panic!("{other:?}"),
            }
        }
        assert!(shoot_phi(&profile, &q, 0.0, 0.0, &opts).is_err());
    }

    #[test]
    fn hardy_certificate_thresholds() {
        assert_eq!(hardy_certificate(6.0, 7).verdict, Verdict::Stable);
        assert_eq!(hardy_certificate(5.0, 6).verdict, Verdict::Unstable);
        assert_eq!(hardy_certificate(80.0 / 9.0, 8).verdict, Verdict::Stable);
        assert_eq!(hardy_certificate(68.0 / 9.0, 7).verdict, Verdict::Unstable);
        assert_eq!(hardy_certificate(6.25, 7).verdict, Verdict::Marginal);
        assert_ne!(hardy_certificate(6.25 + 1e-13, 7).verdict, Verdict::Stable);
        let json = serde_json::to_string(&hardy_certificate(6.0, 7)).unwrap();
        assert_eq!(
            json,
            r#"{"method":"HardyCertificate","verdict":"Stable","kappa":6.0,"hardy_constant":6.25}"#
        );
    }
}
