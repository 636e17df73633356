//! Individual checks on one profile.

use crate::closed_forms::{residual, ClosedFormKind, ClosedFormSolution};
use crate::error::{Error, Result};
use crate::io::format_float;
use crate::nonlinearity::{Nonlinearity, NonlinearityFlags};
use crate::radial::{sobolev_norm, sphere_area, weighted_gradient_integral, Center, RadialFunction};

use super::baseline::SandwichBaseline;
use super::check::CheckResult;

pub const IDENTITY_TOL: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-9;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const PROFILE_RESIDUAL_TOL: f64 = 1e-7;
const CONSISTENCY_TOL: f64 = 1e-8;
const SLOPE_RADII: usize = 50;
const PSI_POINTS: usize = 64;
const ANNULUS_POINTS: usize = 101;

pub mod citation {
    pub const IDENTITY: &str = "lambda F(m) = (n-1) int_0^1 u_r(t)^2/t dt + u_r(1)^2/2";
    pub const FLUX: &str = "r^(n-1) u_r is nonincreasing and vanishes at the center";
    pub const SQUARED_FLUX: &str = "t^(2n-2) u_r(t)^2 is nondecreasing";
    pub const ENERGY: &str = "omega_n int_0^1 r^(n-1) u_r^2 dr <= omega_n |u_r(1)|";
    pub const UR1: &str = "|u_r(1)| <= 2 for stable solutions with nondecreasing f";
    pub const SLOPE: &str = "|u_r(t)| >= t |u_r(1)| on (0, 1]";
    pub const PSI: &str = "Psi(s) = -n s^((n-1)/n) u_r(s^(1/n)) is concave";
    pub const SANDWICH_LOWER: &str = "u_r(1)^2/2 <= lambda F(m)";
    pub const SANDWICH_RATIO: &str = "lambda F(m) <= C u_r(1)^2 with finite C for 2 <= n <= 6";
    pub const SANDWICH_UNIVERSAL: &str = "lambda F(m) <= 4 C_n for nondecreasing f, 2 <= n <= 6";
    pub const SANDWICH_CONSISTENCY: &str = "lambda F(m) - u_r(1)^2/2 = (n-1) int_0^1 u_r^2/t dt";
    pub const DECAY_ANNULUS: &str =
        "|u_r(t)| <= 2^(n/2+sqrt(n-1)) |u_r(1)| t^alpha on [1/2, 1], alpha = -n/2+sqrt(n-1)+1";
    pub const DECAY_SHAPE: &str = "sup |u_r(t)| / (|u_r(1)| t^alpha) is finite";
    pub const RESIDUAL: &str = "u_rr + (n-1)/r u_r + lambda f(u) = 0";
    pub const HARDY: &str = "stable iff kappa <= (n-2)^2/4 for the potential kappa/r^2";
    pub const INTEGRABILITY: &str = "-n + 2 sqrt(n-1) + 2 > 0 iff 2 <= n <= 6";
}

/// `α(n) = -n/2 + √(n-1) + 1`.
pub fn decay_exponent(n: usize) -> f64 {
    let n = n as f64;
    -n / 2.0 + (n - 1.0).sqrt() + 1.0
}

/// `-n + 2√(n-1) + 2`, positive exactly for `2 <= n <= 6`.
pub fn integrability_margin(n: usize) -> f64 {
    let n = n as f64;
    -n + 2.0 * (n - 1.0).sqrt() + 2.0
}

/// `2^(n/2 + √(n-1))`.
pub fn half_annulus_constant(n: usize) -> f64 {
    let n = n as f64;
    (n / 2.0 + (n - 1.0).sqrt()).exp2()
}

/// A profile paired with the equation `-Δu = λ f(u)` it is meant to solve.
pub struct Subject<'a> {
    pub profile: &'a dyn RadialFunction,
    pub f: &'a dyn Nonlinearity,
    pub lambda: f64,
    pub label: String,
}

impl<'a> Subject<'a> {
    pub fn new(profile: &'a dyn RadialFunction, f: &'a dyn Nonlinearity, lambda: f64) -> Self {
        let center = match profile.center() {
            Center::Regular { m, .. } => format_float(m),
            Center::Singular => "singular".to_string(),
        };
        let label = format!("{} m={center} lambda={}", f.label(), format_float(lambda));
        Self {
            profile,
            f,
            lambda,
            label,
        }
    }

    /// A closed form against its own matched nonlinearity, `λ = 1`.
    pub fn closed_form(sol: &'a ClosedFormSolution, f: &'a dyn Nonlinearity) -> Self {
        let mut subject = Self::new(sol, f, 1.0);
        let kind = match sol.kind {
            ClosedFormKind::Cone => "cone",
            ClosedFormKind::BrueraCabre => "bc",
        };
        subject.label = format!("{kind} {}", subject.label);
        subject
    }

    pub fn n(&self) -> usize {
        self.profile.dim()
    }

    /// `λ F(‖u‖_∞)`; `‖u‖_∞ = 1` for singular centers.
    pub fn scaled_primitive(&self) -> f64 {
        match self.profile.center() {
            Center::Regular { m, .. } => self.lambda * self.f.primitive(m),
            Center::Singular => self
                .f
                .primitive_at_blowup()
                .map_or(f64::INFINITY, |value| self.lambda * value),
        }
    }

    pub fn ur1(&self) -> Result<f64> {
        self.profile.boundary_slope()
    }

    fn weighted_integral(&self) -> f64 {
        weighted_gradient_integral(self.profile).value()
    }
}

pub fn check_identity(s: &Subject) -> Result<CheckResult> {
    let n = s.n();
    let ur1 = s.ur1()?;
    let lhs = s.scaled_primitive();
    let rhs = (n as f64 - 1.0) * s.weighted_integral() + 0.5 * ur1 * ur1;
    Ok(CheckResult::rel_eq("energy_identity", citation::IDENTITY, n, &s.label, lhs, rhs, IDENTITY_TOL))
}

/// Both sides of the energy identity for a closed form, from formulas only.
pub fn check_closed_form_identity(sol: &ClosedFormSolution) -> CheckResult {
    let n = sol.n;
    let ur1 = sol.ur(1.0);
    let lhs = sol.primitive_at_one().map_or(f64::INFINITY, |value| value);
    let rhs = sol
        .weighted_integral_exact()
        .map_or(f64::INFINITY, |w| (n as f64 - 1.0) * w + 0.5 * ur1 * ur1);
    let params = format!("{} closed form", sol.nonlinearity());
    CheckResult::rel_eq(
        "energy_identity_closed_form",
        citation::IDENTITY,
        n,
        params,
        lhs,
        rhs,
        CLOSED_FORM_TOL,
    )
}

/// Flux monotonicity across adjacent nodes and, for regular centers, the
/// center flux bound `|r0^(n-1) u_r(r0)| <= 2 λ f(m) r0^n / n`.
pub fn check_flux_monotonicity(s: &Subject) -> Vec<CheckResult> {
    let n = s.n();
    let k = n as i32 - 1;
    let nodes = s.profile.nodes();
    let flux: Vec<f64> = nodes.iter().map(|node| node.r.powi(k) * node.ur).collect();
    let worst = |values: &[f64], increasing: bool| {
        values
            .windows(2)
            .map(|w| {
                let step = if increasing { w[0] - w[1] } else { w[1] - w[0] };
                step / w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE)
            })
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    };
    let squared: Vec<f64> = flux.iter().map(|q| q * q).collect();
    let mut out = vec![
        CheckResult::le("flux_monotone", citation::FLUX, n, &s.label, worst(&flux, false), 0.0, BOUND_TOL),
        CheckResult::le(
            "squared_flux_monotone",
            citation::SQUARED_FLUX,
            n,
            &s.label,
            worst(&squared, true),
            0.0,
            BOUND_TOL,
        ),
    ];
    if let (Center::Regular { rhs, .. }, Some(first)) = (s.profile.center(), nodes.first()) {
        let r0 = first.r;
        out.push(CheckResult::le(
            "center_flux",
            citation::FLUX,
            n,
            &s.label,
            (r0.powi(k) * first.ur).abs(),
            2.0 * rhs * r0.powi(n as i32) / n as f64,
            0.0,
        ));
    }
    out
}

pub fn check_energy_bound(s: &Subject) -> Result<CheckResult> {
    let n = s.n();
    let (lo, hi) = s.profile.range();
    let lhs = sobolev_norm(s.profile, lo, hi)?;
    let rhs = sphere_area(n) * s.ur1()?.abs();
    Ok(CheckResult::le("energy_bound", citation::ENERGY, n, &s.label, lhs, rhs, BOUND_TOL))
}

/// Second differences of equally spaced samples must be nonpositive.
pub fn check_psi_concavity(n: usize, params: &str, psi: &[f64]) -> CheckResult {
    let scale = psi.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    let worst = psi
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / scale)
        .fold(f64::NEG_INFINITY, f64::max);
    CheckResult::le("psi_concave", citation::PSI, n, params, worst, 0.0, BOUND_TOL)
}

/// `|u_r(1)| <= 2` with the slope comparison and the concavity of `Ψ`.
/// Only meaningful for stable profiles; requires nondecreasing `f`.
pub fn check_ur1_bound(s: &Subject, flags: NonlinearityFlags) -> Result<Vec<CheckResult>> {
    if !flags.nondecreasing {
        return Err(Error::NotApplicable {
            check: "ur1_bound",
            reason: format!("{} is not nondecreasing", s.f.label()),
        });
    }
    let n = s.n();
    let ur1 = s.ur1()?.abs();

    let mut slope_gap = f64::NEG_INFINITY;
    let mut worst = (0.0, 0.0);
    for k in 1..=SLOPE_RADII {
        let t = k as f64 / SLOPE_RADII as f64;
        let slope = s.profile.eval(t)?.1.abs();
        if t * ur1 - slope > slope_gap {
            slope_gap = t * ur1 - slope;
            worst = (t * ur1, slope);
        }
    }

    let nf = n as f64;
    let psi = (1..=PSI_POINTS)
        .map(|k| {
            let s_k = k as f64 / PSI_POINTS as f64;
            let r = s_k.powf(1.0 / nf);
            Ok(-nf * s_k.powf((nf - 1.0) / nf) * s.profile.eval(r)?.1)
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(vec![
        CheckResult::le("ur1_bound", citation::UR1, n, &s.label, ur1, 2.0, BOUND_TOL),
        CheckResult::le("slope_comparison", citation::SLOPE, n, &s.label, worst.0, worst.1, BOUND_TOL),
        check_psi_concavity(n, &s.label, &psi),
    ])
}

/// Lower sandwich bound, finiteness of `λF/u_r(1)^2`, the universal bound
/// against the recorded constant and the identity cross-check.
pub fn check_sandwich(s: &Subject, baseline: &SandwichBaseline) -> Result<Vec<CheckResult>> {
    let n = s.n();
    if !(2..=6).contains(&n) {
        return Err(Error::DimensionOutOfRange {
            check: "sandwich",
            n,
            lo: 2,
            hi: 6,
        });
    }
    let ur1 = s.ur1()?;
    let energy = s.scaled_primitive();
    let lower = 0.5 * ur1 * ur1;
    let mut out = vec![
        CheckResult::le("sandwich_lower", citation::SANDWICH_LOWER, n, &s.label, lower, energy, BOUND_TOL),
        CheckResult::finite("sandwich_ratio", citation::SANDWICH_RATIO, n, &s.label, energy / (ur1 * ur1)),
    ];
    if s.f.flags().nondecreasing {
        if let Some(constant) = baseline.constant(n) {
            out.push(CheckResult::le(
                "sandwich_universal",
                citation::SANDWICH_UNIVERSAL,
                n,
                &s.label,
                energy,
                4.0 * constant,
                BOUND_TOL,
            ));
        }
    }
    let weighted = (n as f64 - 1.0) * s.weighted_integral();
    out.push(CheckResult::le(
        "sandwich_consistency",
        citation::SANDWICH_CONSISTENCY,
        n,
        &s.label,
        (energy - lower - weighted).abs(),
        0.0,
        CONSISTENCY_TOL * energy.abs().max(1.0),
    ));
    Ok(out)
}

/// Exact decay bound on `[1/2, 1]` and the finite shape ratio below.
pub fn check_decay(s: &Subject) -> Result<Vec<CheckResult>> {
    let n = s.n();
    let alpha = decay_exponent(n);
    let c = half_annulus_constant(n);
    let ur1 = s.ur1()?.abs();

    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for k in 0..ANNULUS_POINTS {
        let t = 0.5 + 0.5 * k as f64 / (ANNULUS_POINTS - 1) as f64;
        let slope = s.profile.eval(t)?.1.abs();
        let bound = c * ur1 * t.powf(alpha);
        if slope - bound > worst.0 {
            worst = (slope - bound, slope, bound);
        }
    }

    let lo = s.profile.range().0;
    let mut sup = 0.0f64;
    let mut t = 1.0;
    for _ in 0..=60 {
        if t < lo {
            break;
        }
        let slope = s.profile.eval(t)?.1.abs();
        sup = sup.max(slope / (ur1 * t.powf(alpha)));
        t *= 0.5;
    }

    Ok(vec![
        CheckResult::le("decay_half_annulus", citation::DECAY_ANNULUS, n, &s.label, worst.1, worst.2, BOUND_TOL),
        CheckResult::finite("decay_shape", citation::DECAY_SHAPE, n, &s.label, sup),
    ])
}

/// Scaled residual of a solved profile at 50 interior radii.
pub fn check_profile_residual(s: &Subject) -> Result<CheckResult> {
    let (lo, hi) = s.profile.range();
    let radii: Vec<f64> = (1..=SLOPE_RADII)
        .map(|k| lo + (hi - lo) * k as f64 / (SLOPE_RADII + 1) as f64)
        .collect();
    let res = residual(s.profile, s.f, s.lambda, &radii)?;
    Ok(CheckResult::le(
        "profile_residual",
        citation::RESIDUAL,
        s.n(),
        &s.label,
        res.max_scaled,
        0.0,
        PROFILE_RESIDUAL_TOL,
    ))
}

/// Absolute residual of a closed form at `r = k/100`.
pub fn check_closed_form_residual(s: &Subject) -> Result<CheckResult> {
    let radii: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
    let res = residual(s.profile, s.f, s.lambda, &radii)?;
    Ok(CheckResult::le(
        "closed_form_residual",
        citation::RESIDUAL,
        s.n(),
        &s.label,
        res.max_abs,
        0.0,
        CLOSED_FORM_TOL,
    ))
}
