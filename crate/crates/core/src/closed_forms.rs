//! Explicit singular solutions on the unit ball.
//!
//! * the cone `u = 1 - r`, which solves `-Δu = (n-1)/(1-u)`;
//! * the Bruera–Cabré family `u = 1 - r^(2/(1+p))`, which solves
//!   `-Δu = (2/(1+p))(2/(1+p) + n - 2) (1-u)^(-p)`. Its `p = 2` member is the
//!   singular MEMS solution with `λ_s = (6n - 8)/9`.
//!
//! Along both, `f'(u(r)) r^2` is the constant `κ`, so stability reduces to
//! the Hardy inequality.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{check_dimension, Nonlinearity, NonlinearitySpec};
use crate::quadrature::{sum_shells, ShellSum};
use crate::radial::{Center, Node, RadialFunction};
use crate::stability::{hardy_certificate, hardy_constant, StabilityReport};

const SAMPLE_NODES: usize = 200;
const SAMPLE_MIN_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedFormKind {
    Cone,
    BrueraCabre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    pub kind: ClosedFormKind,
    pub n: usize,
    /// Blow-up exponent of the matched nonlinearity (1 for the cone).
    pub p: f64,
    /// Amplitude `a` of the matched nonlinearity `a (1-u)^(-p)`.
    pub amplitude: f64,
    pub kappa: f64,
    /// `λ` against the unit-amplitude nonlinearity `(1-u)^(-p)`.
    pub lambda_s: Option<f64>,
    #[serde(rename = "F1_finite")]
    pub f1_finite: bool,
}

pub fn cone_solution(n: usize) -> Result<ClosedFormSolution> {
    check_dimension(n, 2)?;
    let a = n as f64 - 1.0;
    Ok(ClosedFormSolution {
        kind: ClosedFormKind::Cone,
        n,
        p: 1.0,
        amplitude: a,
        kappa: a,
        lambda_s: None,
        f1_finite: false,
    })
}

fn bc_member(n: usize, p: f64) -> Result<ClosedFormSolution> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain {
            what: "exponent p",
            value: p,
            expected: "(0, inf)",
        });
    }
    let beta = 2.0 / (1.0 + p);
    let a = beta * (beta + n as f64 - 2.0);
    Ok(ClosedFormSolution {
        kind: ClosedFormKind::BrueraCabre,
        n,
        p,
        amplitude: a,
        kappa: p * a,
        lambda_s: Some(a),
        f1_finite: p < 1.0,
    })
}

/// `u = 1 - r^(2/(1+p))` for `n >= 3`, `p > 0`.
pub fn bc_singular_solution(n: usize, p: f64) -> Result<ClosedFormSolution> {
    check_dimension(n, 3)?;
    bc_member(n, p)
}

/// `u = 1 - r^(2/3)` against `λ_s (1-u)^(-2)`, `λ_s = (6n - 8)/9`.
///
/// The `p = 2` formula stays valid down to `n = 2`, where it yields
/// `λ_s = 4/9`.
pub fn mems_singular_solution(n: usize) -> Result<ClosedFormSolution> {
    check_dimension(n, 2)?;
    bc_member(n, 2.0)
}

impl ClosedFormSolution {
    fn beta(&self) -> f64 {
        2.0 / (1.0 + self.p)
    }

    pub fn u(&self, r: f64) -> f64 {
        match self.kind {
            ClosedFormKind::Cone => 1.0 - r,
            ClosedFormKind::BrueraCabre => 1.0 - r.powf(self.beta()),
        }
    }

    pub fn ur(&self, r: f64) -> f64 {
        match self.kind {
            ClosedFormKind::Cone => -1.0,
            ClosedFormKind::BrueraCabre => {
                let b = self.beta();
                -b * r.powf(b - 1.0)
            }
        }
    }

    pub fn urr(&self, r: f64) -> f64 {
        match self.kind {
            ClosedFormKind::Cone => 0.0,
            ClosedFormKind::BrueraCabre => {
                let b = self.beta();
                -b * (b - 1.0) * r.powf(b - 2.0)
            }
        }
    }

    /// The nonlinearity `a (1-u)^(-p)` this function solves `-Δu = f(u)` for.
    pub fn nonlinearity(&self) -> NonlinearitySpec {
        NonlinearitySpec {
            family: crate::nonlinearity::Family::PowerBlowup,
            a: self.amplitude,
            p: self.p,
        }
    }

    pub fn hardy_constant(&self) -> f64 {
        hardy_constant(self.n)
    }

    pub fn hardy_report(&self) -> StabilityReport {
        hardy_certificate(self.kappa, self.n)
    }

    /// `F(1)` of the matched nonlinearity, `None` when infinite.
    pub fn primitive_at_one(&self) -> Option<f64> {
        self.nonlinearity().primitive_at_blowup()
    }

    /// `int_0^1 u_r^2 / t dt` in closed form, `None` when it diverges.
    pub fn weighted_integral_exact(&self) -> Option<f64> {
        match self.kind {
            ClosedFormKind::Cone => None,
            ClosedFormKind::BrueraCabre if self.p < 1.0 => {
                let b = self.beta();
                Some(b * b * (1.0 + self.p) / (2.0 * (1.0 - self.p)))
            }
            ClosedFormKind::BrueraCabre => None,
        }
    }

    /// `f'(u(r)) r^2` for the matched nonlinearity; constant and equal to `κ`.
    pub fn potential_coefficient(&self, r: f64) -> f64 {
        self.nonlinearity().fprime(self.u(r)) * r * r
    }
}

impl RadialFunction for ClosedFormSolution {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange { r, lo: 0.0, hi: 1.0 });
        }
        Ok((self.u(r), self.ur(r)))
    }

    fn second_derivative(&self, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange { r, lo: 0.0, hi: 1.0 });
        }
        Ok(self.urr(r))
    }

    fn range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn nodes(&self) -> Cow<'_, [Node]> {
        let ln_min = SAMPLE_MIN_RADIUS.ln();
        let nodes = (0..SAMPLE_NODES)
            .map(|i| {
                let r = if i + 1 == SAMPLE_NODES {
                    1.0
                } else {
                    (ln_min * (1.0 - i as f64 / (SAMPLE_NODES - 1) as f64)).exp()
                };
                Node {
                    r,
                    u: self.u(r),
                    ur: self.ur(r),
                }
            })
            .collect();
        Cow::Owned(nodes)
    }

    fn center(&self) -> Center {
        Center::Singular
    }

    fn lambda(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Pointwise residual of `u_rr + ((n-1)/r) u_r + λ g(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// Largest absolute residual.
    pub max_abs: f64,
    /// Largest `|residual| / (1 + λ g(u))`.
    pub max_scaled: f64,
}

/// Residual of `f` against `-Δu = λ g(u)` at `radii` (each in `(0, r_end]`).
/// A mismatched pair is reported, not raised.
pub fn residual(
    f: &dyn RadialFunction,
    g: &dyn Nonlinearity,
    lambda: f64,
    radii: &[f64],
) -> Result<Residual> {
    let nm1 = f.dim() as f64 - 1.0;
    let mut out = Residual {
        max_abs: 0.0,
        max_scaled: 0.0,
    };
    for &r in radii {
        let (u, ur) = f.eval(r)?;
        let urr = f.second_derivative(r)?;
        let source = lambda * g.f(u);
        let res = (urr + nm1 / r * ur + source).abs();
        let res = if res.is_nan() { f64::INFINITY } else { res };
        out.max_abs = out.max_abs.max(res);
        out.max_scaled = out.max_scaled.max(res / (1.0 + source.abs()));
    }
    Ok(out)
}

/// Dyadic Cauchy test on `F(1 - 2^-k)`, `k = 0..=40`: `true` when the
/// increments decay geometrically, i.e. `F(1)` is finite.
pub fn primitive_tail_converges(g: &dyn Nonlinearity) -> bool {
    let values: Vec<f64> = (0..=40).map(|k| g.primitive(1.0 - (-(k as f64)).exp2())).collect();
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    matches!(sum_shells(&increments), ShellSum::Convergent { .. })
}

/// Largest `p` in `(0, 1)` for which the Bruera–Cabré member in dimension `n`
/// passes the Hardy test `κ(p) <= (n-2)^2/4`. `κ` is increasing in `p` there.
/// Returns 0 when no member is stable and 1 when all are.
pub fn bc_stable_p_max(n: usize) -> Result<f64> {
    check_dimension(n, 3)?;
    let h = hardy_constant(n);
    let kappa = |p: f64| bc_member(n, p).map(|s| s.kappa).unwrap_or(f64::INFINITY);
    if kappa(1.0) <= h {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kappa(mid) <= h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::Verdict;
    use approx::assert_relative_eq;

    fn radii() -> Vec<f64> {
        (1..=100).map(|k| k as f64 / 100.0).collect()
    }

    #[test]
    fn cone_parameters_and_verdicts() {
        let c7 = cone_solution(7).unwrap();
        assert_eq!(c7.kappa, 6.0);
        assert_eq!(c7.hardy_constant(), 6.25);
        assert_eq!(c7.hardy_report().verdict, Verdict::Stable);
        let c6 = cone_solution(6).unwrap();
        assert_eq!(c6.kappa, 5.0);
        assert_eq!(c6.hardy_report().verdict, Verdict::Unstable);
        for n in 2..10 {
            let c = cone_solution(n).unwrap();
            assert_eq!(c.u(1.0), 0.0);
            assert_eq!(c.u(0.0), 1.0);
            assert!(!c.f1_finite);
        }
    }

    #[test]
    fn bruera_cabre_parameters() {
        let s = bc_singular_solution(3, 0.5).unwrap();
        assert_relative_eq!(s.amplitude, 28.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(s.kappa, 14.0 / 9.0, max_relative = 1e-15);
        assert!(s.f1_finite);
        assert!(bc_singular_solution(2, 0.5).is_err());
        assert!(bc_singular_solution(3, 0.0).is_err());

        let mems8 = bc_singular_solution(8, 2.0).unwrap();
        assert_relative_eq!(mems8.lambda_s.unwrap(), 40.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(mems8.kappa, 80.0 / 9.0, max_relative = 1e-15);
        assert_eq!(mems8.hardy_report().verdict, Verdict::Stable);

        let small = bc_singular_solution(3, 0.04).unwrap();
        assert!((small.kappa - 0.2249).abs() < 1e-4);
        assert_eq!(small.hardy_report().verdict, Verdict::Stable);
    }

    #[test]
    fn mems_singular_down_to_two_dimensions() {
        let s = mems_singular_solution(2).unwrap();
        assert_relative_eq!(s.lambda_s.unwrap(), 4.0 / 9.0, max_relative = 1e-15);
        assert!(mems_singular_solution(1).is_err());
    }

    #[test]
    fn exact_residuals() {
        let cone = cone_solution(5).unwrap();
        let r = residual(&cone, &cone.nonlinearity(), 1.0, &radii()).unwrap();
        assert!(r.max_abs <= 1e-10, "{r:?}");

        let bc = bc_singular_solution(4, 0.5).unwrap();
        let r = residual(&bc, &bc.nonlinearity(), 1.0, &radii()).unwrap();
        assert!(r.max_abs <= 1e-10, "{r:?}");

        // negative control: the cone is not a MEMS solution
        let r = residual(&cone, &NonlinearitySpec::mems(), 1.0, &radii()).unwrap();
        assert!(r.max_abs > 0.1);
    }

    #[test]
    fn potential_coefficient_is_kappa() {
        for s in [
            cone_solution(4).unwrap(),
            bc_singular_solution(5, 0.3).unwrap(),
            mems_singular_solution(9).unwrap(),
        ] {
            for r in radii() {
                assert!((s.potential_coefficient(r) - s.kappa).abs() <= 1e-10 * s.kappa.max(1.0));
            }
        }
    }

    #[test]
    fn primitive_tail_matches_flag() {
        for p in [0.25, 0.5, 0.9, 1.0, 2.0, 3.0] {
            let g = NonlinearitySpec::power(1.0, p).unwrap();
            assert_eq!(primitive_tail_converges(&g), p < 1.0, "p = {p}");
        }
    }

    #[test]
    fn stable_p_range() {
        let p3 = bc_stable_p_max(3).unwrap();
        assert!(p3 > 0.04 && p3 < 0.05, "{p3}");
        let kappa_at = bc_singular_solution(3, p3).unwrap().kappa;
        assert!((kappa_at - 0.25).abs() < 1e-12);
        assert_eq!(bc_stable_p_max(7).unwrap(), 1.0);
    }
}
