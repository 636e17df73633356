use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_panels, sum_shells, ShellSum};

use super::profile::{Center, RadialFunction};

const HEAD_CUT: f64 = 1e-4;
/// Dyadic shells `[2^-(k+1), 2^-k]` summed for singular centers.
const SHELLS: usize = 64;
const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-13;

/// Result of `int_0^1 u_r(t)^2 / t dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightedIntegral {
    Finite { value: f64, error: f64 },
    /// Dyadic shell contributions do not decay; `partial` is the sum of the
    /// shells that were evaluated.
    Divergent { partial: f64 },
}

impl WeightedIntegral {
    pub fn value(&self) -> f64 {
        match *self {
            WeightedIntegral::Finite { value, .. } => value,
            WeightedIntegral::Divergent { .. } => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, WeightedIntegral::Divergent { .. })
    }
}

/// Surface area `ω_n = 2 π^(n/2) / Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    // Γ(n/2) by the recursion Γ(x + 1) = x Γ(x) from Γ(1) or Γ(1/2)
    let (mut x, mut gamma) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = n as f64 / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(target) / gamma
}

fn panel_breaks(f: &dyn RadialFunction, lo: f64, hi: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = match f.center() {
        Center::Regular { .. } => f.breakpoints(),
        Center::Singular => (0..SHELLS).map(|k| (-(k as f64)).exp2()).collect(),
    };
    breaks.retain(|&r| r > lo && r < hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn slope_sq(f: &dyn RadialFunction, r: f64) -> f64 {
    f.eval(r).map(|(_, ur)| ur * ur).unwrap_or(f64::NAN)
}

/// `int_0^{r_end} u_r(t)^2 / t dt` (without the `n - 1` factor).
///
/// Regular centers: adaptive quadrature on the interpolant over
/// `[r_cut, r_end]` plus the series head `rhs^2 r_cut^2 / (2 n^2)`.
/// Singular centers: dyadic shells down to `2^-64` with a ratio test on the
/// shell contributions.
pub fn weighted_gradient_integral(f: &dyn RadialFunction) -> WeightedIntegral {
    let (r_lo, r_end) = f.range();
    let n = f.dim() as f64;
    let integrand = |t: f64| slope_sq(f, t) / t;
    match f.center() {
        Center::Regular {
            rhs, series_radius, ..
        } => {
            let r_cut = r_lo.max(HEAD_CUT.min(series_radius)).min(r_end);
            let head = rhs * rhs * r_cut * r_cut / (2.0 * n * n);
            let body = integrate_panels(integrand, &panel_breaks(f, r_cut, r_end), ABS_TOL, REL_TOL);
            WeightedIntegral::Finite {
                value: head + body.value,
                error: body.error,
            }
        }
        Center::Singular => {
            let shells: Vec<f64> = (0..SHELLS)
                .map(|k| {
                    let hi = (-(k as f64)).exp2().min(r_end);
                    let lo = (-(k as f64 + 1.0)).exp2();
                    if hi <= lo {
                        0.0
                    } else {
                        integrate(integrand, lo, hi, 0.0, REL_TOL).value
                    }
                })
                .collect();
            match sum_shells(&shells) {
                ShellSum::Convergent { value, tail } => WeightedIntegral::Finite {
                    value,
                    error: tail.abs() * 1e-6,
                },
                ShellSum::Divergent { partial } => WeightedIntegral::Divergent { partial },
            }
        }
    }
}

/// `ω_n int_{r_lo}^{r_hi} r^(n-1) u_r^2 dr`, the Dirichlet energy of the
/// annulus `r_lo < |x| < r_hi`.
pub fn sobolev_norm(f: &dyn RadialFunction, r_lo: f64, r_hi: f64) -> Result<f64> {
    let (lo, hi) = f.range();
    let slack = 1e-14 * hi.abs().max(1.0);
    if !(r_lo >= lo - slack && r_hi <= hi + slack && r_lo < r_hi) {
        return Err(Error::OutOfRange {
            r: if r_lo < lo - slack { r_lo } else { r_hi },
            lo,
            hi,
        });
    }
    let (r_lo, r_hi) = (r_lo.max(lo), r_hi.min(hi));
    let k = f.dim() as i32 - 1;
    let e = integrate_panels(
        |r| r.powi(k) * slope_sq(f, r),
        &panel_breaks(f, r_lo, r_hi),
        0.0,
        1e-13,
    );
    Ok(sphere_area(f.dim()) * e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }
}
