//! Shooting integrator for the radial equation
//! `u_rr + ((n-1)/r) u_r + g(u) = 0`, started at the regular center.

mod integrals;
mod profile;

pub use integrals::{sobolev_norm, sphere_area, weighted_gradient_integral, WeightedIntegral};
pub use profile::{Center, Node, NodeProfile, RadialFunction, RadialProfile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{bisect_root, Stepper, Tolerances};
use crate::nonlinearity::Nonlinearity;

/// Bisection iterations used to polish events on the dense output.
pub const EVENT_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up threshold on `1 - u`.
    pub eps_blow: f64,
    pub r_max: f64,
    /// Requested start radius for the center series.
    pub r0: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// The blow-up step cap is active once `1 - u` drops below this band.
    pub guard_band: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            eps_blow: 1e-9,
            r_max: 1e3,
            r0: 1e-6,
            h_min: 1e-15,
            max_steps: 1_000_000,
            guard_band: 1e-2,
        }
    }
}

impl SolverOptions {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            h_min: self.h_min,
        }
    }
}

/// How free shooting terminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ShootStatus {
    HitZero { radius: f64 },
    BlewUp { radius: f64 },
    MaxRadiusReached,
}

impl ShootStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ShootStatus::HitZero { .. } => "HitZero",
            ShootStatus::BlewUp { .. } => "BlewUp",
            ShootStatus::MaxRadiusReached => "MaxRadiusReached",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub status: ShootStatus,
    pub profile: RadialProfile,
}

/// Second-order Taylor start `u = m - g(m) r0^2/(2n)`, `u_r = -g(m) r0/n`.
pub fn series_start(n: usize, g: &dyn Nonlinearity, m: f64, r0: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidCenter(m));
    }
    if !(r0 > 0.0 && r0 <= 1e-4) {
        return Err(Error::Domain {
            what: "start radius r0",
            value: r0,
            expected: "(0, 1e-4]",
        });
    }
    let rhs = g.f(m);
    let n = n as f64;
    Ok((m - rhs * r0 * r0 / (2.0 * n), -rhs * r0 / n))
}

/// Largest radius where the two-term center series is accurate to roughly
/// twelve digits: the next term is `g g' r^4 / (8n(n+2))`.
fn series_radius(g: &dyn Nonlinearity, m: f64) -> f64 {
    let slope = g.fprime(m).abs();
    if slope > 0.0 && slope.is_finite() {
        1e-3 / slope.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Integrates outward from the center value `m` until `u` vanishes, `1 - u`
/// drops below `eps_blow`, or `r_max` is reached.
pub fn integrate(n: usize, g: &dyn Nonlinearity, m: f64, opts: &SolverOptions) -> Result<ShootResult> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
            expected: "n >= 2",
        });
    }
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidCenter(m));
    }
    let center_rhs = g.f(m);
    let valid_radius = series_radius(g, m);
    let r0 = opts.r0.min(valid_radius);
    let (u0, w0) = series_start(n, g, m, r0)?;
    let first = Node { r: r0, u: u0, ur: w0 };

    let single = |status| {
        Ok(ShootResult {
            status,
            profile: RadialProfile::new(n, m, center_rhs, valid_radius, vec![first], Vec::new()),
        })
    };
    if 1.0 - u0 < opts.eps_blow {
        return single(ShootStatus::BlewUp { radius: r0 });
    }
    if u0 <= 0.0 {
        // the parabola already vanished inside the series region
        let radius = if center_rhs > 0.0 {
            (2.0 * n as f64 * m / center_rhs).sqrt()
        } else {
            0.0
        };
        return single(ShootStatus::HitZero { radius });
    }

    let nm1 = n as f64 - 1.0;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -nm1 / r * y[1] - g.f(y[0])];
    let mut stepper = Stepper::new(rhs, r0, [u0, w0], opts.tolerances(), Some(r0));

    let mut nodes = vec![first];
    let mut segments = Vec::new();
    let status = loop {
        if segments.len() >= opts.max_steps {
            return Err(Error::StepBudgetExhausted(opts.max_steps));
        }
        let [u, w] = stepper.y();
        let gap = 1.0 - u;
        let cap = if gap < opts.guard_band && w != 0.0 {
            0.01 * gap / w.abs()
        } else {
            f64::INFINITY
        };
        let step = stepper.step(opts.r_max, cap)?;
        let [u1, _] = step.end();

        if u1 <= 0.0 {
            let radius = bisect_root(step.t0, step.t1(), |r| step.component(0, r), EVENT_BISECTIONS);
            let [u_at, w_at] = step.eval(radius);
            segments.push(step);
            nodes.push(Node {
                r: radius,
                u: u_at,
                ur: w_at,
            });
            break ShootStatus::HitZero { radius };
        }
        if 1.0 - u1 < opts.eps_blow {
            let eps = opts.eps_blow;
            let radius = bisect_root(
                step.t0,
                step.t1(),
                |r| 1.0 - step.component(0, r) - eps,
                EVENT_BISECTIONS,
            );
            let [u_at, w_at] = step.eval(radius);
            segments.push(step);
            nodes.push(Node {
                r: radius,
                u: u_at,
                ur: w_at,
            });
            break ShootStatus::BlewUp { radius };
        }

        let [_, w1] = step.end();
        nodes.push(Node {
            r: step.t1(),
            u: u1,
            ur: w1,
        });
        segments.push(step);
        if stepper.t() >= opts.r_max {
            break ShootStatus::MaxRadiusReached;
        }
    };

    Ok(ShootResult {
        status,
        profile: RadialProfile::new(n, m, center_rhs, valid_radius, nodes, segments),
    })
}
