//! Nonlinearities `f : [0, 1) -> [0, inf)` that blow up at `u = 1`.
//!
//! The built-in family is `f(t) = a (1 - t)^(-p)`. It covers the MEMS
//! nonlinearity `(1 - t)^(-2)`, the cone nonlinearity `(n - 1)/(1 - t)` and
//! the Bruera–Cabré family with `p` in `(0, 1)`.
//!
//! Other nonlinearities plug in through the [`Nonlinearity`] trait. The
//! solvers only touch `f` through its six accessors: the value, the first two
//! derivatives, the primitive `F(t) = int_0^t f`, the value `F(1)` when it is
//! finite, and the structural [`NonlinearityFlags`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible distance `1 - t` for the checked evaluators.
pub const MIN_GAP: f64 = 1e-300;

/// Structural hypotheses that gate the regularity results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonlinearityFlags {
    pub nonnegative: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    /// `F(1) = +inf`.
    #[serde(rename = "F1_infinite")]
    pub f1_infinite: bool,
}

/// Extension contract for nonlinearities.
///
/// The raw accessors take `t` without domain checks. Solvers evaluate them
/// slightly outside `[0, 1)` while a step straddles `u = 0`, so an
/// implementation must stay smooth on a neighbourhood of `[0, 1)` and may
/// return non-finite values for `t >= 1` (the integrator rejects such steps).
pub trait Nonlinearity: Send + Sync {
    fn f(&self, t: f64) -> f64;
    fn fprime(&self, t: f64) -> f64;
    fn fsecond(&self, t: f64) -> f64;
    /// `F(t) = int_0^t f(s) ds`.
    fn primitive(&self, t: f64) -> f64;
    /// `F(1)` when finite, `None` when the primitive diverges at the blow-up level.
    fn primitive_at_blowup(&self) -> Option<f64>;
    fn flags(&self) -> NonlinearityFlags;
    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "power")]
    PowerBlowup,
}

/// `f(t) = a (1 - t)^(-p)` with `a, p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub family: Family,
    pub a: f64,
    pub p: f64,
}

impl NonlinearitySpec {
    pub fn power(a: f64, p: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain {
                what: "amplitude a",
                value: a,
                expected: "(0, inf)",
            });
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Domain {
                what: "exponent p",
                value: p,
                expected: "(0, inf)",
            });
        }
        Ok(Self {
            family: Family::PowerBlowup,
            a,
            p,
        })
    }

    /// `(1 - t)^(-2)`.
    pub fn mems() -> Self {
        Self {
            family: Family::PowerBlowup,
            a: 1.0,
            p: 2.0,
        }
    }

    /// `(n - 1)/(1 - t)`, matched to the cone `u = 1 - |x|`.
    pub fn cone(n: usize) -> Result<Self> {
        check_dimension(n, 2)?;
        Self::power(n as f64 - 1.0, 1.0)
    }

    /// `(2/(1+p)) (2/(1+p) + n - 2) (1 - t)^(-p)`, matched to `u = 1 - |x|^(2/(1+p))`.
    pub fn bruera_cabre(n: usize, p: f64) -> Result<Self> {
        check_dimension(n, 2)?;
        let beta = 2.0 / (1.0 + p);
        Self::power(beta * (beta + n as f64 - 2.0), p)
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..1.0).contains(&t) || 1.0 - t < MIN_GAP {
            return Err(Error::Domain {
                what: "t",
                value: t,
                expected: "[0, 1)",
            });
        }
        Ok(())
    }

    pub fn eval_f(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.f(t))
    }

    pub fn eval_fprime(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.fprime(t))
    }

    pub fn eval_fsecond(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.fsecond(t))
    }

    pub fn eval_primitive(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.primitive(t))
    }

    /// Exact `f f'' / f'^2` for the power family, constant in `t`.
    pub fn gamma_exact(&self) -> f64 {
        (self.p + 1.0) / self.p
    }

    pub fn classify(&self) -> NonlinearityFlags {
        self.flags()
    }

    /// `a (1 - t)^(-q)` evaluated as `a exp(-q ln(1 - t))`.
    fn scaled_power(&self, coeff: f64, q: f64, t: f64) -> f64 {
        coeff * (-q * (-t).ln_1p()).exp()
    }
}

impl Nonlinearity for NonlinearitySpec {
    fn f(&self, t: f64) -> f64 {
        self.scaled_power(self.a, self.p, t)
    }

    fn fprime(&self, t: f64) -> f64 {
        self.scaled_power(self.a * self.p, self.p + 1.0, t)
    }

    fn fsecond(&self, t: f64) -> f64 {
        self.scaled_power(self.a * self.p * (self.p + 1.0), self.p + 2.0, t)
    }

    fn primitive(&self, t: f64) -> f64 {
        let log_gap = (-t).ln_1p();
        let q = 1.0 - self.p;
        if q.abs() < 1e-12 {
            -self.a * log_gap
        } else {
            // a ((1-t)^(1-p) - 1)/(p - 1), written to survive p -> 1
            -self.a * (q * log_gap).exp_m1() / q
        }
    }

    fn primitive_at_blowup(&self) -> Option<f64> {
        (self.p < 1.0).then(|| self.a / (1.0 - self.p))
    }

    fn flags(&self) -> NonlinearityFlags {
        NonlinearityFlags {
            nonnegative: true,
            nondecreasing: true,
            convex: true,
            f1_infinite: self.p >= 1.0,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "power(a={},p={})", self.a, self.p)
    }
}

/// Accepts `mems`, `cone:N`, `bc:N:P`, `power:A:P` and the display form
/// `power(a=A,p=P)`.
impl FromStr for NonlinearitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unrecognised nonlinearity `{s}`"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let dim = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());

        if s == "mems" {
            return Ok(Self::mems());
        }
        if let Some(inner) = s
            .strip_prefix("power(")
            .and_then(|rest| rest.strip_suffix(')'))
        {
            let mut a = None;
            let mut p = None;
            for part in inner.split(',') {
                match part.split_once('=') {
                    Some(("a", v)) => a = Some(num(v)?),
                    Some(("p", v)) => p = Some(num(v)?),
                    _ => return Err(bad()),
                }
            }
            return Self::power(a.ok_or_else(bad)?, p.ok_or_else(bad)?);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["cone", n] => Self::cone(dim(n)?),
            ["bc", n, p] => Self::bruera_cabre(dim(n)?, num(p)?),
            ["power", a, p] => Self::power(num(a)?, num(p)?),
            _ => Err(bad()),
        }
    }
}

/// Constant source `f = c`, the simplest member of the extension contract.
/// Its radial solutions are the parabolas `u = m - c r^2/(2n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Nonlinearity for Constant {
    fn f(&self, _t: f64) -> f64 {
        self.0
    }

    fn fprime(&self, _t: f64) -> f64 {
        0.0
    }

    fn fsecond(&self, _t: f64) -> f64 {
        0.0
    }

    fn primitive(&self, t: f64) -> f64 {
        self.0 * t
    }

    fn primitive_at_blowup(&self) -> Option<f64> {
        Some(self.0)
    }

    fn flags(&self) -> NonlinearityFlags {
        NonlinearityFlags {
            nonnegative: self.0 >= 0.0,
            nondecreasing: true,
            convex: true,
            f1_infinite: false,
        }
    }

    fn label(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// Numeric liminf of `f f'' / f'^2` as `t -> 1-`.
///
/// Samples `t_k = 1 - 2^-k` for `k = 1..=40` and returns the minimum over the
/// tail `k > 20`.
pub fn crandall_rabinowitz_estimate(f: &dyn Nonlinearity) -> f64 {
    (21..=40)
        .map(|k| {
            let t = 1.0 - (-(k as f64)).exp2();
            let d1 = f.fprime(t);
            f.f(t) * f.fsecond(t) / (d1 * d1)
        })
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn check_dimension(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
            expected: "n >= 2 (n >= 3 for the Bruera-Cabre family)",
        });
    }
    Ok(())
}
